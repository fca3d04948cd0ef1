#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wispr/error.hpp"

namespace wispr {

enum class NodeRole { Gateway, Backhaul, Edge };

const char* to_string(NodeRole role);
NodeRole role_from_string(const std::string& s);

struct Node {
    std::string id;
    NodeRole role = NodeRole::Backhaul;
    std::optional<double> lat;
    std::optional<double> lon;

    bool operator==(const Node&) const = default;
};

// Links are undirected with symmetric capacity. Parallel links between the
// same pair are allowed and distinguished by their index in Topology::links.
struct Link {
    std::string a;
    std::string b;
    double capacity_mbps = 0.0;
    double loss = 0.0;
    double delay_ms = 0.0;
    int channel_mhz = 20;
    std::optional<double> bearing_a;  // azimuth at endpoint a, degrees
    std::optional<double> bearing_b;

    bool joins(const std::string& u, const std::string& v) const {
        return (a == u && b == v) || (a == v && b == u);
    }
    bool incident(const std::string& u) const { return a == u || b == u; }
    const std::string& other(const std::string& u) const { return a == u ? b : a; }

    bool operator==(const Link&) const = default;
};

struct Topology {
    std::vector<Node> nodes;
    std::vector<Link> links;

    const Node* find_node(const std::string& id) const;
    int node_index(const std::string& id) const;  // -1 if absent
    std::string gateway() const;                  // throws if not exactly one
    std::vector<std::string> edge_nodes() const;
    std::vector<int> incident_links(const std::string& id) const;
    bool adjacent(const std::string& u, const std::string& v) const;

    bool operator==(const Topology&) const = default;
};

struct PathSpec {
    std::vector<std::string> nodes;  // source first, destination last
    double bottleneck_mbps = 0.0;

    bool operator==(const PathSpec&) const = default;
};

Topology load_topology(const std::filesystem::path& file);
void save_topology(const Topology& topo, const std::filesystem::path& file);
std::string topology_to_json_string(const Topology& topo);
Topology topology_from_json_string(const std::string& text);

// Empty list iff all topology invariants hold.
std::vector<std::string> validate(const Topology& topo);

// Max flow from the gateway to a super-sink attached to every edge node.
// Each physical link contributes its capacity in both directions.
double network_capacity(const Topology& topo);

// Link indices of a minimum gateway/edge-separating cut; capacity sum equals
// network_capacity. Deterministic (source-side cut, ascending index).
std::vector<int> min_cut_links(const Topology& topo);

// Greedy successive-shortest-path extraction of up to k interior-node-disjoint
// paths, hop-count shortest first, lowest node id on ties.
std::vector<PathSpec> shortest_disjoint_paths(const Topology& topo,
                                              const std::string& src,
                                              const std::string& dst, int k);

}  // namespace wispr
