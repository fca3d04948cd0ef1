#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wispr/topology.hpp"

namespace wispr {

struct PathGroup {
    std::vector<PathSpec> paths;  // pairwise interior-disjoint
    std::vector<double> weights;  // >= 0, sum to 1
};

struct PathCount {
    std::uint64_t count = 0;
    bool truncated = false;  // hit the enumeration cap
};

inline constexpr std::uint64_t kDefaultPathCap = 1'000'000;

// Add n links between uniformly drawn node pairs that are not adjacent in the
// original topology. New links inherit the attributes of the lowest-capacity
// link already incident to their endpoints.
Topology add_cross_links(const Topology& topo, int n, std::uint64_t rng_seed);

// Add n links, each duplicating the (node, upstream-parent) edge of a
// uniformly drawn non-gateway node. Requires a tree rooted at the gateway.
Topology add_parallel_links(const Topology& topo, int n, std::uint64_t rng_seed);

// Exhaustive simple-path count from an edge node to the gateway, aborting once
// cap paths are found.
PathCount count_paths(const Topology& topo, const std::string& edge,
                      std::uint64_t cap = kDefaultPathCap);

// Empirical CDF of count_paths over all edge nodes: (path_count, cum_fraction)
// pairs, ascending, truncated counts reported at cap.
std::vector<std::pair<std::uint64_t, double>> path_count_cdf(
    const Topology& topo, std::uint64_t cap = kDefaultPathCap);

struct CoordinateRow {
    std::string id;
    double lat = 0.0;
    double lon = 0.0;
};

std::vector<CoordinateRow> load_coordinates_csv(const std::filesystem::path& file);

// Cluster coordinates, pick the center-most node as gateway, assign BFS depths
// and wire each node to up to fanout uniformly drawn nodes one level up.
Topology synthesize_topology(const std::vector<CoordinateRow>& coordinates, int fanout,
                             double cluster_radius_m, std::uint64_t rng_seed);

// weight_i = bottleneck_i / sum(bottlenecks)
std::vector<double> capacity_weights(const std::vector<PathSpec>& paths);

// Per-switch outbound port weights: sum path weights per (node, next hop),
// then normalize per node.
std::map<std::pair<std::string, std::string>, double> port_weights(
    const std::vector<PathGroup>& groups);

PathGroup build_path_group(const Topology& topo, const std::string& src,
                           const std::string& dst, int k);

}  // namespace wispr
