#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "wispr/topology.hpp"

using namespace wispr;
namespace fs = std::filesystem;

namespace {

Node node(const std::string& id, NodeRole role) { return {id, role, {}, {}}; }

Link link(const std::string& a, const std::string& b, double cap) {
    Link l;
    l.a = a;
    l.b = b;
    l.capacity_mbps = cap;
    return l;
}

Topology three_node_tree() {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
               node("e", NodeRole::Edge)};
    t.links = {link("g", "a", 100), link("a", "e", 50)};
    return t;
}

// Independent oracle: exhaustive enumeration over all gateway-side vertex
// sets that exclude every edge node.
double brute_force_min_cut(const Topology& t) {
    const std::string gw = t.gateway();
    std::vector<std::string> others;
    for (const auto& n : t.nodes)
        if (n.id != gw && n.role != NodeRole::Edge) others.push_back(n.id);
    double best = 0.0;
    bool first = true;
    for (std::uint64_t mask = 0; mask < (1ull << others.size()); ++mask) {
        std::set<std::string> side{gw};
        for (size_t i = 0; i < others.size(); ++i)
            if (mask & (1ull << i)) side.insert(others[i]);
        double cut = 0.0;
        for (const auto& l : t.links)
            if (side.count(l.a) != side.count(l.b)) cut += l.capacity_mbps;
        if (first || cut < best) {
            best = cut;
            first = false;
        }
    }
    return best;
}

fs::path write_temp(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

Topology random_graph(std::mt19937_64& rng) {
    int n = 4 + static_cast<int>(rng() % 6);  // 4..9 nodes + gateway <= 10
    Topology t;
    t.nodes.push_back(node("g", NodeRole::Gateway));
    for (int i = 1; i < n; ++i) {
        std::string id = "n" + std::to_string(i);
        t.nodes.push_back(node(id, i >= n - 2 ? NodeRole::Edge : NodeRole::Backhaul));
    }
    // Spanning chain keeps everything reachable, then random extras.
    for (int i = 1; i < n; ++i)
        t.links.push_back(link(t.nodes[rng() % i].id, t.nodes[i].id, 10 + rng() % 200));
    int extra = static_cast<int>(rng() % 6);
    for (int i = 0; i < extra; ++i) {
        int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
        if (a != b) t.links.push_back(link(t.nodes[a].id, t.nodes[b].id, 10 + rng() % 200));
    }
    return t;
}

}  // namespace

TEST_CASE("load_topology accepts a minimal valid file") {
    auto p = write_temp("topo_min.json", R"({
      "nodes":[{"id":"g","role":"gateway"},{"id":"a","role":"backhaul"},
               {"id":"e","role":"edge"}],
      "links":[{"a":"g","b":"a","capacity_mbps":100,"loss":0,"delay_ms":1,"channel_mhz":20},
               {"a":"a","b":"e","capacity_mbps":50,"loss":0,"delay_ms":1,"channel_mhz":20}]})");
    Topology t = load_topology(p);
    CHECK(t.nodes.size() == 3);
    CHECK(t.links.size() == 2);
    CHECK(validate(t).empty());
}

TEST_CASE("load_topology reports dangling endpoints by name") {
    auto p = write_temp("topo_dangling.json", R"({
      "nodes":[{"id":"g","role":"gateway"},{"id":"e","role":"edge"}],
      "links":[{"a":"g","b":"z","capacity_mbps":100}]})");
    CHECK_THROWS_WITH_AS(load_topology(p), doctest::Contains("'z'"), Error);
}

TEST_CASE("load_topology rejects multiple gateways") {
    auto p = write_temp("topo_twogw.json", R"({
      "nodes":[{"id":"g1","role":"gateway"},{"id":"g2","role":"gateway"}],
      "links":[]})");
    CHECK_THROWS_WITH_AS(load_topology(p), doctest::Contains("multiple gateways"), Error);
}

TEST_CASE("topology JSON roundtrip is exact") {
    Topology t = three_node_tree();
    t.nodes[0].lat = 39.25;
    t.nodes[0].lon = -123.1;
    t.links[0].bearing_a = 45.0;
    t.links[0].loss = 0.02;
    t.links[0].delay_ms = 3.5;
    Topology back = topology_from_json_string(topology_to_json_string(t));
    CHECK(back == t);
}

TEST_CASE("network_capacity basics") {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("e", NodeRole::Edge)};
    t.links = {link("g", "e", 100)};
    CHECK(network_capacity(t) == doctest::Approx(100));

    t.links.push_back(link("g", "e", 100));
    CHECK(network_capacity(t) == doctest::Approx(200));
}

TEST_CASE("network_capacity matches cut enumeration on the branching graph") {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
               node("e1", NodeRole::Edge), node("e2", NodeRole::Edge)};
    t.links = {link("g", "a", 100), link("a", "e1", 60), link("a", "e2", 60)};
    CHECK(brute_force_min_cut(t) == doctest::Approx(100));
    CHECK(network_capacity(t) == doctest::Approx(100));
}

TEST_CASE("network_capacity requires edge nodes") {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul)};
    t.links = {link("g", "a", 100)};
    CHECK_THROWS_AS(network_capacity(t), Error);
}

TEST_CASE("min_cut_links finds the bottleneck") {
    Topology t = three_node_tree();
    auto cut = min_cut_links(t);
    REQUIRE(cut.size() == 1);
    CHECK(t.links[cut[0]].joins("a", "e"));

    Topology single;
    single.nodes = {node("g", NodeRole::Gateway), node("e", NodeRole::Edge)};
    single.links = {link("g", "e", 100)};
    auto cut2 = min_cut_links(single);
    REQUIRE(cut2.size() == 1);
    CHECK(cut2[0] == 0);
}

TEST_CASE("min_cut_links on the diamond") {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
               node("b", NodeRole::Backhaul), node("e", NodeRole::Edge)};
    t.links = {link("g", "a", 100), link("g", "b", 100), link("a", "e", 30),
               link("b", "e", 30)};
    CHECK(brute_force_min_cut(t) == doctest::Approx(60));
    auto cut = min_cut_links(t);
    double total = 0.0;
    for (int li : cut) total += t.links[li].capacity_mbps;
    CHECK(total == doctest::Approx(60));
    REQUIRE(cut.size() == 2);
    CHECK(t.links[cut[0]].joins("a", "e"));
    CHECK(t.links[cut[1]].joins("b", "e"));
}

TEST_CASE("shortest_disjoint_paths on the diamond") {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
               node("b", NodeRole::Backhaul), node("e", NodeRole::Edge)};
    t.links = {link("g", "a", 100), link("g", "b", 80), link("a", "e", 30),
               link("b", "e", 40)};
    auto paths = shortest_disjoint_paths(t, "g", "e", 2);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].nodes == std::vector<std::string>{"g", "a", "e"});
    CHECK(paths[1].nodes == std::vector<std::string>{"g", "b", "e"});
    CHECK(paths[0].bottleneck_mbps == doctest::Approx(30));
    CHECK(paths[1].bottleneck_mbps == doctest::Approx(40));
}

TEST_CASE("shortest_disjoint_paths on a tree yields one path") {
    Topology t = three_node_tree();
    auto paths = shortest_disjoint_paths(t, "g", "e", 3);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].nodes == std::vector<std::string>{"g", "a", "e"});
}

TEST_CASE("five parallel chains give five disjoint paths") {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("e", NodeRole::Edge)};
    for (int i = 0; i < 5; ++i) {
        std::string m = "m" + std::to_string(i);
        t.nodes.push_back(node(m, NodeRole::Backhaul));
        t.links.push_back(link("g", m, 10));
        t.links.push_back(link(m, "e", 10));
    }
    auto paths = shortest_disjoint_paths(t, "g", "e", 5);
    CHECK(paths.size() == 5);
    // Brute force: 5 interior nodes, each path uses exactly one, so 5 is the
    // maximum number of interior-disjoint paths.
    std::set<std::string> interiors;
    for (const auto& p : paths) {
        REQUIRE(p.nodes.size() == 3);
        CHECK(interiors.insert(p.nodes[1]).second);
    }
}

TEST_CASE("validate flags unreachable edges and bad ranges") {
    Topology t = three_node_tree();
    CHECK(validate(t).empty());

    Topology island = t;
    island.nodes.push_back(node("e2", NodeRole::Edge));
    auto diags = validate(island);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0] == "edge e2 unreachable from gateway");

    Topology bad = t;
    bad.links[0].loss = 1.2;
    diags = validate(bad);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("loss_rate") != std::string::npos);
}

TEST_CASE("capacity equals exhaustive cut enumeration on random small graphs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        Topology t = random_graph(rng);
        CHECK(network_capacity(t) == doctest::Approx(brute_force_min_cut(t)));
        auto cut = min_cut_links(t);
        double total = 0.0;
        for (int li : cut) total += t.links[li].capacity_mbps;
        CHECK(total == doctest::Approx(brute_force_min_cut(t)));
    }
}

TEST_CASE("adding a link never decreases capacity") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        Topology t = random_graph(rng);
        double before = network_capacity(t);
        int a = static_cast<int>(rng() % t.nodes.size());
        int b = static_cast<int>(rng() % t.nodes.size());
        if (a == b) continue;
        t.links.push_back(link(t.nodes[a].id, t.nodes[b].id, 10 + rng() % 100));
        CHECK(network_capacity(t) >= before - 1e-9);
    }
}

TEST_CASE("disjoint paths are simple, valid and interior-disjoint") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        Topology t = random_graph(rng);
        auto edges = t.edge_nodes();
        auto paths = shortest_disjoint_paths(t, "g", edges.front(), 4);
        std::set<std::string> interiors;
        for (const auto& p : paths) {
            std::set<std::string> uniq(p.nodes.begin(), p.nodes.end());
            CHECK(uniq.size() == p.nodes.size());
            for (size_t i = 0; i + 1 < p.nodes.size(); ++i)
                CHECK(t.adjacent(p.nodes[i], p.nodes[i + 1]));
            for (size_t i = 1; i + 1 < p.nodes.size(); ++i)
                CHECK(interiors.insert(p.nodes[i]).second);
        }
    }
}
