#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>
#include <set>

#include "wispr/path_analysis.hpp"

using namespace wispr;

namespace {

Node node(const std::string& id, NodeRole role) { return {id, role, {}, {}}; }

Link link(const std::string& a, const std::string& b, double cap) {
    Link l;
    l.a = a;
    l.b = b;
    l.capacity_mbps = cap;
    return l;
}

Topology chain_gae() {
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
               node("e", NodeRole::Edge)};
    t.links = {link("g", "a", 100), link("a", "e", 100)};
    return t;
}

// Independent oracle: iterative stack-based enumeration over link sequences,
// written separately from the library's recursive counter.
std::uint64_t enumerate_paths(const Topology& t, const std::string& from,
                              const std::string& to) {
    struct State {
        std::string at;
        std::set<std::string> visited;
    };
    std::vector<State> stack{{from, {from}}};
    std::uint64_t total = 0;
    while (!stack.empty()) {
        State s = stack.back();
        stack.pop_back();
        if (s.at == to) {
            ++total;
            continue;
        }
        for (const auto& l : t.links) {
            if (!l.incident(s.at)) continue;
            const std::string& nxt = l.other(s.at);
            if (s.visited.count(nxt)) continue;
            State n = s;
            n.at = nxt;
            n.visited.insert(nxt);
            stack.push_back(std::move(n));
        }
    }
    return total;
}

Topology bundled_tree() {
    return load_topology(std::string(WISPR_DATA_DIR) + "/synthetic-tree-64.json");
}

}  // namespace

TEST_CASE("add_cross_links basics") {
    Topology t = chain_gae();
    CHECK(add_cross_links(t, 0, 1) == t);

    Topology aug = add_cross_links(t, 1, 99);
    REQUIRE(aug.links.size() == 3);
    CHECK(aug.links[2].joins("e", "g"));  // only non-adjacent pair

    // More requested than available: adds what exists.
    Topology aug2 = add_cross_links(t, 10, 99);
    CHECK(aug2.links.size() == 3);
}

TEST_CASE("add_cross_links is seed-deterministic on the 64-node tree") {
    Topology t = bundled_tree();
    Topology a = add_cross_links(t, 20, 42);
    Topology b = add_cross_links(t, 20, 42);
    CHECK(a == b);
    Topology c = add_cross_links(t, 20, 43);
    CHECK(a.links != c.links);
}

TEST_CASE("add_parallel_links duplicates an upstream edge") {
    Topology t = chain_gae();
    CHECK(add_parallel_links(t, 0, 1) == t);
    // Two candidates (a, e); scan seeds for one selecting a.
    bool found = false;
    for (std::uint64_t seed = 0; seed < 16 && !found; ++seed) {
        Topology aug = add_parallel_links(t, 1, seed);
        REQUIRE(aug.links.size() == 3);
        if (aug.links[2].joins("g", "a")) found = true;
    }
    CHECK(found);
}

TEST_CASE("add_parallel_links rejects non-trees") {
    Topology t = chain_gae();
    t.links.push_back(link("g", "e", 100));
    CHECK_THROWS_WITH_AS(add_parallel_links(t, 1, 0),
                         doctest::Contains("upstream neighbor undefined"), Error);
}

TEST_CASE("parallel duplication doubles subtree path counts") {
    // g - a - b - e1, a - e2. Duplicating (b, a) doubles e1 only.
    Topology t;
    t.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
               node("b", NodeRole::Backhaul), node("e1", NodeRole::Edge),
               node("e2", NodeRole::Edge)};
    t.links = {link("g", "a", 100), link("a", "b", 100), link("b", "e1", 100),
               link("a", "e2", 100)};
    Topology aug = t;
    aug.links.push_back(link("a", "b", 100));
    CHECK(count_paths(t, "e1").count == 1);
    CHECK(count_paths(aug, "e1").count == 2);
    CHECK(count_paths(aug, "e1").count == 2 * count_paths(t, "e1").count);
    CHECK(count_paths(aug, "e2").count == count_paths(t, "e2").count);
    CHECK(enumerate_paths(aug, "e1", "g") == 2);
}

TEST_CASE("count_paths basics") {
    Topology t = chain_gae();
    CHECK(count_paths(t, "e").count == 1);
    CHECK_FALSE(count_paths(t, "e").truncated);

    Topology diamond;
    diamond.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
                     node("b", NodeRole::Backhaul), node("e", NodeRole::Edge)};
    diamond.links = {link("g", "a", 100), link("g", "b", 100), link("a", "e", 100),
                     link("b", "e", 100)};
    CHECK(count_paths(diamond, "e").count == 2);

    CHECK(count_paths(diamond, "e", 1).truncated);
}

TEST_CASE("count_paths matches the independent enumerator on random graphs") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Topology t;
        t.nodes.push_back(node("g", NodeRole::Gateway));
        int n = 4 + static_cast<int>(rng() % 7);  // <= 10 nodes
        for (int i = 1; i < n; ++i) {
            std::string id = "n" + std::to_string(i);
            t.nodes.push_back(node(id, i == n - 1 ? NodeRole::Edge : NodeRole::Backhaul));
            t.links.push_back(link(t.nodes[rng() % i].id, id, 100));
        }
        for (int i = 0, extra = static_cast<int>(rng() % 5); i < extra; ++i) {
            int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
            if (a != b) t.links.push_back(link(t.nodes[a].id, t.nodes[b].id, 100));
        }
        std::string edge = t.nodes[n - 1].id;
        CHECK(count_paths(t, edge).count == enumerate_paths(t, edge, "g"));
    }
}

TEST_CASE("path_count_cdf") {
    Topology tree = bundled_tree();
    auto cdf = path_count_cdf(tree);
    REQUIRE(cdf.size() == 1);
    CHECK(cdf[0].first == 1);
    CHECK(cdf[0].second == doctest::Approx(1.0));

    Topology two;
    two.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
                 node("b", NodeRole::Backhaul), node("c", NodeRole::Backhaul),
                 node("e1", NodeRole::Edge),    node("e2", NodeRole::Edge)};
    two.links = {link("g", "a", 1), link("a", "e1", 1), link("g", "b", 1),
                 link("g", "c", 1), link("b", "e2", 1), link("c", "e2", 1)};
    auto cdf2 = path_count_cdf(two);
    REQUIRE(cdf2.size() == 2);
    CHECK(cdf2[0] == std::pair<std::uint64_t, double>{1, 0.5});
    CHECK(cdf2[1] == std::pair<std::uint64_t, double>{2, 1.0});
}

TEST_CASE("cross+parallel dominates parallel-only on the synthetic tree") {
    Topology tree = bundled_tree();
    const std::uint64_t cap = 20000;
    Topology par = add_parallel_links(tree, 20, 42);
    Topology both = add_cross_links(tree, 20, 42);
    {
        Topology par2 = add_parallel_links(tree, 20, 43);
        for (size_t i = tree.links.size(); i < par2.links.size(); ++i)
            both.links.push_back(par2.links[i]);
    }
    auto cdf_par = path_count_cdf(par, cap);
    auto cdf_both = path_count_cdf(both, cap);
    // Weak stochastic dominance: at every threshold the both-CDF has at most
    // the parallel-CDF's cumulative mass.
    auto cdf_at = [](const std::vector<std::pair<std::uint64_t, double>>& cdf,
                     std::uint64_t x) {
        double v = 0.0;
        for (const auto& [count, frac] : cdf)
            if (count <= x) v = frac;
        return v;
    };
    std::set<std::uint64_t> thresholds;
    for (const auto& [c, f] : cdf_par) thresholds.insert(c);
    for (const auto& [c, f] : cdf_both) thresholds.insert(c);
    for (std::uint64_t x : thresholds) CHECK(cdf_at(cdf_both, x) <= cdf_at(cdf_par, x) + 1e-9);
}

TEST_CASE("augmentation adds at most n links and removes nothing") {
    Topology tree = bundled_tree();
    for (int n : {0, 5, 50}) {
        Topology aug = add_cross_links(tree, n, 7);
        CHECK(aug.nodes == tree.nodes);
        CHECK(aug.links.size() <= tree.links.size() + n);
        for (size_t i = 0; i < tree.links.size(); ++i) CHECK(aug.links[i] == tree.links[i]);
    }
}

TEST_CASE("synthesize_topology handles the degenerate and chain cases") {
    // Two points 300 m apart collapse into one cluster.
    std::vector<CoordinateRow> close = {{"a", 39.0, -123.0}, {"b", 39.0027, -123.0}};
    CHECK_THROWS_WITH_AS(synthesize_topology(close, 10, 500, 1),
                         doctest::Contains("degenerate"), Error);

    // Three collinear points 1 km apart become a chain with the middle node
    // as gateway.
    std::vector<CoordinateRow> line = {
        {"a", 39.0, -123.0}, {"b", 39.009, -123.0}, {"c", 39.018, -123.0}};
    Topology t = synthesize_topology(line, 10, 500, 1);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.gateway() == "b");
    REQUIRE(t.links.size() == 2);
    CHECK(t.links[0].joins("a", "b"));
    CHECK(t.links[1].joins("c", "b"));
    CHECK(validate(t).empty());
}

TEST_CASE("synthesize_topology structure on random points") {
    std::mt19937_64 rng(23);
    std::vector<CoordinateRow> rows;
    for (int i = 0; i < 50; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "p%02d", i);
        rows.push_back({id, 39.0 + static_cast<double>(rng() % 2000) / 10000.0,
                        -123.0 + static_cast<double>(rng() % 2000) / 10000.0});
    }
    Topology t = synthesize_topology(rows, 10, 500, 77);
    CHECK(validate(t).empty());
    CHECK(synthesize_topology(rows, 10, 500, 77) == t);  // seed-reproducible

    // Every non-gateway node has at least one uplink one level closer to the
    // gateway (hop distance on the produced graph).
    std::map<std::string, int> depth{{t.gateway(), 0}};
    std::vector<std::string> frontier{t.gateway()};
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& u : frontier)
            for (const auto& l : t.links) {
                if (!l.incident(u)) continue;
                if (!depth.count(l.other(u))) {
                    depth[l.other(u)] = depth[u] + 1;
                    next.push_back(l.other(u));
                }
            }
        frontier = std::move(next);
    }
    for (const auto& n : t.nodes) {
        if (n.role == NodeRole::Gateway) continue;
        bool has_parent = false;
        for (const auto& l : t.links)
            if (l.incident(n.id) && depth[l.other(n.id)] == depth[n.id] - 1)
                has_parent = true;
        CHECK(has_parent);
        CHECK(t.links[0].capacity_mbps == doctest::Approx(10.0));
    }
}

TEST_CASE("capacity_weights") {
    std::vector<PathSpec> equal = {{{"g", "a", "e"}, 100}, {{"g", "b", "e"}, 100}};
    auto w = capacity_weights(equal);
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));

    std::vector<PathSpec> skewed = {{{"g", "a", "e"}, 100}, {{"g", "b", "e"}, 300}};
    w = capacity_weights(skewed);
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(w[1] == doctest::Approx(0.75));
}

TEST_CASE("port_weights per-switch aggregation") {
    PathGroup g;
    g.paths = {{{"s", "a", "d"}, 100}, {{"s", "a", "b", "d"}, 100}};
    g.weights = {0.6, 0.4};
    auto w = port_weights({g});
    CHECK(w[{"s", "a"}] == doctest::Approx(1.0));
    CHECK(w[{"a", "d"}] == doctest::Approx(0.6));
    CHECK(w[{"a", "b"}] == doctest::Approx(0.4));
    CHECK(w[{"b", "d"}] == doctest::Approx(1.0));

    // Normalized per node within 1e-9.
    std::map<std::string, double> per_node;
    for (const auto& [key, v] : w) per_node[key.first] += v;
    for (const auto& [n, sum] : per_node) CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("build_path_group") {
    Topology diamond;
    diamond.nodes = {node("g", NodeRole::Gateway), node("a", NodeRole::Backhaul),
                     node("b", NodeRole::Backhaul), node("e", NodeRole::Edge)};
    diamond.links = {link("g", "a", 100), link("g", "b", 300), link("a", "e", 100),
                     link("b", "e", 300)};
    PathGroup g = build_path_group(diamond, "g", "e", 2);
    REQUIRE(g.paths.size() == 2);
    CHECK(g.weights[0] == doctest::Approx(0.25));
    CHECK(g.weights[1] == doctest::Approx(0.75));

    Topology chain = chain_gae();
    PathGroup single = build_path_group(chain, "g", "e", 5);
    REQUIRE(single.paths.size() == 1);
    CHECK(single.weights[0] == doctest::Approx(1.0));

    Topology split = chain;
    split.links.clear();
    CHECK_THROWS_WITH_AS(build_path_group(split, "g", "e", 2),
                         doctest::Contains("disconnected"), Error);
}
