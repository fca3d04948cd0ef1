#include "wispr/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"

namespace wispr {

using nlohmann::json;

const char* to_string(NodeRole role) {
    switch (role) {
        case NodeRole::Gateway: return "gateway";
        case NodeRole::Backhaul: return "backhaul";
        case NodeRole::Edge: return "edge";
    }
    return "?";
}

NodeRole role_from_string(const std::string& s) {
    if (s == "gateway") return NodeRole::Gateway;
    if (s == "backhaul") return NodeRole::Backhaul;
    if (s == "edge") return NodeRole::Edge;
    throw Error(ErrorKind::Input, "unknown node role '" + s + "'");
}

const Node* Topology::find_node(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

int Topology::node_index(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
}

std::string Topology::gateway() const {
    std::string gw;
    int count = 0;
    for (const auto& n : nodes)
        if (n.role == NodeRole::Gateway) {
            gw = n.id;
            ++count;
        }
    if (count != 1)
        throw Error(ErrorKind::Input,
                    "topology must have exactly one gateway, found " + std::to_string(count));
    return gw;
}

std::vector<std::string> Topology::edge_nodes() const {
    std::vector<std::string> out;
    for (const auto& n : nodes)
        if (n.role == NodeRole::Edge) out.push_back(n.id);
    return out;
}

std::vector<int> Topology::incident_links(const std::string& id) const {
    std::vector<int> out;
    for (size_t i = 0; i < links.size(); ++i)
        if (links[i].incident(id)) out.push_back(static_cast<int>(i));
    return out;
}

bool Topology::adjacent(const std::string& u, const std::string& v) const {
    for (const auto& l : links)
        if (l.joins(u, v)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------------

static json node_to_json(const Node& n) {
    json j;
    j["id"] = n.id;
    j["role"] = to_string(n.role);
    if (n.lat) j["lat"] = *n.lat;
    if (n.lon) j["lon"] = *n.lon;
    return j;
}

static json link_to_json(const Link& l) {
    json j;
    j["a"] = l.a;
    j["b"] = l.b;
    j["capacity_mbps"] = l.capacity_mbps;
    j["loss"] = l.loss;
    j["delay_ms"] = l.delay_ms;
    j["channel_mhz"] = l.channel_mhz;
    if (l.bearing_a) j["bearing_a"] = *l.bearing_a;
    if (l.bearing_b) j["bearing_b"] = *l.bearing_b;
    return j;
}

std::string topology_to_json_string(const Topology& topo) {
    json j;
    j["nodes"] = json::array();
    for (const auto& n : topo.nodes) j["nodes"].push_back(node_to_json(n));
    j["links"] = json::array();
    for (const auto& l : topo.links) j["links"].push_back(link_to_json(l));
    return j.dump(2) + "\n";
}

Topology topology_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Input, std::string("topology parse failure: ") + e.what());
    }
    Topology topo;
    if (!j.contains("nodes") || !j.contains("links"))
        throw Error(ErrorKind::Input, "topology file must contain 'nodes' and 'links'");
    std::set<std::string> seen;
    for (const auto& jn : j["nodes"]) {
        Node n;
        n.id = jn.at("id").get<std::string>();
        n.role = role_from_string(jn.at("role").get<std::string>());
        if (jn.contains("lat")) n.lat = jn["lat"].get<double>();
        if (jn.contains("lon")) n.lon = jn["lon"].get<double>();
        if (!seen.insert(n.id).second)
            throw Error(ErrorKind::Input, "duplicate node id '" + n.id + "'");
        topo.nodes.push_back(std::move(n));
    }
    int gateways = 0;
    for (const auto& n : topo.nodes)
        if (n.role == NodeRole::Gateway) ++gateways;
    if (gateways == 0) throw Error(ErrorKind::Input, "no gateway node");
    if (gateways > 1) throw Error(ErrorKind::Input, "multiple gateways");
    for (const auto& jl : j["links"]) {
        Link l;
        l.a = jl.at("a").get<std::string>();
        l.b = jl.at("b").get<std::string>();
        l.capacity_mbps = jl.at("capacity_mbps").get<double>();
        l.loss = jl.value("loss", 0.0);
        l.delay_ms = jl.value("delay_ms", 0.0);
        l.channel_mhz = jl.value("channel_mhz", 20);
        if (jl.contains("bearing_a")) l.bearing_a = jl["bearing_a"].get<double>();
        if (jl.contains("bearing_b")) l.bearing_b = jl["bearing_b"].get<double>();
        if (!seen.count(l.a))
            throw Error(ErrorKind::Input, "link endpoint references unknown node '" + l.a + "'");
        if (!seen.count(l.b))
            throw Error(ErrorKind::Input, "link endpoint references unknown node '" + l.b + "'");
        if (l.capacity_mbps <= 0.0)
            throw Error(ErrorKind::Input,
                        "link " + l.a + "-" + l.b + " has non-positive capacity");
        topo.links.push_back(std::move(l));
    }
    return topo;
}

Topology load_topology(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Io, "cannot open topology file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return topology_from_json_string(ss.str());
}

void save_topology(const Topology& topo, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error(ErrorKind::Io, "cannot write topology file " + file.string());
    out << topology_to_json_string(topo);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<std::string> validate(const Topology& topo) {
    std::vector<std::string> diags;
    std::set<std::string> ids;
    int gateways = 0;
    for (const auto& n : topo.nodes) {
        if (!ids.insert(n.id).second) diags.push_back("duplicate node id '" + n.id + "'");
        if (n.role == NodeRole::Gateway) ++gateways;
    }
    if (gateways == 0) diags.push_back("no gateway node");
    if (gateways > 1) diags.push_back("multiple gateways");
    for (size_t i = 0; i < topo.links.size(); ++i) {
        const Link& l = topo.links[i];
        const std::string tag = "link " + std::to_string(i) + " (" + l.a + "-" + l.b + ")";
        if (!ids.count(l.a)) diags.push_back(tag + ": unknown endpoint '" + l.a + "'");
        if (!ids.count(l.b)) diags.push_back(tag + ": unknown endpoint '" + l.b + "'");
        if (l.a == l.b) diags.push_back(tag + ": endpoints must be distinct");
        if (l.capacity_mbps <= 0.0) diags.push_back(tag + ": capacity must be > 0");
        if (l.loss < 0.0 || l.loss > 1.0) diags.push_back(tag + ": loss_rate outside [0,1]");
        if (l.delay_ms < 0.0) diags.push_back(tag + ": negative delay");
        if (l.channel_mhz != 20 && l.channel_mhz != 40)
            diags.push_back(tag + ": channel width must be 20 or 40 MHz");
    }
    // Connectivity from the gateway, only meaningful once structure is sound.
    if (gateways == 1 && diags.empty()) {
        std::string gw;
        for (const auto& n : topo.nodes)
            if (n.role == NodeRole::Gateway) gw = n.id;
        std::set<std::string> reached{gw};
        std::deque<std::string> q{gw};
        while (!q.empty()) {
            std::string u = q.front();
            q.pop_front();
            for (const auto& l : topo.links) {
                if (!l.incident(u)) continue;
                const std::string& v = l.other(u);
                if (reached.insert(v).second) q.push_back(v);
            }
        }
        for (const auto& n : topo.nodes)
            if (!reached.count(n.id))
                diags.push_back((n.role == NodeRole::Edge ? "edge " : "node ") + n.id +
                                " unreachable from gateway");
    }
    return diags;
}

// ---------------------------------------------------------------------------
// Max flow (Dinic) over the undirected graph plus a super-sink.
// ---------------------------------------------------------------------------

namespace {

struct FlowArc {
    int to;
    double cap;
    int rev;  // index of reverse arc in graph[to]
};

class FlowGraph {
public:
    explicit FlowGraph(int n) : adj_(n) {}

    void add_undirected(int u, int v, double cap) {
        // Each direction gets full capacity; the arcs act as each other's
        // residual, which models an undirected edge of capacity cap.
        adj_[u].push_back({v, cap, static_cast<int>(adj_[v].size())});
        adj_[v].push_back({u, cap, static_cast<int>(adj_[u].size()) - 1});
    }

    void add_directed(int u, int v, double cap) {
        adj_[u].push_back({v, cap, static_cast<int>(adj_[v].size())});
        adj_[v].push_back({u, 0.0, static_cast<int>(adj_[u].size()) - 1});
    }

    double max_flow(int s, int t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            iter_.assign(adj_.size(), 0);
            double f;
            while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > 1e-12)
                flow += f;
        }
        return flow;
    }

    // Source side of the final residual graph.
    std::vector<bool> source_side(int s) const {
        std::vector<bool> in(adj_.size(), false);
        std::deque<int> q{s};
        in[s] = true;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (const auto& a : adj_[u])
                if (a.cap > 1e-9 && !in[a.to]) {
                    in[a.to] = true;
                    q.push_back(a.to);
                }
        }
        return in;
    }

private:
    bool bfs(int s, int t) {
        level_.assign(adj_.size(), -1);
        std::deque<int> q{s};
        level_[s] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (const auto& a : adj_[u])
                if (a.cap > 1e-9 && level_[a.to] < 0) {
                    level_[a.to] = level_[u] + 1;
                    q.push_back(a.to);
                }
        }
        return level_[t] >= 0;
    }

    double dfs(int u, int t, double f) {
        if (u == t) return f;
        for (int& i = iter_[u]; i < static_cast<int>(adj_[u].size()); ++i) {
            FlowArc& a = adj_[u][i];
            if (a.cap > 1e-9 && level_[a.to] == level_[u] + 1) {
                double d = dfs(a.to, t, std::min(f, a.cap));
                if (d > 1e-12) {
                    a.cap -= d;
                    adj_[a.to][a.rev].cap += d;
                    return d;
                }
            }
        }
        return 0.0;
    }

    std::vector<std::vector<FlowArc>> adj_;
    std::vector<int> level_;
    std::vector<int> iter_;
};

FlowGraph build_flow_graph(const Topology& topo, int& source, int& sink) {
    const std::string gw = topo.gateway();
    auto edges = topo.edge_nodes();
    if (edges.empty()) throw Error(ErrorKind::Input, "topology has no edge nodes");
    int n = static_cast<int>(topo.nodes.size());
    FlowGraph g(n + 1);
    for (const auto& l : topo.links)
        g.add_undirected(topo.node_index(l.a), topo.node_index(l.b), l.capacity_mbps);
    sink = n;
    for (const auto& e : edges)
        g.add_directed(topo.node_index(e), sink, std::numeric_limits<double>::infinity());
    source = topo.node_index(gw);
    return g;
}

}  // namespace

double network_capacity(const Topology& topo) {
    int s, t;
    FlowGraph g = build_flow_graph(topo, s, t);
    return g.max_flow(s, t);
}

std::vector<int> min_cut_links(const Topology& topo) {
    int s, t;
    FlowGraph g = build_flow_graph(topo, s, t);
    g.max_flow(s, t);
    std::vector<bool> in = g.source_side(s);
    std::vector<int> cut;
    for (size_t i = 0; i < topo.links.size(); ++i) {
        int a = topo.node_index(topo.links[i].a);
        int b = topo.node_index(topo.links[i].b);
        if (in[a] != in[b]) cut.push_back(static_cast<int>(i));
    }
    return cut;
}

// ---------------------------------------------------------------------------
// Greedy node-disjoint shortest paths
// ---------------------------------------------------------------------------

namespace {

// Hop-count shortest path avoiding blocked interior nodes; lowest node id on
// ties. Empty if disconnected.
std::vector<std::string> shortest_path(const Topology& topo, const std::string& src,
                                       const std::string& dst,
                                       const std::set<std::string>& blocked,
                                       bool skip_direct) {
    // Sorted neighbor map so the greedy walk is deterministic.
    std::map<std::string, std::set<std::string>> nbrs;
    for (const auto& l : topo.links) {
        if (skip_direct && l.joins(src, dst)) continue;
        nbrs[l.a].insert(l.b);
        nbrs[l.b].insert(l.a);
    }
    auto usable = [&](const std::string& v) {
        return v == src || v == dst || !blocked.count(v);
    };
    std::map<std::string, int> dist;  // hop distance to dst
    dist[dst] = 0;
    std::deque<std::string> q{dst};
    while (!q.empty()) {
        std::string u = q.front();
        q.pop_front();
        for (const auto& v : nbrs[u])
            if (usable(v) && !dist.count(v)) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
    }
    if (!dist.count(src)) return {};
    std::vector<std::string> path{src};
    std::string cur = src;
    while (cur != dst) {
        std::string next;
        for (const auto& v : nbrs[cur]) {
            if (!usable(v)) continue;
            auto it = dist.find(v);
            if (it != dist.end() && it->second == dist[cur] - 1) {
                next = v;
                break;  // sets are id-ordered, first hit is lowest id
            }
        }
        path.push_back(next);
        cur = next;
    }
    return path;
}

double path_bottleneck(const Topology& topo, const std::vector<std::string>& nodes) {
    double bottleneck = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        // Parallel links: the path may use the best one.
        double best = 0.0;
        for (const auto& l : topo.links)
            if (l.joins(nodes[i], nodes[i + 1])) best = std::max(best, l.capacity_mbps);
        bottleneck = std::min(bottleneck, best);
    }
    return bottleneck;
}

}  // namespace

std::vector<PathSpec> shortest_disjoint_paths(const Topology& topo, const std::string& src,
                                              const std::string& dst, int k) {
    if (k < 1 || k > 16) throw Error(ErrorKind::Input, "path count k must be in [1,16]");
    if (src == dst) throw Error(ErrorKind::Input, "src and dst must differ");
    if (!topo.find_node(src) || !topo.find_node(dst))
        throw Error(ErrorKind::Input, "unknown src/dst node");
    std::vector<PathSpec> out;
    std::set<std::string> blocked;
    bool direct_used = false;
    while (static_cast<int>(out.size()) < k) {
        auto path = shortest_path(topo, src, dst, blocked, direct_used);
        if (path.empty()) break;
        // A direct src-dst link has no interior to block; yield it once.
        if (path.size() == 2) direct_used = true;
        for (size_t i = 1; i + 1 < path.size(); ++i) blocked.insert(path[i]);
        out.push_back({path, path_bottleneck(topo, path)});
    }
    return out;
}

}  // namespace wispr
