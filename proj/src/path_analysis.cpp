#include "wispr/path_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace wispr {

namespace {

// Bounded draw kept explicit (not uniform_int_distribution) so seeded runs are
// reproducible across standard libraries.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

// Attributes for an augmentation link: copy the lowest-capacity link already
// incident to either endpoint (lowest index on ties).
Link augmentation_link(const Topology& topo, const std::string& a, const std::string& b) {
    const Link* donor = nullptr;
    for (const auto& l : topo.links)
        if (l.incident(a) || l.incident(b))
            if (!donor || l.capacity_mbps < donor->capacity_mbps) donor = &l;
    Link nl;
    nl.a = a;
    nl.b = b;
    if (donor) {
        nl.capacity_mbps = donor->capacity_mbps;
        nl.loss = donor->loss;
        nl.delay_ms = donor->delay_ms;
        nl.channel_mhz = donor->channel_mhz;
    } else {
        nl.capacity_mbps = 10.0;
    }
    return nl;
}

}  // namespace

Topology add_cross_links(const Topology& topo, int n, std::uint64_t rng_seed) {
    if (n < 0) throw Error(ErrorKind::Input, "link count must be >= 0");
    std::vector<std::pair<std::string, std::string>> candidates;
    for (size_t i = 0; i < topo.nodes.size(); ++i)
        for (size_t j = i + 1; j < topo.nodes.size(); ++j) {
            const std::string& u = topo.nodes[i].id;
            const std::string& v = topo.nodes[j].id;
            if (!topo.adjacent(u, v))
                candidates.emplace_back(std::min(u, v), std::max(u, v));
        }
    std::sort(candidates.begin(), candidates.end());
    std::mt19937_64 rng(rng_seed);
    Topology out = topo;
    int to_add = std::min<int>(n, static_cast<int>(candidates.size()));
    for (int i = 0; i < to_add; ++i) {
        size_t pick = i + draw(rng, candidates.size() - i);
        std::swap(candidates[i], candidates[pick]);
        out.links.push_back(augmentation_link(topo, candidates[i].first, candidates[i].second));
    }
    return out;
}

Topology add_parallel_links(const Topology& topo, int n, std::uint64_t rng_seed) {
    if (n < 0) throw Error(ErrorKind::Input, "link count must be >= 0");
    const std::string gw = topo.gateway();
    if (topo.links.size() + 1 != topo.nodes.size())
        throw Error(ErrorKind::Input, "upstream neighbor undefined: topology is not a tree");
    // Parent map from a BFS rooted at the gateway.
    std::map<std::string, std::string> parent;
    std::deque<std::string> q{gw};
    std::set<std::string> seen{gw};
    while (!q.empty()) {
        std::string u = q.front();
        q.pop_front();
        for (const auto& l : topo.links) {
            if (!l.incident(u)) continue;
            const std::string& v = l.other(u);
            if (seen.insert(v).second) {
                parent[v] = u;
                q.push_back(v);
            }
        }
    }
    if (seen.size() != topo.nodes.size())
        throw Error(ErrorKind::Input, "upstream neighbor undefined: topology is not a tree");
    std::vector<std::string> children;
    for (const auto& nd : topo.nodes)
        if (nd.id != gw) children.push_back(nd.id);
    std::sort(children.begin(), children.end());
    std::mt19937_64 rng(rng_seed);
    Topology out = topo;
    for (int i = 0; i < n && !children.empty(); ++i) {
        const std::string& v = children[draw(rng, children.size())];
        out.links.push_back(augmentation_link(topo, v, parent[v]));
    }
    return out;
}

namespace {

// Link-level DFS: parallel links count as distinct paths.
bool dfs_count(const Topology& topo, const std::string& node, const std::string& goal,
               std::set<std::string>& visited, std::uint64_t cap, std::uint64_t& count) {
    if (node == goal) {
        ++count;
        return count < cap;
    }
    visited.insert(node);
    for (const auto& l : topo.links) {
        if (!l.incident(node)) continue;
        const std::string& next = l.other(node);
        if (visited.count(next)) continue;
        if (!dfs_count(topo, next, goal, visited, cap, count)) {
            visited.erase(node);
            return false;
        }
    }
    visited.erase(node);
    return true;
}

}  // namespace

PathCount count_paths(const Topology& topo, const std::string& edge, std::uint64_t cap) {
    if (cap < 1) throw Error(ErrorKind::Input, "cap must be >= 1");
    const Node* n = topo.find_node(edge);
    if (!n || n->role != NodeRole::Edge)
        throw Error(ErrorKind::Input, "'" + edge + "' is not an edge node");
    const std::string gw = topo.gateway();
    std::set<std::string> visited;
    std::uint64_t count = 0;
    bool complete = dfs_count(topo, edge, gw, visited, cap, count);
    return {count, !complete};
}

std::vector<std::pair<std::uint64_t, double>> path_count_cdf(const Topology& topo,
                                                             std::uint64_t cap) {
    std::vector<std::uint64_t> counts;
    for (const auto& e : topo.edge_nodes()) {
        PathCount pc = count_paths(topo, e, cap);
        counts.push_back(pc.truncated ? cap : pc.count);
    }
    std::sort(counts.begin(), counts.end());
    std::vector<std::pair<std::uint64_t, double>> cdf;
    for (size_t i = 0; i < counts.size(); ++i) {
        double frac = static_cast<double>(i + 1) / counts.size();
        if (!cdf.empty() && cdf.back().first == counts[i])
            cdf.back().second = frac;
        else
            cdf.emplace_back(counts[i], frac);
    }
    return cdf;
}

// ---------------------------------------------------------------------------
// Topology synthesis from coordinates
// ---------------------------------------------------------------------------

std::vector<CoordinateRow> load_coordinates_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Io, "cannot open coordinates file " + file.string());
    std::vector<CoordinateRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "id,lat,lon")
                throw Error(ErrorKind::Input, "coordinates CSV: expected header 'id,lat,lon'");
            continue;
        }
        std::stringstream ss(line);
        CoordinateRow r;
        std::string lat, lon;
        if (!std::getline(ss, r.id, ',') || !std::getline(ss, lat, ',') ||
            !std::getline(ss, lon, ','))
            throw Error(ErrorKind::Input,
                        "coordinates CSV line " + std::to_string(lineno) + ": malformed row");
        try {
            r.lat = std::stod(lat);
            r.lon = std::stod(lon);
        } catch (const std::exception&) {
            throw Error(ErrorKind::Input,
                        "coordinates CSV line " + std::to_string(lineno) + ": bad number");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

constexpr double kMetersPerDegree = 111320.0;

double equirect_distance_m(double lat1, double lon1, double lat2, double lon2) {
    double mean_lat = (lat1 + lat2) * 0.5 * M_PI / 180.0;
    double dx = (lon2 - lon1) * std::cos(mean_lat) * kMetersPerDegree;
    double dy = (lat2 - lat1) * kMetersPerDegree;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Topology synthesize_topology(const std::vector<CoordinateRow>& coordinates, int fanout,
                             double cluster_radius_m, std::uint64_t rng_seed) {
    if (coordinates.size() < 2)
        throw Error(ErrorKind::Input, "need at least 2 coordinate rows");
    if (fanout < 1) throw Error(ErrorKind::Input, "fanout must be >= 1");

    // Greedy single-pass clustering in ascending id order; the lowest-id point
    // seeds each cluster and gives it its position.
    std::vector<CoordinateRow> rows = coordinates;
    std::sort(rows.begin(), rows.end(),
              [](const CoordinateRow& a, const CoordinateRow& b) { return a.id < b.id; });
    std::vector<CoordinateRow> clusters;
    std::vector<bool> taken(rows.size(), false);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (taken[i]) continue;
        taken[i] = true;
        clusters.push_back(rows[i]);
        for (size_t j = i + 1; j < rows.size(); ++j)
            if (!taken[j] && equirect_distance_m(rows[i].lat, rows[i].lon, rows[j].lat,
                                                 rows[j].lon) <= cluster_radius_m)
                taken[j] = true;
    }
    if (clusters.size() < 2)
        throw Error(ErrorKind::Input, "degenerate single-node topology after clustering");

    // Gateway = cluster nearest the unweighted centroid.
    double clat = 0.0, clon = 0.0;
    for (const auto& c : clusters) {
        clat += c.lat;
        clon += c.lon;
    }
    clat /= clusters.size();
    clon /= clusters.size();
    size_t gw = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < clusters.size(); ++i) {
        double d = equirect_distance_m(clusters[i].lat, clusters[i].lon, clat, clon);
        if (d < best) {
            best = d;
            gw = i;
        }
    }

    auto dist = [&](size_t i, size_t j) {
        return equirect_distance_m(clusters[i].lat, clusters[i].lon, clusters[j].lat,
                                   clusters[j].lon);
    };

    // Depths come from a BFS over the symmetric fanout-nearest-neighbor graph;
    // any cluster that graph misses is attached below its nearest reached one.
    std::vector<std::set<size_t>> nn(clusters.size());
    for (size_t i = 0; i < clusters.size(); ++i) {
        std::vector<size_t> order;
        for (size_t j = 0; j < clusters.size(); ++j)
            if (j != i) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
            double dx = dist(i, x), dy = dist(i, y);
            if (dx != dy) return dx < dy;
            return clusters[x].id < clusters[y].id;
        });
        for (size_t j = 0; j < order.size() && j < static_cast<size_t>(fanout); ++j) {
            nn[i].insert(order[j]);
            nn[order[j]].insert(i);
        }
    }
    std::vector<int> depth(clusters.size(), -1);
    depth[gw] = 0;
    std::deque<size_t> q{gw};
    while (!q.empty()) {
        size_t u = q.front();
        q.pop_front();
        for (size_t v : nn[u])
            if (depth[v] < 0) {
                depth[v] = depth[u] + 1;
                q.push_back(v);
            }
    }
    for (;;) {
        size_t pick = clusters.size();
        size_t anchor = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < clusters.size(); ++i) {
            if (depth[i] >= 0) continue;
            for (size_t j = 0; j < clusters.size(); ++j)
                if (depth[j] >= 0 && dist(i, j) < bd) {
                    bd = dist(i, j);
                    pick = i;
                    anchor = j;
                }
        }
        if (pick == clusters.size()) break;
        depth[pick] = depth[anchor] + 1;
    }

    // Wire each node to up to fanout uniformly drawn nodes one level up.
    std::mt19937_64 rng(rng_seed);
    Topology topo;
    for (size_t i = 0; i < clusters.size(); ++i) {
        Node nd;
        nd.id = clusters[i].id;
        nd.lat = clusters[i].lat;
        nd.lon = clusters[i].lon;
        nd.role = i == gw ? NodeRole::Gateway : NodeRole::Backhaul;
        topo.nodes.push_back(std::move(nd));
    }
    std::set<size_t> has_children;
    for (size_t i = 0; i < clusters.size(); ++i) {
        if (i == gw) continue;
        std::vector<size_t> ups;
        for (size_t j = 0; j < clusters.size(); ++j)
            if (depth[j] == depth[i] - 1) ups.push_back(j);
        size_t m = std::min(ups.size(), static_cast<size_t>(fanout));
        for (size_t p = 0; p < m; ++p) {
            size_t pick = p + draw(rng, ups.size() - p);
            std::swap(ups[p], ups[pick]);
            Link l;
            l.a = clusters[i].id;
            l.b = clusters[ups[p]].id;
            l.capacity_mbps = 10.0;
            topo.links.push_back(std::move(l));
            has_children.insert(ups[p]);
        }
    }
    for (size_t i = 0; i < clusters.size(); ++i)
        if (i != gw && !has_children.count(i)) topo.nodes[i].role = NodeRole::Edge;
    return topo;
}

// ---------------------------------------------------------------------------
// Path groups and weights
// ---------------------------------------------------------------------------

std::vector<double> capacity_weights(const std::vector<PathSpec>& paths) {
    if (paths.empty()) throw Error(ErrorKind::Input, "need at least one path");
    double total = 0.0;
    for (const auto& p : paths) total += p.bottleneck_mbps;
    std::vector<double> w;
    for (const auto& p : paths)
        w.push_back(total > 0.0 ? p.bottleneck_mbps / total : 1.0 / paths.size());
    return w;
}

std::map<std::pair<std::string, std::string>, double> port_weights(
    const std::vector<PathGroup>& groups) {
    std::map<std::pair<std::string, std::string>, double> raw;
    std::map<std::string, double> per_node;
    for (const auto& g : groups)
        for (size_t p = 0; p < g.paths.size(); ++p)
            for (size_t i = 0; i + 1 < g.paths[p].nodes.size(); ++i) {
                raw[{g.paths[p].nodes[i], g.paths[p].nodes[i + 1]}] += g.weights[p];
                per_node[g.paths[p].nodes[i]] += g.weights[p];
            }
    for (auto& [key, w] : raw) w /= per_node[key.first];
    return raw;
}

PathGroup build_path_group(const Topology& topo, const std::string& src,
                           const std::string& dst, int k) {
    auto paths = shortest_disjoint_paths(topo, src, dst, k);
    if (paths.empty()) throw Error(ErrorKind::Input, "disconnected pair " + src + "/" + dst);
    PathGroup g;
    g.paths = std::move(paths);
    g.weights = capacity_weights(g.paths);
    return g;
}

}  // namespace wispr
