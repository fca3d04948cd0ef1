#include "wispr/price.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace wispr {

std::vector<PricePoint> load_price_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Io, "cannot open price file " + file.string());
    std::vector<PricePoint> points;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "vendor,model,capacity_mbps,price_usd_pair")
                throw Error(ErrorKind::Input,
                            "price CSV line 1: expected header "
                            "'vendor,model,capacity_mbps,price_usd_pair'");
            continue;
        }
        std::stringstream ss(line);
        PricePoint p;
        std::string cap, cost;
        if (!std::getline(ss, p.vendor, ',') || !std::getline(ss, p.model, ',') ||
            !std::getline(ss, cap, ',') || !std::getline(ss, cost, ','))
            throw Error(ErrorKind::Input,
                        "price CSV line " + std::to_string(lineno) + ": malformed row");
        try {
            p.capacity_mbps = std::stod(cap);
            p.cost = std::stod(cost);
        } catch (const std::exception&) {
            throw Error(ErrorKind::Input,
                        "price CSV line " + std::to_string(lineno) + ": bad number");
        }
        if (p.capacity_mbps <= 0.0 || p.cost <= 0.0)
            throw Error(ErrorKind::Input, "price CSV line " + std::to_string(lineno) +
                                              ": capacity and price must be > 0");
        points.push_back(std::move(p));
    }
    return points;
}

PriceModel fit_price_model(const std::vector<PricePoint>& points) {
    std::set<double> caps;
    for (const auto& p : points) caps.insert(p.capacity_mbps);
    if (points.size() < 3 || caps.size() < 3)
        throw Error(ErrorKind::Input,
                    "underdetermined fit: need at least 3 points with 3 distinct capacities");

    // Normal equations for [gamma, beta, alpha] on the Vandermonde system,
    // solved by Gaussian elimination with partial pivoting.
    double s[5] = {0, 0, 0, 0, 0};  // sums of C^0..C^4
    double t[3] = {0, 0, 0};        // sums of y*C^0..y*C^2
    for (const auto& p : points) {
        double c = p.capacity_mbps;
        double pw = 1.0;
        for (int i = 0; i < 5; ++i) {
            s[i] += pw;
            if (i < 3) t[i] += p.cost * pw;
            pw *= c;
        }
    }
    double m[3][4] = {{s[0], s[1], s[2], t[0]},
                      {s[1], s[2], s[3], t[1]},
                      {s[2], s[3], s[4], t[2]}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        std::swap(m[col], m[piv]);
        if (std::fabs(m[col][col]) < 1e-30)
            throw Error(ErrorKind::Input, "underdetermined fit: singular normal equations");
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            double f = m[r][col] / m[col][col];
            for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
        }
    }
    PriceModel model;
    model.gamma = m[0][3] / m[0][0];
    model.beta = m[1][3] / m[1][1];
    model.alpha = m[2][3] / m[2][2];

    double mean = t[0] / s[0];
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& p : points) {
        double pred = link_cost(model, p.capacity_mbps);
        ss_res += (p.cost - pred) * (p.cost - pred);
        ss_tot += (p.cost - mean) * (p.cost - mean);
    }
    model.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return model;
}

double link_cost(const PriceModel& model, double capacity_mbps) {
    if (capacity_mbps <= 0.0) throw Error(ErrorKind::Input, "capacity must be > 0");
    return (model.alpha * capacity_mbps + model.beta) * capacity_mbps + model.gamma;
}

double multiplicity_cost(const PriceModel& model, double capacity_mbps, int n) {
    if (n < 1) throw Error(ErrorKind::Input, "multiplicity n must be >= 1");
    return n * link_cost(model, capacity_mbps / n);
}

int optimal_multiplicity(const PriceModel& model, double capacity_mbps, int n_max) {
    if (n_max < 1) throw Error(ErrorKind::Input, "n_max must be >= 1");
    int best = 1;
    double best_cost = multiplicity_cost(model, capacity_mbps, 1);
    for (int n = 2; n <= n_max; ++n) {
        double c = multiplicity_cost(model, capacity_mbps, n);
        if (c < best_cost) {
            best = n;
            best_cost = c;
        }
    }
    return best;
}

double topology_cost(const PriceModel& model, const Topology& topo) {
    double total = 0.0;
    for (const auto& l : topo.links) total += link_cost(model, l.capacity_mbps);
    return total;
}

// ---------------------------------------------------------------------------
// Spectrum feasibility
// ---------------------------------------------------------------------------

namespace {

double angular_diff(double a, double b) {
    double d = std::fabs(a - b);
    return std::min(d, 360.0 - d);
}

std::optional<double> bearing_at(const Link& l, const std::string& site) {
    return l.a == site ? l.bearing_a : l.bearing_b;
}

// Greedy first-fit channel assignment of the given links (indices into
// topo.links, all with the same channel width). Two links conflict iff both
// carry a bearing at the site and differ by less than min_sep.
bool assign_channels(const Topology& topo, const std::string& site,
                     std::vector<int> links, int channels, double min_sep) {
    if (static_cast<int>(links.size()) > channels) return false;
    // Order by descending conflict degree, then index, so crowded sectors are
    // placed first.
    auto conflicts = [&](int i, int j) {
        auto bi = bearing_at(topo.links[i], site);
        auto bj = bearing_at(topo.links[j], site);
        return bi && bj && angular_diff(*bi, *bj) < min_sep;
    };
    std::vector<int> degree(links.size(), 0);
    for (size_t i = 0; i < links.size(); ++i)
        for (size_t j = 0; j < links.size(); ++j)
            if (i != j && conflicts(links[i], links[j])) ++degree[i];
    std::vector<size_t> order(links.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        if (degree[x] != degree[y]) return degree[x] > degree[y];
        return links[x] < links[y];
    });
    std::vector<int> channel(links.size(), -1);
    for (size_t oi : order) {
        for (int ch = 0; ch < channels; ++ch) {
            bool ok = true;
            for (size_t j = 0; j < links.size(); ++j)
                if (channel[j] == ch && conflicts(links[oi], links[j])) {
                    ok = false;
                    break;
                }
            if (ok) {
                channel[oi] = ch;
                break;
            }
        }
        if (channel[oi] < 0) return false;
    }
    return true;
}

}  // namespace

bool spectrum_feasible(const Topology& topo, const std::string& site,
                       const SpectrumBudget& budget) {
    if (!topo.find_node(site)) throw Error(ErrorKind::Input, "unknown site '" + site + "'");
    std::vector<int> links20, links40;
    for (int li : topo.incident_links(site))
        (topo.links[li].channel_mhz == 40 ? links40 : links20).push_back(li);
    return assign_channels(topo, site, links20, budget.channels_20mhz,
                           budget.min_angular_separation) &&
           assign_channels(topo, site, links40, budget.channels_40mhz,
                           budget.min_angular_separation);
}

// ---------------------------------------------------------------------------
// Redesign procedures
// ---------------------------------------------------------------------------

PlanResult min_cost_redesign(const PriceModel& model, const Topology& topo,
                             const SpectrumBudget& budget, int n_max) {
    PlanResult result;
    result.topology = topo;
    for (size_t i = 0; i < topo.links.size(); ++i) {
        const Link original = result.topology.links[i];
        int n = optimal_multiplicity(model, original.capacity_mbps, n_max);
        if (n <= 1) continue;
        Topology trial = result.topology;
        Link split = original;
        split.capacity_mbps = original.capacity_mbps / n;
        trial.links[i] = split;
        for (int extra = 1; extra < n; ++extra) trial.links.push_back(split);
        if (!spectrum_feasible(trial, original.a, budget) ||
            !spectrum_feasible(trial, original.b, budget))
            continue;
        result.topology = std::move(trial);
        result.links_replaced += 1;
        result.links_added += n - 1;
    }
    result.total_cost = topology_cost(model, result.topology);
    result.capacity_mbps = network_capacity(result.topology);
    return result;
}

PlanResult max_capacity_redesign(const PriceModel& model, const Topology& topo,
                                 const SpectrumBudget& budget, double cost_ceiling,
                                 const std::vector<std::pair<std::string, std::string>>& candidates,
                                 double unit_capacity_mbps) {
    double base_cost = topology_cost(model, topo);
    if (cost_ceiling < base_cost)
        throw Error(ErrorKind::Infeasible, "cost ceiling below current topology cost");
    PlanResult result;
    result.topology = topo;
    result.total_cost = base_cost;
    double unit_cost = link_cost(model, unit_capacity_mbps);

    // Normalize candidate pair ordering for deterministic tie-breaks.
    std::vector<std::pair<std::string, std::string>> pool;
    for (auto [a, b] : candidates) {
        if (a > b) std::swap(a, b);
        pool.emplace_back(std::move(a), std::move(b));
    }
    std::sort(pool.begin(), pool.end());

    while (result.total_cost + unit_cost <= cost_ceiling + 1e-9) {
        auto cut = min_cut_links(result.topology);
        // The cut's source side determines which candidates bridge it.
        std::set<std::string> src_side;
        {
            const std::string gw = result.topology.gateway();
            std::set<int> cut_set(cut.begin(), cut.end());
            src_side.insert(gw);
            bool grew = true;
            while (grew) {
                grew = false;
                for (size_t i = 0; i < result.topology.links.size(); ++i) {
                    if (cut_set.count(static_cast<int>(i))) continue;
                    const Link& l = result.topology.links[i];
                    if (src_side.count(l.a) != src_side.count(l.b)) {
                        src_side.insert(l.a);
                        src_side.insert(l.b);
                        grew = true;
                    }
                }
            }
        }
        bool added = false;
        for (const auto& [a, b] : pool) {
            if (!result.topology.find_node(a) || !result.topology.find_node(b)) continue;
            if (src_side.count(a) == src_side.count(b)) continue;  // does not bridge
            Topology trial = result.topology;
            Link l;
            l.a = a;
            l.b = b;
            l.capacity_mbps = unit_capacity_mbps;
            trial.links.push_back(l);
            if (!spectrum_feasible(trial, a, budget) || !spectrum_feasible(trial, b, budget))
                continue;
            result.topology = std::move(trial);
            result.total_cost += unit_cost;
            result.links_added += 1;
            result.capacity_trace.push_back(network_capacity(result.topology));
            added = true;
            break;
        }
        if (!added) break;
    }
    result.capacity_mbps = network_capacity(result.topology);
    return result;
}

}  // namespace wispr
