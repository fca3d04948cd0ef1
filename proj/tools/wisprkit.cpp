// wisprkit: batch front end for topology planning and protocol simulation.
//
// Subcommands: plan fit | plan multiplicity | plan redesign | paths | sim |
// synthesize. Every command writes its outputs plus a manifest.json into
// --out; seeded commands are bit-reproducible.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "wispr/manifest.hpp"
#include "wispr/netsim.hpp"
#include "wispr/path_analysis.hpp"
#include "wispr/price.hpp"
#include "wispr/rail_engine.hpp"
#include "wispr/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wispr;

namespace {

int g_log_level = 1;  // 0 error, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[info] " << msg << "\n";
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(RunManifest& manifest, const fs::path& out_dir, const std::string& name,
                  const std::string& content) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (out_dir / name).string());
    out << content;
    manifest.output_digests[name] = digest_bytes(content);
}

void record_input(RunManifest& manifest, const fs::path& p) {
    manifest.input_digests[p.filename().string()] = digest_file(p);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

PriceModel load_model_json(const fs::path& p) {
    json j = json::parse(read_file(p));
    PriceModel m;
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.r_squared = j.value("r_squared", 0.0);
    return m;
}

json model_to_json(const PriceModel& m) {
    return {{"alpha", m.alpha}, {"beta", m.beta}, {"gamma", m.gamma},
            {"r_squared", m.r_squared}};
}

// ---------------------------------------------------------------------------
// plan fit
// ---------------------------------------------------------------------------

int cmd_plan_fit(const fs::path& prices, const fs::path& out_dir) {
    auto points = load_price_csv(prices);
    PriceModel model = fit_price_model(points);
    log_info("fit " + std::to_string(points.size()) + " points, r^2 " + fmt(model.r_squared));

    RunManifest manifest;
    manifest.command = "plan fit";
    record_input(manifest, prices);
    write_output(manifest, out_dir, "model.json", model_to_json(model).dump(2) + "\n");

    double cmin = points.front().capacity_mbps, cmax = cmin;
    for (const auto& p : points) {
        cmin = std::min(cmin, p.capacity_mbps);
        cmax = std::max(cmax, p.capacity_mbps);
    }
    std::string curve = "capacity_mbps,cost\n";
    for (int i = 0; i <= 50; ++i) {
        double c = cmin + (cmax - cmin) * i / 50.0;
        curve += fmt(c) + "," + fmt(link_cost(model, c)) + "\n";
    }
    write_output(manifest, out_dir, "cost_curve.csv", curve);
    manifest.resolved_config = json{{"prices", prices.string()}}.dump();
    write_manifest(manifest, out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// plan multiplicity
// ---------------------------------------------------------------------------

int cmd_plan_multiplicity(const fs::path& model_file, const std::vector<double>& capacities,
                          int n_max, const fs::path& out_dir) {
    if (n_max < 1) throw Error(ErrorKind::Input, "--n-max must be >= 1");
    PriceModel model = load_model_json(model_file);
    std::string csv = "capacity_mbps,n,cost,is_argmin\n";
    for (double c : capacities) {
        int best = optimal_multiplicity(model, c, n_max);
        for (int n = 1; n <= n_max; ++n)
            csv += fmt(c) + "," + std::to_string(n) + "," + fmt(multiplicity_cost(model, c, n)) +
                   "," + (n == best ? "1" : "0") + "\n";
    }
    RunManifest manifest;
    manifest.command = "plan multiplicity";
    record_input(manifest, model_file);
    write_output(manifest, out_dir, "multiplicity.csv", csv);
    manifest.resolved_config =
        json{{"model", model_file.string()}, {"n_max", n_max}, {"capacities", capacities}}.dump();
    write_manifest(manifest, out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// plan redesign
// ---------------------------------------------------------------------------

json plan_result_to_json(const PriceModel& model, const PlanResult& r, double cost_before,
                         double capacity_before) {
    json links = json::array();
    for (const auto& l : r.topology.links)
        links.push_back({{"a", l.a},
                         {"b", l.b},
                         {"capacity_mbps", l.capacity_mbps},
                         {"cost", link_cost(model, l.capacity_mbps)}});
    return {{"cost_before", cost_before},
            {"cost_after", r.total_cost},
            {"capacity_before", capacity_before},
            {"capacity_after", r.capacity_mbps},
            {"links_added", r.links_added},
            {"links_replaced", r.links_replaced},
            {"capacity_trace", r.capacity_trace},
            {"links", links}};
}

int cmd_plan_redesign(const fs::path& topo_file, const fs::path& model_file,
                      const std::string& mode, double budget, int n_max, double unit_capacity,
                      const fs::path& candidates_file, const fs::path& out_dir) {
    Topology topo = load_topology(topo_file);
    PriceModel model = load_model_json(model_file);
    SpectrumBudget spectrum;
    double cost_before = topology_cost(model, topo);
    double capacity_before = network_capacity(topo);

    PlanResult result;
    if (mode == "min-cost") {
        result = min_cost_redesign(model, topo, spectrum, n_max);
    } else if (mode == "max-capacity") {
        std::vector<std::pair<std::string, std::string>> candidates;
        if (!candidates_file.empty()) {
            json j = json::parse(read_file(candidates_file));
            for (const auto& pair : j)
                candidates.emplace_back(pair.at(0).get<std::string>(),
                                        pair.at(1).get<std::string>());
        } else {
            // Default line-of-sight list: every non-adjacent pair.
            for (size_t i = 0; i < topo.nodes.size(); ++i)
                for (size_t j2 = i + 1; j2 < topo.nodes.size(); ++j2)
                    if (!topo.adjacent(topo.nodes[i].id, topo.nodes[j2].id))
                        candidates.emplace_back(topo.nodes[i].id, topo.nodes[j2].id);
        }
        double ceiling = budget > 0.0 ? budget : cost_before;
        result = max_capacity_redesign(model, topo, spectrum, ceiling, candidates, unit_capacity);
    } else {
        throw Error(ErrorKind::Input, "--mode must be min-cost or max-capacity");
    }
    log_info("redesign " + mode + ": capacity " + fmt(capacity_before) + " -> " +
             fmt(result.capacity_mbps) + " Mbps, cost " + fmt(cost_before) + " -> " +
             fmt(result.total_cost));

    RunManifest manifest;
    manifest.command = "plan redesign";
    record_input(manifest, topo_file);
    record_input(manifest, model_file);
    if (!candidates_file.empty()) record_input(manifest, candidates_file);
    write_output(manifest, out_dir, "plan.json",
                 plan_result_to_json(model, result, cost_before, capacity_before).dump(2) + "\n");
    write_output(manifest, out_dir, "topology.json", topology_to_json_string(result.topology));
    manifest.resolved_config = json{{"topology", topo_file.string()},
                                    {"model", model_file.string()},
                                    {"mode", mode},
                                    {"budget", budget},
                                    {"n_max", n_max},
                                    {"unit_capacity", unit_capacity}}
                                   .dump();
    write_manifest(manifest, out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// paths
// ---------------------------------------------------------------------------

int cmd_paths(const fs::path& topo_file, int cross, int parallel, int both,
              std::uint64_t seed, std::uint64_t cap, const fs::path& out_dir) {
    Topology topo = load_topology(topo_file);
    auto diags = validate(topo);
    if (!diags.empty()) throw Error(ErrorKind::Input, "invalid topology: " + diags.front());
    Topology augmented = topo;
    if (both > 0) {
        // Both kinds drawn against the original tree: cross links first, then
        // the parallel duplicates appended.
        augmented = add_cross_links(topo, both, seed);
        Topology par = add_parallel_links(topo, both, seed + 1);
        for (size_t i = topo.links.size(); i < par.links.size(); ++i)
            augmented.links.push_back(par.links[i]);
    } else if (cross > 0) {
        augmented = add_cross_links(topo, cross, seed);
    } else if (parallel > 0) {
        augmented = add_parallel_links(topo, parallel, seed);
    }
    auto cdf = path_count_cdf(augmented, cap);
    std::string csv = "path_count,cum_fraction\n";
    for (const auto& [count, frac] : cdf)
        csv += std::to_string(count) + "," + fmt(frac) + "\n";

    RunManifest manifest;
    manifest.command = "paths";
    manifest.seed = seed;
    record_input(manifest, topo_file);
    write_output(manifest, out_dir, "cdf.csv", csv);
    manifest.resolved_config = json{{"topology", topo_file.string()},
                                    {"cross", cross},
                                    {"parallel", parallel},
                                    {"both", both},
                                    {"cap", cap}}
                                   .dump();
    write_manifest(manifest, out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// sim
// ---------------------------------------------------------------------------

int cmd_sim(const fs::path& config_file, std::uint64_t seed_override, bool seed_set,
            const fs::path& out_dir) {
    json cfg = json::parse(read_file(config_file));
    fs::path base = config_file.parent_path();
    fs::path topo_file = base / cfg.at("topology").get<std::string>();
    Topology topo = load_topology(topo_file);

    SessionConfig session;
    session.ingress = cfg.at("ingress").get<std::string>();
    session.egress = cfg.at("egress").get<std::string>();
    session.mode = cfg.at("mode").get<int>();
    session.multiplicity = cfg.at("k").get<int>();
    session.parity_group_size = cfg.value("X", 0);
    session.group = build_path_group(topo, session.ingress, session.egress,
                                     session.multiplicity);
    if (static_cast<int>(session.group.paths.size()) != session.multiplicity)
        throw Error(ErrorKind::Infeasible,
                    "topology offers only " + std::to_string(session.group.paths.size()) +
                        " disjoint paths for k=" + std::to_string(session.multiplicity));

    std::uint64_t seed = seed_set ? seed_override : cfg.value("seed", 0ull);
    std::string kind = cfg.value("experiment", "probe");
    std::vector<Metrics> rows;
    if (kind == "probe") {
        ProbeSpec probe;
        probe.payload_bytes = cfg.value("payload_bytes", 96u);
        probe.inter_packet_gap_us = cfg.value("gap_us", 1000ull);
        probe.count = cfg.value("count", 500ull);
        double loss = cfg.value("loss", 0.0);
        int iterations = cfg.value("iterations", 1);
        for (int i = 0; i < iterations; ++i) {
            Metrics m = probe_experiment(topo, session, probe, loss, seed + i);
            m.run_id = "iter" + std::to_string(i);
            rows.push_back(std::move(m));
        }
    } else if (kind == "goodput") {
        std::vector<double> loss_points = cfg.at("loss_points").get<std::vector<double>>();
        std::uint64_t transfer = cfg.value("transfer_bytes", 5'000'000ull);
        for (auto& [loss, m] : goodput_sweep(topo, session, loss_points, transfer, seed)) {
            m.run_id = "loss" + fmt(loss);
            rows.push_back(std::move(m));
        }
        if (cfg.value("baseline", false)) {
            // Single-path reliable baseline over the first session path.
            double cap = session.group.paths.front().bottleneck_mbps;
            double delay = 0.0;
            for (size_t i = 0; i + 1 < session.group.paths.front().nodes.size(); ++i)
                for (const auto& l : topo.links)
                    if (l.joins(session.group.paths.front().nodes[i],
                                session.group.paths.front().nodes[i + 1])) {
                        delay += l.delay_ms;
                        break;
                    }
            for (double loss : loss_points) {
                Metrics m;
                m.run_id = "baseline" + fmt(loss);
                m.mode = -1;
                m.multiplicity = 1;
                m.loss = loss;
                std::uint64_t count = transfer / 1000;
                m.sent = m.delivered = count;
                m.goodput_mbps = baseline_arq_goodput(cap, delay, loss, 1000, count, seed);
                rows.push_back(std::move(m));
            }
        }
    } else {
        throw Error(ErrorKind::Input, "unknown experiment kind '" + kind + "'");
    }

    RunManifest manifest;
    manifest.command = "sim";
    manifest.seed = seed;
    record_input(manifest, config_file);
    record_input(manifest, topo_file);
    write_output(manifest, out_dir, "metrics.csv", metrics_csv(rows));
    manifest.resolved_config = cfg.dump();
    write_manifest(manifest, out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// synthesize
// ---------------------------------------------------------------------------

int cmd_synthesize(const fs::path& coords_file, int fanout, double radius, std::uint64_t seed,
                   const fs::path& out_dir) {
    auto rows = load_coordinates_csv(coords_file);
    Topology topo = synthesize_topology(rows, fanout, radius, seed);
    auto diags = validate(topo);
    if (!diags.empty())
        throw Error(ErrorKind::Infeasible, "synthesized topology invalid: " + diags.front());

    // Depth histogram via BFS hop distance from the gateway.
    std::map<int, int> hist;
    {
        std::map<std::string, int> depth{{topo.gateway(), 0}};
        std::vector<std::string> frontier{topo.gateway()};
        while (!frontier.empty()) {
            std::vector<std::string> next;
            for (const auto& u : frontier)
                for (const auto& l : topo.links) {
                    if (!l.incident(u)) continue;
                    const std::string& v = l.other(u);
                    if (!depth.count(v)) {
                        depth[v] = depth[u] + 1;
                        next.push_back(v);
                    }
                }
            frontier = std::move(next);
        }
        for (const auto& [id, d] : depth) hist[d] += 1;
    }
    json summary;
    summary["nodes_after_clustering"] = topo.nodes.size();
    summary["links"] = topo.links.size();
    summary["edge_nodes"] = topo.edge_nodes().size();
    json jh = json::object();
    for (const auto& [d, c] : hist) jh[std::to_string(d)] = c;
    summary["depth_histogram"] = jh;

    RunManifest manifest;
    manifest.command = "synthesize";
    manifest.seed = seed;
    record_input(manifest, coords_file);
    write_output(manifest, out_dir, "topology.json", topology_to_json_string(topo));
    write_output(manifest, out_dir, "summary.json", summary.dump(2) + "\n");
    manifest.resolved_config = json{{"coordinates", coords_file.string()},
                                    {"fanout", fanout},
                                    {"cluster_radius_m", radius}}
                                   .dump();
    write_manifest(manifest, out_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* lvl = std::getenv("WISPRKIT_LOG")) {
        std::string s = lvl;
        g_log_level = s == "error" ? 0 : s == "debug" ? 2 : 1;
    }

    CLI::App app{"WISP multipath backhaul planning and simulation toolkit"};
    app.require_subcommand(1);

    // plan
    auto* plan = app.add_subcommand("plan", "price/performance planning");
    plan->require_subcommand(1);

    fs::path prices, out_dir, model_file, topo_file, candidates_file, config_file, coords_file;
    std::vector<double> capacities;
    int n_max = 8, cross = 0, parallel = 0, both = 0, fanout = 10;
    std::uint64_t seed = 0, cap = kDefaultPathCap;
    double budget = 0.0, unit_capacity = 400.0, radius = 500.0;
    std::string redesign_mode = "min-cost";
    bool seed_set = false;

    auto* fit = plan->add_subcommand("fit", "fit the quadratic price model");
    fit->add_option("--prices", prices, "price CSV")->required();
    fit->add_option("--out", out_dir, "output directory")->required();

    auto* mult = plan->add_subcommand("multiplicity", "multiplicity cost curves");
    mult->add_option("--model", model_file, "model JSON")->required();
    mult->add_option("--capacities", capacities, "target capacities, Mbps")->required();
    mult->add_option("--n-max", n_max, "maximum multiplicity");
    mult->add_option("--out", out_dir, "output directory")->required();

    auto* redesign = plan->add_subcommand("redesign", "min-cost or max-capacity redesign");
    redesign->add_option("--topology", topo_file, "topology JSON")->required();
    redesign->add_option("--model", model_file, "model JSON")->required();
    redesign->add_option("--mode", redesign_mode, "min-cost|max-capacity");
    redesign->add_option("--budget", budget, "cost ceiling (max-capacity)");
    redesign->add_option("--n-max", n_max, "maximum multiplicity");
    redesign->add_option("--unit-capacity", unit_capacity, "added link capacity, Mbps");
    redesign->add_option("--candidates", candidates_file, "candidate pair JSON");
    redesign->add_option("--out", out_dir, "output directory")->required();

    auto* paths_cmd = app.add_subcommand("paths", "path-count CDFs under augmentation");
    paths_cmd->add_option("--topology", topo_file, "topology JSON")->required();
    paths_cmd->add_option("--cross", cross, "number of cross links");
    paths_cmd->add_option("--parallel", parallel, "number of parallel links");
    paths_cmd->add_option("--both", both, "add this many of each kind");
    paths_cmd->add_option("--seed", seed, "rng seed");
    paths_cmd->add_option("--cap", cap, "per-node path enumeration cap");
    paths_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* sim = app.add_subcommand("sim", "run a simulation experiment");
    sim->add_option("--config", config_file, "experiment config JSON")->required();
    sim->add_option("--seed", seed, "rng seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    sim->add_option("--out", out_dir, "output directory")->required();

    auto* synth = app.add_subcommand("synthesize", "topology synthesis from coordinates");
    synth->add_option("--coords", coords_file, "coordinates CSV")->required();
    synth->add_option("--fanout", fanout, "uplinks per node");
    synth->add_option("--radius", radius, "cluster radius, meters");
    synth->add_option("--seed", seed, "rng seed");
    synth->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
        if (fit->parsed()) return cmd_plan_fit(prices, out_dir);
        if (mult->parsed()) return cmd_plan_multiplicity(model_file, capacities, n_max, out_dir);
        if (redesign->parsed())
            return cmd_plan_redesign(topo_file, model_file, redesign_mode, budget, n_max,
                                     unit_capacity, candidates_file, out_dir);
        if (paths_cmd->parsed()) return cmd_paths(topo_file, cross, parallel, both, seed, cap,
                                                  out_dir);
        if (sim->parsed()) return cmd_sim(config_file, seed, seed_set, out_dir);
        if (synth->parsed()) return cmd_synthesize(coords_file, fanout, radius, seed, out_dir);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Input: return 2;
            case ErrorKind::Infeasible: return 3;
            case ErrorKind::Io: return 4;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
