#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wispr/rail_engine.hpp"
#include "wispr/topology.hpp"

namespace wispr {

// Clock unit: microseconds, 64-bit. Link rate in Mbps equals bits per
// microsecond, so transmission time is wire_bits / capacity_mbps.

struct LossStep {
    std::uint64_t start_us = 0;
    double loss = 0.0;
};

struct ProbeSpec {
    std::uint32_t payload_bytes = 96;
    std::uint64_t inter_packet_gap_us = 1000;
    std::uint64_t count = 500;
};

struct SimConfig {
    Topology topo;
    SessionConfig session;
    std::uint32_t payload_bytes = 96;
    std::uint64_t gap_us = 1000;
    std::uint64_t count = 500;
    // Per-link piecewise-constant loss schedule; links without an entry use
    // their static loss rate.
    std::map<int, std::vector<LossStep>> loss_schedule;
    // Convenience: override loss on every link of every session path.
    std::optional<double> uniform_loss;
    // Deterministic drop injection: (packet_id, path_index) frames vanish at
    // their first hop without consuming randomness.
    std::set<std::pair<std::uint16_t, std::uint8_t>> engineered_drops;
    std::uint64_t seed = 0;
};

struct Metrics {
    std::string run_id;
    int mode = 0;
    int multiplicity = 0;
    int parity_group_size = 0;
    double loss = 0.0;
    std::uint64_t sent = 0;       // unique payloads
    std::uint64_t delivered = 0;  // unique payloads delivered
    std::uint64_t lost = 0;
    std::uint64_t dup_suppressed = 0;
    std::uint64_t parity_recovered = 0;
    double avg_delay_ms = 0.0;  // over delivered payloads only
    double goodput_mbps = 0.0;
    std::vector<std::uint64_t> frames_sent_per_path;
    std::vector<std::uint64_t> frames_dropped_per_path;
};

Metrics run(const SimConfig& config);

// Constant-rate probe source through run(); loss applied to all session paths.
Metrics probe_experiment(const Topology& topo, const SessionConfig& session,
                         const ProbeSpec& probe, double loss, std::uint64_t seed);

// For each loss rate on all session paths, saturating source; returns
// (loss, metrics) rows in sweep order.
std::vector<std::pair<double, Metrics>> goodput_sweep(const Topology& topo,
                                                      const SessionConfig& session,
                                                      const std::vector<double>& loss_points,
                                                      std::uint64_t transfer_bytes,
                                                      std::uint64_t seed);

// Idealized single-path reliable baseline: fixed-window ARQ, per-loss
// retransmission one RTT after the failed attempt.
double baseline_arq_goodput(double capacity_mbps, double delay_ms, double loss,
                            std::uint32_t payload_bytes, std::uint64_t count,
                            std::uint64_t seed);

void export_metrics(const std::vector<Metrics>& rows, const std::filesystem::path& file);
std::string metrics_csv(const std::vector<Metrics>& rows);

}  // namespace wispr
