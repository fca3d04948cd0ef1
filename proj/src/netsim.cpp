#include "wispr/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <random>

namespace wispr {

namespace {

// Ethernet + two 802.1Q headers + FCS; goodput counts payload bytes only.
constexpr std::uint32_t kWireOverheadBytes = 46;
constexpr std::uint32_t kPayloadHeaderBytes = 16;  // sequence + send timestamp

double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Bytes make_payload(std::uint64_t seq, std::uint64_t send_us, std::uint32_t size) {
    Bytes p(std::max(size, kPayloadHeaderBytes), 0);
    for (int i = 0; i < 8; ++i) {
        p[i] = static_cast<std::uint8_t>(seq >> (8 * i));
        p[8 + i] = static_cast<std::uint8_t>(send_us >> (8 * i));
    }
    return p;
}

void parse_payload(const Bytes& p, std::uint64_t& seq, std::uint64_t& send_us) {
    seq = 0;
    send_us = 0;
    for (int i = 7; i >= 0; --i) {
        seq = (seq << 8) | p[i];
        send_us = (send_us << 8) | p[8 + i];
    }
}

// Resolve a node path to link indices; parallel links use the highest
// capacity, lowest index.
std::vector<int> resolve_links(const Topology& topo, const PathSpec& path) {
    std::vector<int> out;
    for (size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        int best = -1;
        for (size_t li = 0; li < topo.links.size(); ++li)
            if (topo.links[li].joins(path.nodes[i], path.nodes[i + 1]))
                if (best < 0 || topo.links[li].capacity_mbps > topo.links[best].capacity_mbps)
                    best = static_cast<int>(li);
        if (best < 0)
            throw Error(ErrorKind::Input, "session path hop " + path.nodes[i] + "-" +
                                              path.nodes[i + 1] + " missing from topology");
        out.push_back(best);
    }
    return out;
}

struct Delivery {
    std::uint64_t arrival_us;
    std::uint64_t order;  // emission sequence, ties break by it
    Frame frame;
    bool operator<(const Delivery& o) const {
        return arrival_us != o.arrival_us ? arrival_us < o.arrival_us : order < o.order;
    }
};

}  // namespace

Metrics run(const SimConfig& config) {
    RailSession session(config.session);
    const auto& paths = config.session.group.paths;
    std::vector<std::vector<int>> path_links;
    std::set<int> session_links;
    for (const auto& p : paths) {
        path_links.push_back(resolve_links(config.topo, p));
        for (int li : path_links.back()) session_links.insert(li);
    }
    // uniform_loss is a per-path rate: one Bernoulli trial per frame, applied
    // at its first hop, so a sweep value of 0.05 means 5% per packet per path
    // regardless of hop count.
    auto loss_at = [&](int li, std::uint64_t t, size_t hop) -> double {
        if (config.uniform_loss && session_links.count(li))
            return hop == 0 ? *config.uniform_loss : 0.0;
        auto it = config.loss_schedule.find(li);
        if (it != config.loss_schedule.end()) {
            double loss = config.topo.links[li].loss;
            for (const auto& step : it->second)
                if (step.start_us <= t) loss = step.loss;
            return loss;
        }
        return config.topo.links[li].loss;
    };

    std::mt19937_64 rng(config.seed);
    // Per (link, direction) next-free time: unbounded FIFO serialization.
    std::map<std::pair<int, int>, std::uint64_t> link_free;

    Metrics m;
    m.mode = config.session.mode;
    m.multiplicity = config.session.multiplicity;
    m.parity_group_size = config.session.parity_group_size;
    m.frames_sent_per_path.assign(paths.size(), 0);
    m.frames_dropped_per_path.assign(paths.size(), 0);

    std::vector<Delivery> deliveries;
    std::uint64_t order = 0;
    std::uint64_t first_emit = 0;
    for (std::uint64_t i = 0; i < config.count; ++i) {
        std::uint64_t t_emit = i * config.gap_us;
        if (i == 0) first_emit = t_emit;
        Bytes payload = make_payload(i, t_emit, config.payload_bytes);
        for (Frame& frame : session.ingress_next(payload)) {
            ++m.frames_sent_per_path[frame.path_index];
            const auto& links = path_links[frame.path_index];
            std::uint64_t t = t_emit;
            bool dropped = false;
            if (config.engineered_drops.count({frame.tag.packet_id, frame.path_index})) {
                dropped = true;
            } else {
                std::uint64_t wire_bits =
                    (static_cast<std::uint64_t>(frame.payload.size()) + kWireOverheadBytes) * 8;
                for (size_t h = 0; h < links.size(); ++h) {
                    int li = links[h];
                    const Link& l = config.topo.links[li];
                    const std::string& from = paths[frame.path_index].nodes[h];
                    int dir = l.a == from ? 0 : 1;
                    std::uint64_t& free = link_free[{li, dir}];
                    std::uint64_t start = std::max(t, free);
                    auto tx = static_cast<std::uint64_t>(
                        std::llround(static_cast<double>(wire_bits) / l.capacity_mbps));
                    free = start + tx;
                    if (unit_double(rng) < loss_at(li, start, h)) {
                        dropped = true;
                        break;
                    }
                    t = start + tx + static_cast<std::uint64_t>(std::llround(l.delay_ms * 1000.0));
                }
            }
            if (dropped)
                ++m.frames_dropped_per_path[frame.path_index];
            else
                deliveries.push_back({t, order, std::move(frame)});
            ++order;
        }
    }

    std::sort(deliveries.begin(), deliveries.end());
    std::set<std::uint64_t> delivered_seqs;
    double delay_sum_us = 0.0;
    std::uint64_t last_arrival = first_emit;
    for (const auto& d : deliveries) {
        for (const Bytes& payload : session.egress_accept(d.frame)) {
            std::uint64_t seq, send_us;
            parse_payload(payload, seq, send_us);
            if (!delivered_seqs.insert(seq).second) continue;  // engine guarantees unique
            delay_sum_us += static_cast<double>(d.arrival_us - send_us);
            last_arrival = std::max(last_arrival, d.arrival_us);
        }
    }

    m.sent = config.count;
    m.delivered = delivered_seqs.size();
    m.lost = m.sent - m.delivered;
    m.dup_suppressed = session.dup_suppressed;
    m.parity_recovered = session.parity_recovered;
    m.avg_delay_ms = m.delivered > 0 ? delay_sum_us / m.delivered / 1000.0 : 0.0;
    std::uint64_t span = last_arrival > first_emit ? last_arrival - first_emit : 1;
    m.goodput_mbps =
        static_cast<double>(m.delivered) * config.payload_bytes * 8.0 / span;  // bits per us
    return m;
}

Metrics probe_experiment(const Topology& topo, const SessionConfig& session,
                         const ProbeSpec& probe, double loss, std::uint64_t seed) {
    if (probe.inter_packet_gap_us == 0) throw Error(ErrorKind::Input, "probe gap must be > 0");
    SimConfig cfg;
    cfg.topo = topo;
    cfg.session = session;
    cfg.payload_bytes = probe.payload_bytes;
    cfg.gap_us = probe.inter_packet_gap_us;
    cfg.count = probe.count;
    cfg.uniform_loss = loss;
    cfg.seed = seed;
    Metrics m = run(cfg);
    m.loss = loss;
    return m;
}

std::vector<std::pair<double, Metrics>> goodput_sweep(const Topology& topo,
                                                      const SessionConfig& session,
                                                      const std::vector<double>& loss_points,
                                                      std::uint64_t transfer_bytes,
                                                      std::uint64_t seed) {
    for (double l : loss_points)
        if (l < 0.0 || l >= 1.0) throw Error(ErrorKind::Input, "loss points must be in [0,1)");
    // Saturating pace: mirroring is limited by the slowest path, striping by
    // the weighted aggregate.
    double rate = 0.0;
    if (session.mode == 1) {
        rate = std::numeric_limits<double>::infinity();
        for (const auto& p : session.group.paths) rate = std::min(rate, p.bottleneck_mbps);
    } else {
        for (size_t i = 0; i < session.group.paths.size(); ++i)
            rate += session.group.paths[i].bottleneck_mbps * session.group.weights[i];
    }
    SimConfig cfg;
    cfg.topo = topo;
    cfg.session = session;
    cfg.payload_bytes = 1000;
    std::uint64_t wire_bits = (cfg.payload_bytes + kWireOverheadBytes) * 8;
    cfg.gap_us = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(wire_bits / rate)));
    cfg.count = std::max<std::uint64_t>(1, transfer_bytes / cfg.payload_bytes);
    cfg.seed = seed;
    std::vector<std::pair<double, Metrics>> out;
    for (double l : loss_points) {
        cfg.uniform_loss = l;
        Metrics m = run(cfg);
        m.loss = l;
        out.emplace_back(l, m);
    }
    return out;
}

double baseline_arq_goodput(double capacity_mbps, double delay_ms, double loss,
                            std::uint32_t payload_bytes, std::uint64_t count,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double tx = (payload_bytes + kWireOverheadBytes) * 8.0 / capacity_mbps;  // us
    const double prop = delay_ms * 1000.0;
    const double rtt = 2.0 * prop + tx;
    // (ready_time, seq) retransmission queue; new packets are always ready.
    std::priority_queue<std::pair<double, std::uint64_t>,
                        std::vector<std::pair<double, std::uint64_t>>, std::greater<>>
        retx;
    std::uint64_t next_new = 0;
    std::uint64_t remaining = count;
    double t = 0.0;
    double last_delivery = 0.0;
    while (remaining > 0) {
        double ready;
        std::uint64_t seq;
        if (!retx.empty() && (retx.top().first <= t || next_new >= count)) {
            ready = retx.top().first;
            seq = retx.top().second;
            retx.pop();
        } else if (next_new < count) {
            ready = t;
            seq = next_new++;
        } else {
            continue;
        }
        double start = std::max(t, ready);
        t = start + tx;
        if (unit_double(rng) < loss) {
            retx.emplace(start + tx + rtt, seq);  // loss detected one RTT later
        } else {
            last_delivery = t + prop;
            --remaining;
        }
    }
    double total_us = std::max(last_delivery, 1.0);
    return static_cast<double>(count) * payload_bytes * 8.0 / total_us;
}

std::string metrics_csv(const std::vector<Metrics>& rows) {
    std::string out =
        "run_id,mode,k,X,loss,sent,delivered,lost,dup_suppressed,parity_recovered,"
        "avg_delay_ms,goodput_mbps\n";
    char buf[512];
    for (const auto& m : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%d,%.6f,%llu,%llu,%llu,%llu,%llu,%.6f,%.6f\n",
                      m.run_id.c_str(), m.mode, m.multiplicity, m.parity_group_size, m.loss,
                      static_cast<unsigned long long>(m.sent),
                      static_cast<unsigned long long>(m.delivered),
                      static_cast<unsigned long long>(m.lost),
                      static_cast<unsigned long long>(m.dup_suppressed),
                      static_cast<unsigned long long>(m.parity_recovered), m.avg_delay_ms,
                      m.goodput_mbps);
        out += buf;
    }
    return out;
}

void export_metrics(const std::vector<Metrics>& rows, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write metrics file " + file.string());
    out << metrics_csv(rows);
}

}  // namespace wispr
