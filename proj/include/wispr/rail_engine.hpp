#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wispr/path_analysis.hpp"
#include "wispr/rail_codec.hpp"

namespace wispr {

// One frame handed to the network: path choice, on-wire tag, payload. Parity
// frames additionally carry the group's original data lengths as
// simulator-side metadata.
struct Frame {
    std::uint8_t path_index = 0;
    RailTag tag;
    Bytes payload;
    std::vector<std::uint32_t> group_lengths;
};

enum class DedupResult { Accept, Duplicate, Stale };

// Duplicate filter over the 16-bit id ring: an index pointer plus four equal
// 16,384-id quarters. Ids in the pointer's quarter or its predecessor are in
// the acceptance horizon; bits in the other two quarters are kept cleared.
class DedupState {
public:
    static constexpr int kQuarterBits = 16384;

    DedupResult check(std::uint16_t id);
    void mark_seen(std::uint16_t id) { seen_[id >> 14][id & 0x3FFF] = true; }
    std::uint16_t index_pointer() const { return pointer_; }
    int quarter() const { return pointer_ >> 14; }
    bool fresh() const { return fresh_; }

private:
    std::array<std::bitset<kQuarterBits>, 4> seen_;
    std::uint16_t pointer_ = 0;
    bool fresh_ = true;
};

struct PathStats {
    std::vector<double> ewma_loss;
    std::vector<std::uint64_t> delivered;
    std::vector<std::uint64_t> lost;

    explicit PathStats(size_t paths = 0)
        : ewma_loss(paths, 0.0), delivered(paths, 0), lost(paths, 0) {}
    void record(size_t path, bool was_delivered, double alpha);
};

struct SessionConfig {
    std::string ingress;
    std::string egress;
    std::string direction = "down";
    int mode = 0;          // 0 stripe, 1 mirror, 4 stripe+parity, 5 rotating parity
    int multiplicity = 1;  // k, must equal |group.paths|
    int parity_group_size = 0;  // X, modes 4/5 only
    PathGroup group;
};

inline constexpr size_t kMaxPayloadBytes = 2048;
inline constexpr double kDefaultEwmaAlpha = 0.1;

// Per node-pair, per-direction protocol state machine. Single-writer: one
// logical thread drives it; distinct sessions may run concurrently.
class RailSession {
public:
    explicit RailSession(SessionConfig config);

    // Ingress side: fan one payload out into frames per the session mode.
    std::vector<Frame> ingress_next(const Bytes& payload);

    // Egress side: returns the payloads (0, 1 or 2) this frame releases.
    std::vector<Bytes> egress_accept(const Frame& frame);

    // Replace path weights, e.g. from update_weights().
    void set_weights(std::vector<double> weights);

    const SessionConfig& config() const { return config_; }
    std::uint16_t next_packet_id() const { return next_id_; }

    // Egress counters.
    std::uint64_t delivered_count = 0;
    std::uint64_t dup_suppressed = 0;
    std::uint64_t stale_dropped = 0;
    std::uint64_t parity_recovered = 0;
    std::uint64_t parity_unrecoverable = 0;

private:
    struct GroupBuffer {
        std::map<int, Bytes> data;  // position -> payload
        Bytes parity;
        std::vector<std::uint32_t> lengths;
        bool parity_seen = false;
    };

    int pick_path(const std::vector<char>& eligible);
    void advance_id();
    void evict_stale_groups();

    SessionConfig config_;
    std::uint16_t next_id_ = 0;
    std::vector<double> weights_;
    std::vector<double> wrr_credit_;
    Bytes parity_acc_;
    std::vector<std::uint32_t> parity_lengths_;
    DedupState dedup_;
    int last_quarter_ = 0;
    std::map<std::uint16_t, GroupBuffer> groups_;
};

RailSession configure_session(const SessionConfig& config);

// raw_i = bottleneck_i * (1 - ewma_loss_i), normalized; uniform fallback when
// every path is fully lossy.
std::vector<double> update_weights(const RailSession& session, const PathStats& stats);

}  // namespace wispr
