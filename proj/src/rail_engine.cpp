#include "wispr/rail_engine.hpp"

#include <algorithm>
#include <cmath>

namespace wispr {

DedupResult DedupState::check(std::uint16_t id) {
    int qid = id >> 14;
    if (fresh_) {
        fresh_ = false;
        pointer_ = id;
        seen_[qid][id & 0x3FFF] = true;
        return DedupResult::Accept;
    }
    int qp = pointer_ >> 14;
    // Ids in the pointer's cyclic previous quarter are old even when they
    // compare greater (pointer just wrapped); they go through the seen-bit
    // check so late duplicates near the wrap cannot be re-accepted.
    bool newer = (id > pointer_ && qid != ((qp + 3) & 3)) || (qp == 3 && qid == 0);
    if (newer) {
        if (qid != qp) {
            int prev = (qid + 3) & 3;
            for (int q = 0; q < 4; ++q)
                if (q != qid && q != prev) seen_[q].reset();
        }
        pointer_ = id;
        seen_[qid][id & 0x3FFF] = true;
        return DedupResult::Accept;
    }
    if (qid == qp || qid == ((qp + 3) & 3)) {
        if (seen_[qid][id & 0x3FFF]) return DedupResult::Duplicate;
        seen_[qid][id & 0x3FFF] = true;
        return DedupResult::Accept;
    }
    return DedupResult::Stale;
}

void PathStats::record(size_t path, bool was_delivered, double alpha) {
    if (path >= ewma_loss.size()) return;
    (was_delivered ? delivered : lost)[path] += 1;
    ewma_loss[path] = alpha * (was_delivered ? 0.0 : 1.0) + (1.0 - alpha) * ewma_loss[path];
}

RailSession::RailSession(SessionConfig config) : config_(std::move(config)) {
    const int k = config_.multiplicity;
    const int mode = config_.mode;
    if (!valid_mode(static_cast<std::uint8_t>(mode)))
        throw Error(ErrorKind::Input, "mode must be one of 0, 1, 4, 5");
    if (k < 1 || k > 16) throw Error(ErrorKind::Input, "multiplicity k must be in [1,16]");
    if (k != static_cast<int>(config_.group.paths.size()))
        throw Error(ErrorKind::Input, "k must match the path group size");
    if (mode == 4 || mode == 5) {
        if (config_.parity_group_size < 2)
            throw Error(ErrorKind::Input, "modes 4/5 require parity group size X >= 2");
        if (k < 2)
            throw Error(ErrorKind::Input,
                        "modes 4/5 require k >= 2 (one data path plus a parity path)");
    }
    weights_ = config_.group.weights;
    if (weights_.empty()) weights_.assign(k, 1.0 / k);
    wrr_credit_.assign(k, 0.0);
}

RailSession configure_session(const SessionConfig& config) { return RailSession(config); }

void RailSession::set_weights(std::vector<double> weights) {
    if (weights.size() != weights_.size())
        throw Error(ErrorKind::Input, "weight vector size mismatch");
    weights_ = std::move(weights);
}

// Smooth weighted round robin restricted to eligible paths; lowest index wins
// ties, which keeps emission sequences deterministic.
int RailSession::pick_path(const std::vector<char>& eligible) {
    double total = 0.0;
    for (size_t i = 0; i < weights_.size(); ++i)
        if (eligible[i]) total += weights_[i];
    int best = -1;
    for (size_t i = 0; i < weights_.size(); ++i) {
        if (!eligible[i]) continue;
        wrr_credit_[i] += total > 0.0 ? weights_[i] : 1.0;
        if (best < 0 || wrr_credit_[i] > wrr_credit_[best]) best = static_cast<int>(i);
    }
    if (best < 0) throw Error(ErrorKind::Input, "no eligible path");
    wrr_credit_[best] -= total > 0.0 ? total : static_cast<double>(
                             std::count(eligible.begin(), eligible.end(), 1));
    return best;
}

void RailSession::advance_id() {
    next_id_ = static_cast<std::uint16_t>(next_id_ + 1);
    // Parity groups never straddle the id wrap; drop a partial accumulator.
    if (next_id_ == 0) {
        parity_acc_.clear();
        parity_lengths_.clear();
    }
}

std::vector<Frame> RailSession::ingress_next(const Bytes& payload) {
    if (payload.size() > kMaxPayloadBytes)
        throw Error(ErrorKind::Input, "payload exceeds " + std::to_string(kMaxPayloadBytes) +
                                          " bytes");
    const int k = config_.multiplicity;
    const std::uint8_t mode = static_cast<std::uint8_t>(config_.mode);
    std::vector<Frame> out;
    switch (mode) {
        case 0: {
            std::vector<char> all(k, 1);
            int path = pick_path(all);
            out.push_back({static_cast<std::uint8_t>(path),
                           {mode, next_id_, static_cast<std::uint8_t>(path)},
                           payload,
                           {}});
            advance_id();
            break;
        }
        case 1: {
            for (int p = 0; p < k; ++p)
                out.push_back({static_cast<std::uint8_t>(p),
                               {mode, next_id_, static_cast<std::uint8_t>(p)},
                               payload,
                               {}});
            advance_id();
            break;
        }
        case 4:
        case 5: {
            const int X = config_.parity_group_size;
            const int group = next_id_ / X;
            const int parity_path = mode == 4 ? k - 1 : group % k;
            std::vector<char> eligible(k, 1);
            eligible[parity_path] = 0;
            int path = pick_path(eligible);
            out.push_back({static_cast<std::uint8_t>(path),
                           {mode, next_id_, static_cast<std::uint8_t>(path)},
                           payload,
                           {}});
            if (parity_acc_.size() < payload.size()) parity_acc_.resize(payload.size(), 0);
            for (size_t i = 0; i < payload.size(); ++i) parity_acc_[i] ^= payload[i];
            parity_lengths_.push_back(static_cast<std::uint32_t>(payload.size()));
            advance_id();
            if (next_id_ % X == static_cast<unsigned>(X - 1)) {
                out.push_back({static_cast<std::uint8_t>(parity_path),
                               {mode, next_id_, static_cast<std::uint8_t>(parity_path)},
                               parity_acc_,
                               parity_lengths_});
                parity_acc_.clear();
                parity_lengths_.clear();
                advance_id();
            }
            break;
        }
        default:
            break;
    }
    return out;
}

void RailSession::evict_stale_groups() {
    int q = dedup_.quarter();
    if (q == last_quarter_) return;
    int prev = (q + 3) & 3;
    for (auto it = groups_.begin(); it != groups_.end();) {
        int gq = it->first >> 14;
        if (gq != q && gq != prev)
            it = groups_.erase(it);
        else
            ++it;
    }
    last_quarter_ = q;
}

std::vector<Bytes> RailSession::egress_accept(const Frame& frame) {
    if (frame.tag.mode != config_.mode)
        throw Error(ErrorKind::Input, "frame mode does not match session mode");
    std::vector<Bytes> delivered;
    const std::uint16_t id = frame.tag.packet_id;
    switch (config_.mode) {
        case 0:
            dedup_.mark_seen(id);  // recorded for statistics only
            delivered.push_back(frame.payload);
            ++delivered_count;
            break;
        case 1: {
            switch (dedup_.check(id)) {
                case DedupResult::Accept:
                    delivered.push_back(frame.payload);
                    ++delivered_count;
                    break;
                case DedupResult::Duplicate:
                    ++dup_suppressed;
                    break;
                case DedupResult::Stale:
                    ++stale_dropped;
                    break;
            }
            break;
        }
        case 4:
        case 5: {
            const int X = config_.parity_group_size;
            const bool is_parity = id % X == static_cast<unsigned>(X - 1);
            const std::uint16_t base = static_cast<std::uint16_t>(id - id % X);
            switch (dedup_.check(id)) {
                case DedupResult::Duplicate:
                    ++dup_suppressed;
                    break;
                case DedupResult::Stale:
                    ++stale_dropped;
                    break;
                case DedupResult::Accept: {
                    GroupBuffer& buf = groups_[base];
                    if (!is_parity) {
                        buf.data[id % X] = frame.payload;
                        delivered.push_back(frame.payload);
                        ++delivered_count;
                    } else {
                        buf.parity = frame.payload;
                        buf.lengths = frame.group_lengths;
                        buf.parity_seen = true;
                        int missing = X - 1 - static_cast<int>(buf.data.size());
                        if (missing == 1) {
                            ParityGroup g;
                            g.group_size = X;
                            g.data.resize(X - 1);
                            for (const auto& [pos, bytes] : buf.data) g.data[pos] = bytes;
                            g.parity = buf.parity;
                            g.lengths = buf.lengths;
                            auto [pos, payload] = recover_missing(g);
                            dedup_.mark_seen(static_cast<std::uint16_t>(base + pos));
                            buf.data[pos] = payload;
                            delivered.push_back(std::move(payload));
                            ++delivered_count;
                            ++parity_recovered;
                        } else if (missing > 1) {
                            ++parity_unrecoverable;
                        }
                    }
                    break;
                }
            }
            evict_stale_groups();
            break;
        }
        default:
            break;
    }
    return delivered;
}

std::vector<double> update_weights(const RailSession& session, const PathStats& stats) {
    const auto& paths = session.config().group.paths;
    if (stats.ewma_loss.size() != paths.size())
        throw Error(ErrorKind::Input, "stats must cover every path in the group");
    std::vector<double> raw(paths.size());
    double total = 0.0;
    for (size_t i = 0; i < paths.size(); ++i) {
        raw[i] = paths[i].bottleneck_mbps * (1.0 - stats.ewma_loss[i]);
        total += raw[i];
    }
    if (total <= 0.0) return std::vector<double>(paths.size(), 1.0 / paths.size());
    for (auto& w : raw) w /= total;
    return raw;
}

}  // namespace wispr
