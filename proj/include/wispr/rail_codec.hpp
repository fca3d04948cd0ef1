#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "wispr/error.hpp"

namespace wispr {

using Bytes = std::vector<std::uint8_t>;

// Session state carried on the wire: 4-bit mode, 16-bit packet id, 4-bit path
// index, packed high-to-low into 24 bits.
struct RailTag {
    std::uint8_t mode = 0;  // one of 0, 1, 4, 5
    std::uint16_t packet_id = 0;
    std::uint8_t path_index = 0;

    bool operator==(const RailTag&) const = default;
};

// The two stacked 802.1Q vlan_id fields holding the 24-bit word.
struct TagPair {
    std::uint16_t outer_vlan_id = 0;  // bits 23..12
    std::uint16_t inner_vlan_id = 0;  // bits 11..0

    bool operator==(const TagPair&) const = default;
};

inline bool valid_mode(std::uint8_t mode) {
    return mode == 0 || mode == 1 || mode == 4 || mode == 5;
}

TagPair encode_tag(const RailTag& tag);
RailTag decode_tag(const TagPair& pair);  // throws on unassigned mode

// Byte-wise XOR of all payloads, each right-padded with zeros to the longest.
Bytes make_parity(const std::vector<Bytes>& payloads);

// One parity group: X - 1 data positions plus the parity payload. Original
// per-position lengths ride along as simulator-side metadata so padded
// recoveries can be truncated back.
struct ParityGroup {
    int group_size = 0;  // X >= 2
    std::vector<std::optional<Bytes>> data;  // X - 1 slots
    Bytes parity;
    std::vector<std::uint32_t> lengths;  // original data lengths
};

// Reconstruct the single missing data position from the parity and the
// received data. Throws if zero or more than one position is missing.
std::pair<int, Bytes> recover_missing(const ParityGroup& group);

}  // namespace wispr
