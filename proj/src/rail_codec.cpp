#include "wispr/rail_codec.hpp"

#include <algorithm>

namespace wispr {

TagPair encode_tag(const RailTag& tag) {
    if (!valid_mode(tag.mode))
        throw Error(ErrorKind::Input, "invalid mode " + std::to_string(tag.mode));
    if (tag.path_index >= 16)
        throw Error(ErrorKind::Input, "path index " + std::to_string(tag.path_index) + " >= 16");
    std::uint32_t w = (static_cast<std::uint32_t>(tag.mode) << 20) |
                      (static_cast<std::uint32_t>(tag.packet_id) << 4) | tag.path_index;
    return {static_cast<std::uint16_t>(w >> 12), static_cast<std::uint16_t>(w & 0xFFF)};
}

RailTag decode_tag(const TagPair& pair) {
    if (pair.outer_vlan_id >= 4096 || pair.inner_vlan_id >= 4096)
        throw Error(ErrorKind::Input, "vlan_id fields must be < 4096");
    std::uint32_t w = (static_cast<std::uint32_t>(pair.outer_vlan_id) << 12) |
                      pair.inner_vlan_id;
    std::uint8_t mode = static_cast<std::uint8_t>(w >> 20);
    if (!valid_mode(mode))
        throw Error(ErrorKind::Input, "unknown mode " + std::to_string(mode) + " in tag");
    return {mode, static_cast<std::uint16_t>((w >> 4) & 0xFFFF),
            static_cast<std::uint8_t>(w & 0xF)};
}

Bytes make_parity(const std::vector<Bytes>& payloads) {
    if (payloads.empty()) throw Error(ErrorKind::Input, "parity needs at least one payload");
    size_t len = 0;
    for (const auto& p : payloads) len = std::max(len, p.size());
    Bytes parity(len, 0);
    for (const auto& p : payloads)
        for (size_t i = 0; i < p.size(); ++i) parity[i] ^= p[i];
    return parity;
}

std::pair<int, Bytes> recover_missing(const ParityGroup& group) {
    if (group.group_size < 2) throw Error(ErrorKind::Input, "group size X must be >= 2");
    int missing = -1;
    for (int i = 0; i < group.group_size - 1; ++i) {
        if (i < static_cast<int>(group.data.size()) && group.data[i]) continue;
        if (missing >= 0)
            throw Error(ErrorKind::Input, "unrecoverable: more than one data payload missing");
        missing = i;
    }
    if (missing < 0) throw Error(ErrorKind::Input, "nothing to recover: group is complete");
    Bytes out = group.parity;
    for (const auto& d : group.data)
        if (d)
            for (size_t i = 0; i < d->size() && i < out.size(); ++i) out[i] ^= (*d)[i];
    if (missing < static_cast<int>(group.lengths.size()))
        out.resize(group.lengths[missing]);
    return {missing, std::move(out)};
}

}  // namespace wispr
