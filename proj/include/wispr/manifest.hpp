#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace wispr {

inline constexpr const char* kToolVersion = "wisprkit 0.1.0";

// FNV-1a 64-bit content hash, hex encoded.
std::string digest_bytes(const std::string& data);
std::string digest_file(const std::filesystem::path& file);

struct RunManifest {
    std::string command;
    std::string resolved_config;  // JSON text of the effective configuration
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_digests;   // path -> digest
    std::map<std::string, std::string> output_digests;  // path -> digest
};

// Writes manifest.json into out_dir. Deterministic: no timestamps.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

}  // namespace wispr
