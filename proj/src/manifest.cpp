#include "wispr/manifest.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wispr/error.hpp"

namespace wispr {

std::string digest_bytes(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string digest_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string() + " for hashing");
    std::stringstream ss;
    ss << in.rdbuf();
    return digest_bytes(ss.str());
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["config"] = manifest.resolved_config.empty()
                      ? nlohmann::json::object()
                      : nlohmann::json::parse(manifest.resolved_config);
    j["seed"] = manifest.seed;
    j["version"] = kToolVersion;
    j["inputs"] = manifest.input_digests;
    j["outputs"] = manifest.output_digests;
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write manifest in " + out_dir.string());
    out << j.dump(2) << "\n";
}

}  // namespace wispr
