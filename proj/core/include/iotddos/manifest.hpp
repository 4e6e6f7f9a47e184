#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace iotddos {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the file bytes, rendered as 16 hex digits.
std::string file_checksum(const std::string& path);

struct ArtifactEntry {
    std::string path;  // relative to the output directory
    std::string checksum;
};

struct CellStatus {
    std::string name;
    std::string status;  // "ok" or "failed: <reason>"
    double seconds = 0;
    std::vector<ArtifactEntry> outputs;
};

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    std::vector<CellStatus> cells;

    bool all_ok() const;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace iotddos
