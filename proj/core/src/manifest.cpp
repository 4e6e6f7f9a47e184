#include "iotddos/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "iotddos/rng.hpp"

namespace iotddos {

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for checksum: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_str(bytes)));
    return buf;
}

bool RunManifest::all_ok() const {
    for (const auto& c : cells)
        if (c.status != "ok") return false;
    return true;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["tool_version"] = manifest.tool_version;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : manifest.cells) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["status"] = c.status;
        jc["seconds"] = c.seconds;
        jc["outputs"] = nlohmann::json::array();
        for (const auto& o : c.outputs) {
            jc["outputs"].push_back({{"path", o.path}, {"checksum", o.checksum}});
        }
        j["cells"].push_back(std::move(jc));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace iotddos
