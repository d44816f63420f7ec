#pragma once

// Run manifests: every artifact the CLI writes gets a sidecar recording the
// exact inputs (content-hashed), configuration, and outputs, so any file can
// be reproduced from its manifest alone.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopbreak/common.hpp"

namespace hopbreak {

class ManifestBuilder {
public:
    ManifestBuilder(std::string command, uint64_t seed) {
        root_["schema"] = "hopbreak-manifest/1";
        root_["tool_version"] = kVersion;
        root_["command"] = std::move(command);
        root_["seed"] = seed;
        root_["inputs"] = nlohmann::ordered_json::array();
        root_["outputs"] = nlohmann::ordered_json::array();
    }

    void set_config(nlohmann::ordered_json config) { root_["config"] = std::move(config); }

    void add_input(const std::filesystem::path& path) {
        root_["inputs"].push_back({{"path", path.string()}, {"sha256", Sha256::of_file(path)}});
    }

    void add_output(const std::filesystem::path& path) {
        root_["outputs"].push_back({{"path", path.string()}, {"sha256", Sha256::of_file(path)}});
    }

    void write(const std::filesystem::path& path) const {
        atomic_write_file(path, root_.dump(2) + "\n");
    }

private:
    nlohmann::ordered_json root_;
};

}  // namespace hopbreak
