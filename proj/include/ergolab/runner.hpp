#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ergolab/config.hpp"

namespace ergolab {

struct OutputFile {
    std::string path;   // relative to the output directory
    std::size_t bytes = 0;
    std::string fnv64;
};

struct RunManifest {
    std::string experiment;
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::uint64_t master_seed = 0;
    double wall_clock_ms = 0.0;
    std::vector<OutputFile> outputs;
    std::vector<std::string> caveats;

    nlohmann::json to_json() const;
};

// Executes the configured experiment, writes every report into out_dir
// (atomically) and the manifest last. Report bytes depend only on the
// config; wall clock lives in the manifest alone.
RunManifest run_experiment(const ExperimentConfig& cfg,
                           const std::filesystem::path& out_dir);

}  // namespace ergolab
