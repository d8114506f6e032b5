#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ergolab/chain.hpp"
#include "ergolab/models.hpp"

namespace ergolab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutDirEnvVar = "ERGOLAB_OUT";

// Validated experiment description. `canonical` is the config with
// defaults filled in, serialized deterministically; its bytes define the
// config hash recorded in the manifest.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t master_seed = 0;
    std::filesystem::path out_dir;
    std::vector<std::string> formats;  // subset of {json, csv}
    int threads = 0;
    nlohmann::json doc;  // defaults-filled document

    std::string canonical() const { return doc.dump(2) + "\n"; }

    bool wants(const std::string& format) const;

    // typed accessors over doc
    std::string model_type() const;
    PoissonCubicModel poisson_model() const;
    LangevinCubicModel langevin_model() const;
    FiniteChain chain() const;
    SimConfig sim() const;
    std::vector<double> x_grid() const;
    std::vector<double> t_grid() const;
    std::vector<double> bin_edges() const;
    double burn_in() const;  // -1 = default (second half of t grid)
};

// Parses and validates; collects every invariant violation and unknown key
// into one aggregated error instead of failing one at a time.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_json(const nlohmann::json& doc);

const std::vector<std::string>& known_experiments();

}  // namespace ergolab
