#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ergolab/config.hpp"
#include "ergolab/exec.hpp"
#include "ergolab/runner.hpp"
#include "ergolab/schema.hpp"

namespace {

std::filesystem::path resolve_out_dir(const ergolab::ExperimentConfig& cfg,
                                      const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv(ergolab::kOutDirEnvVar); env && *env) return env;
    return "ergolab_out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergolab: numerical diagnostics for asymptotic stability of "
                 "Markov-Feller semigroups"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--seed", seed_override, "override the config's master_seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI::App* validate = app.add_subcommand("validate", "validate a config and exit");
    validate->add_option("--config", config_path, "experiment config (JSON)")->required();

    CLI::App* schema = app.add_subcommand("schema", "report schema");
    bool print_schema = false;
    schema->add_flag("--print", print_schema, "print the versioned report schema");

    CLI11_PARSE(app, argc, argv);

    try {
        if (schema->parsed()) {
            if (print_schema) std::cout << ergolab::report_schema_text();
            return 0;
        }
        ergolab::ExperimentConfig cfg = ergolab::parse_config(config_path);
        if (validate->parsed()) {
            std::cout << "config ok: experiment=" << cfg.experiment
                      << " master_seed=" << cfg.master_seed << "\n";
            return 0;
        }
        if (seed_override) {
            cfg.master_seed = *seed_override;
            cfg.doc["master_seed"] = *seed_override;
        }
        if (threads > 0) {
            cfg.threads = threads;
            cfg.doc["threads"] = threads;
        }
        ergolab::set_default_threads(cfg.threads);
        const std::filesystem::path dir = resolve_out_dir(cfg, out_dir);
        const ergolab::RunManifest manifest = ergolab::run_experiment(cfg, dir);
        std::cout << "wrote " << manifest.outputs.size() << " report file(s) to " << dir
                  << " (config " << manifest.config_hash << ")\n";
        for (const auto& c : manifest.caveats) std::cout << "note: " << c << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
