#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ergolab/config.hpp"
#include "ergolab/io.hpp"
#include "ergolab/runner.hpp"
#include "ergolab/schema.hpp"

using namespace ergolab;
namespace fs = std::filesystem;

namespace {

nlohmann::json poisson_model_json() {
    return {{"type", "poisson_cubic"},
            {"a", 1.0},
            {"b", 1.0},
            {"sigma", {{"kind", "sinusoidal"}, {"c0", 1.0}, {"c1", 0.25}}},
            {"m", 0.75},
            {"M", 1.25},
            {"lip_sigma", 0.25}};
}

nlohmann::json chain_model_json() {
    return {{"type", "chain"}, {"n", 2}, {"rows", {{0.9, 0.1}, {0.2, 0.8}}}};
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("ergolab_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("minimal defect config parses with defaults filled", "[config]") {
    const nlohmann::json doc = {{"experiment", "defect"},
                                {"master_seed", 42},
                                {"model", poisson_model_json()},
                                {"probe", {{"z", 1.0}}},
                                {"grids", {{"x", {1.2, 1.5}}, {"t", {1.0, 2.0}}}},
                                {"sim", {{"n_paths", 100}}}};
    const ExperimentConfig cfg = parse_config_json(doc);
    CHECK(cfg.experiment == "defect");
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.wants("json"));
    CHECK(cfg.wants("csv"));
    // defaults echoed into the canonical document
    CHECK(cfg.doc.at("defect").at("f").at("kind") == "hat");
    CHECK(cfg.doc.at("probe").at("epsilon") == 0.5);
    CHECK(cfg.doc.at("sim").at("horizon") == 2.0);
    CHECK(cfg.x_grid() == std::vector<double>{1.2, 1.5});
}

TEST_CASE("unknown keys are listed in the error", "[config]") {
    nlohmann::json doc = {{"experiment", "c4"},
                          {"master_seed", 1},
                          {"model", chain_model_json()},
                          {"probe", {{"z", 0.0}}},
                          {"grids", {{"x", {0.0}}, {"t", {5.0}}}},
                          {"sim", {{"n_paths", 10}}},
                          {"typo_key", 3},
                          {"grids_extra", 1}};
    doc["model"]["unexpected"] = true;
    try {
        parse_config_json(doc);
        FAIL("expected an aggregated error");
    } catch (const std::domain_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("typo_key") != std::string::npos);
        CHECK(msg.find("grids_extra") != std::string::npos);
        CHECK(msg.find("model.unexpected") != std::string::npos);
    }
}

TEST_CASE("inadmissible coupling gain is rejected by name", "[config]") {
    const nlohmann::json doc = {{"experiment", "coupling_bounds"},
                                {"master_seed", 5},
                                {"model", poisson_model_json()},
                                {"coupling", {{"lambda", 1.0}, {"x", 1.5}, {"y", 1.0}}},
                                {"grids", {{"t", {0.5, 1.0}}}},
                                {"sim", {{"n_paths", 100}}}};
    CHECK_THROWS_WITH(parse_config_json(doc),
                      Catch::Matchers::ContainsSubstring("admissibility"));
}

TEST_CASE("sigma bound violations name the probe point", "[config]") {
    nlohmann::json model = poisson_model_json();
    model["m"] = 0.9;  // sigma dips to 0.75 on the grid
    const nlohmann::json doc = {{"experiment", "moment_decay"},
                                {"master_seed", 5},
                                {"model", model},
                                {"moment_decay", {{"x", 5.0}}},
                                {"grids", {{"t", {0.5, 1.0, 5.0}}}},
                                {"sim", {{"n_paths", 10}}}};
    try {
        parse_config_json(doc);
        FAIL("expected a validation error");
    } catch (const std::domain_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("violates m<sigma<M") != std::string::npos);
        CHECK(msg.find("sigma(") != std::string::npos);  // the offending probe point
    }
}

TEST_CASE("several violations aggregate into one error", "[config]") {
    nlohmann::json model = poisson_model_json();
    model["a"] = -1.0;
    const nlohmann::json doc = {{"experiment", "coupling_bounds"},
                                {"master_seed", 5},
                                {"model", model},
                                {"coupling", {{"lambda", 0.1}, {"x", 1.0}, {"y", 1.0}}},
                                {"grids", {{"t", {1.0}}}},
                                {"sim", {{"n_paths", 0}}},
                                {"stray", 1}};
    try {
        parse_config_json(doc);
        FAIL("expected a validation error");
    } catch (const std::domain_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("stray") != std::string::npos);
        CHECK(msg.find("a must be positive") != std::string::npos);
        CHECK(msg.find("n_paths") != std::string::npos);
    }
}

TEST_CASE("config file round trip and parse errors", "[config]") {
    const fs::path dir = temp_dir("parse");
    const fs::path good = dir / "good.json";
    std::ofstream(good) << nlohmann::json{{"experiment", "chain_oracle"},
                                          {"master_seed", 9},
                                          {"model", chain_model_json()},
                                          {"probe", {{"z", 0.0}}}}
                               .dump();
    CHECK(parse_config(good).experiment == "chain_oracle");

    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_WITH(parse_config(bad), Catch::Matchers::ContainsSubstring("JSON"));
    CHECK_THROWS_AS(parse_config(dir / "missing.json"), std::runtime_error);
}

TEST_CASE("schema text matches the shipped schema file byte for byte", "[config]") {
    const fs::path repo_schema =
        fs::path(ERGOLAB_SOURCE_DIR) / "schemas" / "ergolab_reports.schema.json";
    CHECK(report_schema_text() == read_file(repo_schema));
}

TEST_CASE("chain oracle experiment writes schema-valid deterministic reports", "[config]") {
    const nlohmann::json doc = {{"experiment", "chain_oracle"},
                                {"master_seed", 31},
                                {"model", chain_model_json()},
                                {"probe", {{"z", 0.0}, {"epsilon", 0.5}}},
                                {"splitting",
                                 {{"x1", 0}, {"x2", 1}, {"A", {0}}, {"t1", 1}, {"k", 5}}}};
    const ExperimentConfig cfg = parse_config_json(doc);
    const fs::path dir_a = temp_dir("oracle_a");
    const fs::path dir_b = temp_dir("oracle_b");
    const RunManifest first = run_experiment(cfg, dir_a);
    const RunManifest second = run_experiment(cfg, dir_b);

    REQUIRE(first.outputs.size() == second.outputs.size());
    CHECK(first.config_hash == second.config_hash);
    for (std::size_t i = 0; i < first.outputs.size(); ++i) {
        CHECK(first.outputs[i].path == second.outputs[i].path);
        CHECK(first.outputs[i].fnv64 == second.outputs[i].fnv64);
        CHECK(read_file(dir_a / first.outputs[i].path) ==
              read_file(dir_b / second.outputs[i].path));
        if (first.outputs[i].path.ends_with(".json"))
            CHECK_NOTHROW(validate_report(
                nlohmann::json::parse(read_file(dir_a / first.outputs[i].path))));
    }
    CHECK_NOTHROW(
        validate_report(nlohmann::json::parse(read_file(dir_a / "manifest.json"))));
}

TEST_CASE("mc experiment outputs are deterministic and row-complete", "[config]") {
    const nlohmann::json doc = {{"experiment", "c4"},
                                {"master_seed", 77},
                                {"model", chain_model_json()},
                                {"probe", {{"z", 0.0}, {"epsilon", 0.5}}},
                                {"grids", {{"x", {0.0, 1.0}}, {"t", {5.0, 10.0}}}},
                                {"sim", {{"n_paths", 500}}}};
    const ExperimentConfig cfg = parse_config_json(doc);
    const fs::path dir_a = temp_dir("c4_a");
    const fs::path dir_b = temp_dir("c4_b");
    const RunManifest first = run_experiment(cfg, dir_a);
    const RunManifest second = run_experiment(cfg, dir_b);
    for (std::size_t i = 0; i < first.outputs.size(); ++i)
        CHECK(first.outputs[i].fnv64 == second.outputs[i].fnv64);

    // no silent truncation: the grid csv has exactly |x| * |t| data rows
    const std::string csv = read_file(dir_a / "c4_grid.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2);

    const nlohmann::json rep = nlohmann::json::parse(read_file(dir_a / "c4_report.json"));
    CHECK(rep.at("points").size() == 4);
    CHECK_NOTHROW(validate_report(rep));
}

TEST_CASE("oracle crosscheck on the 2-state chain stays inside the cis", "[config]") {
    const nlohmann::json doc = {{"experiment", "oracle_crosscheck"},
                                {"master_seed", 404},
                                {"model", chain_model_json()},
                                {"crosscheck", {{"n_paths", 20000}}}};
    const ExperimentConfig cfg = parse_config_json(doc);
    const fs::path dir = temp_dir("crosscheck");
    run_experiment(cfg, dir);
    const nlohmann::json rep =
        nlohmann::json::parse(read_file(dir / "oracle_crosscheck.json"));
    CHECK(rep.at("all_within_ci").get<bool>());
    CHECK_NOTHROW(validate_report(rep));
}

TEST_CASE("verdicts do not drive failure; missing fields do", "[config]") {
    // not-supported outcome still runs to completion and writes reports
    const nlohmann::json doc = {
        {"experiment", "c4"},
        {"master_seed", 3},
        {"model",
         {{"type", "chain"}, {"n", 2}, {"rows", {{1.0, 0.0}, {0.0, 1.0}}}}},
        {"probe", {{"z", 0.0}, {"epsilon", 0.5}}},
        {"grids", {{"x", {1.0}}, {"t", {3.0, 6.0}}}},
        {"sim", {{"n_paths", 200}}}};
    const fs::path dir = temp_dir("verdict");
    const RunManifest manifest = run_experiment(parse_config_json(doc), dir);
    CHECK_FALSE(manifest.outputs.empty());
    const nlohmann::json rep = nlohmann::json::parse(read_file(dir / "c4_report.json"));
    CHECK(rep.at("verdict") == "not-supported");
}
