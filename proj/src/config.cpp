#include "ergolab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ergolab/coupling.hpp"
#include "ergolab/criteria.hpp"
#include "ergolab/io.hpp"

namespace ergolab {

namespace {

const std::vector<std::string> kExperiments = {
    "defect",       "tv_defect",    "c4",           "c1c2",       "coupling_bounds",
    "reachability", "moment_decay", "chain_oracle", "oracle_crosscheck"};

// whitelist tree: object values are nested whitelists, `true` is a leaf
const nlohmann::json& known_keys() {
    static const nlohmann::json tree = {
        {"experiment", true},
        {"master_seed", true},
        {"out_dir", true},
        {"formats", true},
        {"threads", true},
        {"model",
         {{"type", true},
          {"a", true},
          {"b", true},
          {"sigma", {{"kind", true}, {"c0", true}, {"c1", true}}},
          {"m", true},
          {"M", true},
          {"lip_sigma", true},
          {"c1", true},
          {"c3", true},
          {"s", true},
          {"n", true},
          {"rows", true},
          {"labels", true},
          {"metric", true}}},
        {"sim",
         {{"horizon", true},
          {"dt", true},
          {"ode_tolerance", true},
          {"n_paths", true},
          {"record_times", true}}},
        {"probe", {{"z", true}, {"epsilon", true}}},
        {"grids", {{"x", true}, {"t", true}, {"bins", true}, {"t_min", true}}},
        {"defect",
         {{"f", {{"kind", true}, {"z", true}, {"epsilon", true}}}, {"tolerance", true}}},
        {"coupling", {{"lambda", true}, {"x", true}, {"y", true}}},
        {"reachability",
         {{"delta_tilde", true},
          {"epsilon", true},
          {"r_request", true},
          {"validate_mc", true},
          {"n_paths", true}}},
        {"moment_decay", {{"x", true}, {"spill_endpoints", true}}},
        {"splitting",
         {{"x1", true}, {"x2", true}, {"A", true}, {"t1", true}, {"k", true}}},
        {"crosscheck",
         {{"x", true},
          {"target_state", true},
          {"t_values", true},
          {"n_paths", true},
          {"confidence", true},
          {"t_equilibrium", true}}},
    };
    return tree;
}

void collect_unknown_keys(const nlohmann::json& doc, const nlohmann::json& allowed,
                          const std::string& prefix, std::vector<std::string>& unknown) {
    if (!doc.is_object()) return;
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.contains(key)) {
            unknown.push_back(prefix + key);
            continue;
        }
        if (allowed.at(key).is_object())
            collect_unknown_keys(value, allowed.at(key), prefix + key + ".", unknown);
    }
}

std::vector<double> parse_grid(const nlohmann::json& g, const std::string& name,
                               std::vector<std::string>& problems) {
    std::vector<double> out;
    if (g.is_array()) {
        out = g.get<std::vector<double>>();
        if (out.empty()) problems.push_back(name + ": grid must be nonempty");
    } else if (g.is_object()) {
        const double lo = g.at("min").get<double>();
        const double hi = g.at("max").get<double>();
        const int count = g.at("count").get<int>();
        if (count < 2 || !(hi > lo)) {
            problems.push_back(name + ": uniform grid needs max > min and count >= 2");
            return out;
        }
        for (int i = 0; i < count; ++i)
            out.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(count - 1));
    } else {
        problems.push_back(name + ": expected a list or {min,max,count}");
    }
    return out;
}

[[noreturn]] void fail(const std::vector<std::string>& problems) {
    std::string joined = "invalid config:";
    for (const auto& p : problems) joined += "\n  - " + p;
    throw std::domain_error(joined);
}

}  // namespace

const std::vector<std::string>& known_experiments() { return kExperiments; }

bool ExperimentConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::string ExperimentConfig::model_type() const {
    return doc.at("model").at("type").get<std::string>();
}

PoissonCubicModel ExperimentConfig::poisson_model() const {
    return PoissonCubicModel::from_json(doc.at("model"));
}

LangevinCubicModel ExperimentConfig::langevin_model() const {
    return LangevinCubicModel::from_json(doc.at("model"));
}

FiniteChain ExperimentConfig::chain() const { return FiniteChain::from_json(doc.at("model")); }

SimConfig ExperimentConfig::sim() const {
    SimConfig cfg = SimConfig::from_json(doc.at("sim"));
    cfg.master_seed = master_seed;
    return cfg;
}

std::vector<double> ExperimentConfig::x_grid() const {
    std::vector<std::string> problems;
    auto g = parse_grid(doc.at("grids").at("x"), "grids.x", problems);
    if (!problems.empty()) fail(problems);
    return g;
}

std::vector<double> ExperimentConfig::t_grid() const {
    std::vector<std::string> problems;
    auto g = parse_grid(doc.at("grids").at("t"), "grids.t", problems);
    if (!problems.empty()) fail(problems);
    return g;
}

std::vector<double> ExperimentConfig::bin_edges() const {
    std::vector<std::string> problems;
    auto g = parse_grid(doc.at("grids").at("bins"), "grids.bins", problems);
    if (!problems.empty()) fail(problems);
    return g;
}

double ExperimentConfig::burn_in() const {
    const auto& grids = doc.at("grids");
    return grids.contains("t_min") ? grids.at("t_min").get<double>() : -1.0;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config file not found: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config is not well-formed JSON: " + std::string(e.what()));
    }
    return parse_config_json(doc);
}

ExperimentConfig parse_config_json(const nlohmann::json& input) {
    std::vector<std::string> problems;
    nlohmann::json doc = input;

    std::vector<std::string> unknown;
    collect_unknown_keys(doc, known_keys(), "", unknown);
    if (!unknown.empty()) {
        std::string joined = "unknown keys:";
        for (const auto& k : unknown) joined += " " + k;
        problems.push_back(joined);
    }

    ExperimentConfig cfg;
    if (!doc.contains("experiment") || !doc.at("experiment").is_string()) {
        problems.push_back("experiment: required string field");
    } else {
        cfg.experiment = doc.at("experiment").get<std::string>();
        if (std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) ==
            kExperiments.end())
            problems.push_back("experiment: unknown kind '" + cfg.experiment + "'");
    }
    if (!doc.contains("master_seed") || !doc.at("master_seed").is_number_integer() ||
        (doc.at("master_seed").is_number_integer() &&
         !doc.at("master_seed").is_number_unsigned() &&
         doc.at("master_seed").get<long long>() < 0)) {
        problems.push_back("master_seed: required nonnegative integer");
    } else {
        cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
    }

    if (!doc.contains("formats")) doc["formats"] = {"json", "csv"};
    cfg.formats = doc.at("formats").get<std::vector<std::string>>();
    for (const auto& f : cfg.formats)
        if (f != "json" && f != "csv") problems.push_back("formats: unknown format '" + f + "'");
    if (!doc.contains("threads")) doc["threads"] = 0;
    cfg.threads = doc.at("threads").get<int>();
    if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();

    if (!problems.empty() && cfg.experiment.empty()) fail(problems);

    const std::string kind = cfg.experiment;
    const bool needs_model = true;
    const bool needs_probe = kind == "defect" || kind == "tv_defect" || kind == "c4" ||
                             kind == "c1c2" || kind == "chain_oracle";
    const bool needs_x_grid =
        kind == "defect" || kind == "tv_defect" || kind == "c4" || kind == "c1c2";
    const bool needs_t_grid = needs_x_grid || kind == "coupling_bounds" ||
                              kind == "moment_decay";
    const bool mc_experiment = needs_x_grid || kind == "coupling_bounds" ||
                               kind == "moment_decay" || kind == "oracle_crosscheck";

    std::string model_type;
    if (needs_model) {
        if (!doc.contains("model") || !doc.at("model").is_object() ||
            !doc.at("model").contains("type")) {
            problems.push_back("model: required object with a 'type' field");
        } else {
            model_type = doc.at("model").at("type").get<std::string>();
            if (model_type != "poisson_cubic" && model_type != "langevin_cubic" &&
                model_type != "chain")
                problems.push_back("model.type: unknown type '" + model_type + "'");
        }
    }

    // model invariants, reported together with everything else
    if (model_type == "poisson_cubic") {
        try {
            PoissonCubicModel::from_json(doc.at("model")).validate();
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    } else if (model_type == "langevin_cubic") {
        try {
            LangevinCubicModel::from_json(doc.at("model")).validate();
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    } else if (model_type == "chain") {
        try {
            FiniteChain::from_json(doc.at("model"));
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    }

    if ((kind == "coupling_bounds" || kind == "reachability" || kind == "moment_decay") &&
        model_type != "poisson_cubic" && !model_type.empty())
        problems.push_back(kind + ": requires model.type = poisson_cubic");
    if ((kind == "chain_oracle" || kind == "oracle_crosscheck") && model_type != "chain" &&
        !model_type.empty())
        problems.push_back(kind + ": requires model.type = chain");

    if (needs_probe) {
        if (!doc.contains("probe") || !doc.at("probe").contains("z")) {
            problems.push_back("probe.z: required for " + kind);
        } else {
            if (!doc.at("probe").contains("epsilon")) doc["probe"]["epsilon"] = 0.5;
            if (!(doc.at("probe").at("epsilon").get<double>() > 0.0))
                problems.push_back("probe.epsilon: must be positive");
        }
    }

    if (needs_x_grid) {
        if (!doc.contains("grids") || !doc.at("grids").contains("x"))
            problems.push_back("grids.x: required for " + kind);
        else
            parse_grid(doc.at("grids").at("x"), "grids.x", problems);
    }
    if (needs_t_grid) {
        if (!doc.contains("grids") || !doc.at("grids").contains("t"))
            problems.push_back("grids.t: required for " + kind);
        else {
            const auto g = parse_grid(doc.at("grids").at("t"), "grids.t", problems);
            if (!std::is_sorted(g.begin(), g.end()))
                problems.push_back("grids.t: must be sorted increasing");
        }
    }
    if (kind == "tv_defect" && model_type != "chain") {
        if (!doc.contains("grids") || !doc.at("grids").contains("bins"))
            problems.push_back("grids.bins: required for Monte Carlo tv_defect");
        else
            parse_grid(doc.at("grids").at("bins"), "grids.bins", problems);
    }

    if (mc_experiment && kind != "oracle_crosscheck") {
        if (!doc.contains("sim")) {
            problems.push_back("sim: required for Monte Carlo experiments");
        } else {
            if (!doc.at("sim").contains("horizon")) {
                // horizon is implied by the largest grid time
                if (doc.contains("grids") && doc.at("grids").contains("t")) {
                    std::vector<std::string> scratch;
                    const auto g = parse_grid(doc.at("grids").at("t"), "grids.t", scratch);
                    if (!g.empty()) doc["sim"]["horizon"] = g.back();
                }
            }
            try {
                SimConfig::from_json(doc.at("sim")).validate();
            } catch (const std::exception& e) {
                problems.push_back(e.what());
            }
        }
    }

    if (kind == "coupling_bounds") {
        if (!doc.contains("coupling") || !doc.at("coupling").contains("lambda") ||
            !doc.at("coupling").contains("x") || !doc.at("coupling").contains("y")) {
            problems.push_back("coupling: requires lambda, x, y");
        } else if (model_type == "poisson_cubic" && doc.contains("model")) {
            try {
                const auto model = PoissonCubicModel::from_json(doc.at("model"));
                const double lambda = doc.at("coupling").at("lambda").get<double>();
                const double threshold = lambda_threshold(model.a, model.lip_sigma);
                if (!(lambda > threshold)) {
                    std::ostringstream msg;
                    msg << "coupling.lambda = " << lambda
                        << " violates the admissibility condition lambda > "
                           "(a+L_sigma)+L_sigma^2/2 = "
                        << threshold;
                    problems.push_back(msg.str());
                }
            } catch (const std::exception&) {
                // model problems already reported
            }
        }
    }

    if (kind == "reachability") {
        if (!doc.contains("reachability") ||
            !doc.at("reachability").contains("delta_tilde") ||
            !doc.at("reachability").contains("epsilon")) {
            problems.push_back("reachability: requires delta_tilde and epsilon");
        } else {
            if (!doc.at("reachability").contains("r_request"))
                doc["reachability"]["r_request"] = 0.0;
            if (!doc.at("reachability").contains("validate_mc"))
                doc["reachability"]["validate_mc"] = false;
            if (!doc.at("reachability").contains("n_paths"))
                doc["reachability"]["n_paths"] = 100000;
            if (model_type == "poisson_cubic" && doc.contains("model")) {
                try {
                    const auto model = PoissonCubicModel::from_json(doc.at("model"));
                    const double z = model.equilibrium();
                    const double cap =
                        std::min({model.m / 3.0, std::abs(z - model.m), z});
                    const double dt = doc.at("reachability").at("delta_tilde").get<double>();
                    if (!(dt > 0.0 && dt < cap)) {
                        std::ostringstream msg;
                        msg << "reachability.delta_tilde = " << dt
                            << " violates 0 < delta_tilde < min{m/3, |sqrt(a/b)-m|, "
                               "sqrt(a/b)} = "
                            << cap;
                        problems.push_back(msg.str());
                    }
                } catch (const std::exception&) {
                }
            }
        }
    }

    if (kind == "moment_decay") {
        if (!doc.contains("moment_decay") || !doc.at("moment_decay").contains("x"))
            problems.push_back("moment_decay.x: required starting point");
        if (!doc.contains("moment_decay") ||
            !doc.at("moment_decay").contains("spill_endpoints"))
            doc["moment_decay"]["spill_endpoints"] = false;
    }

    if (kind == "defect") {
        const double z = doc.contains("probe") && doc.at("probe").contains("z")
                             ? doc.at("probe").at("z").get<double>()
                             : 0.0;
        if (!doc.contains("defect")) doc["defect"] = nlohmann::json::object();
        if (!doc.at("defect").contains("f"))
            doc["defect"]["f"] = {{"kind", "hat"},
                                  {"z", z},
                                  {"epsilon", doc.contains("probe") &&
                                                      doc.at("probe").contains("epsilon")
                                                  ? doc.at("probe").at("epsilon").get<double>()
                                                  : 0.5}};
        if (!doc.at("defect").contains("tolerance")) doc["defect"]["tolerance"] = 0.1;
        if (doc.at("defect").at("f").at("kind").get<std::string>() != "hat")
            problems.push_back("defect.f.kind: only 'hat' is configurable; custom functions "
                               "are library-level");
    }
    if (kind == "tv_defect") {
        if (!doc.contains("defect")) doc["defect"] = nlohmann::json::object();
        if (!doc.at("defect").contains("tolerance")) doc["defect"]["tolerance"] = 0.1;
    }

    if (kind == "chain_oracle" && doc.contains("splitting")) {
        for (const char* field : {"x1", "x2", "A", "t1", "k"})
            if (!doc.at("splitting").contains(field))
                problems.push_back(std::string("splitting.") + field + ": required");
    }

    if (kind == "oracle_crosscheck") {
        if (!doc.contains("crosscheck")) doc["crosscheck"] = nlohmann::json::object();
        auto& cc = doc["crosscheck"];
        if (!cc.contains("x")) cc["x"] = 0;
        if (!cc.contains("target_state")) cc["target_state"] = 0;
        if (!cc.contains("t_values")) cc["t_values"] = {1, 2, 5, 10};
        if (!cc.contains("n_paths")) cc["n_paths"] = 100000;
        if (!cc.contains("confidence")) cc["confidence"] = 0.99;
        if (!cc.contains("t_equilibrium")) cc["t_equilibrium"] = 200;
    }

    if (!problems.empty()) fail(problems);
    cfg.doc = std::move(doc);
    return cfg;
}

}  // namespace ergolab
