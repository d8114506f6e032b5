#include "ergolab/runner.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ergolab/coupling.hpp"
#include "ergolab/criteria.hpp"
#include "ergolab/flow.hpp"
#include "ergolab/io.hpp"
#include "ergolab/schema.hpp"
#include "ergolab/simulate.hpp"
#include "ergolab/stats.hpp"

namespace ergolab {

namespace {

class ReportSink {
public:
    ReportSink(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
               RunManifest& manifest)
        : cfg_(cfg), out_dir_(out_dir), manifest_(manifest) {}

    void write_json(const std::string& name, const nlohmann::json& doc) {
        if (!cfg_.wants("json")) return;
        validate_report(doc);
        write(name, doc.dump(2) + "\n");
    }

    void write_csv(const std::string& name, const std::string& contents) {
        if (!cfg_.wants("csv")) return;
        write(name, contents);
    }

    // plot-ready data regardless of format selection
    void write_plot(const std::string& name, const std::string& contents) {
        write(name, contents);
    }

    void caveat(const std::string& text) { manifest_.caveats.push_back(text); }

private:
    void write(const std::string& name, const std::string& contents) {
        if (contents.empty())
            throw std::runtime_error("refusing to write empty report file: " + name);
        write_file_atomic(out_dir_ / name, contents);
        manifest_.outputs.push_back({name, contents.size(), fnv1a_hex(contents)});
    }

    const ExperimentConfig& cfg_;
    std::filesystem::path out_dir_;
    RunManifest& manifest_;
};

std::string plot_curve(const std::vector<double>& t, const std::vector<double>& value,
                       const std::vector<double>* bound = nullptr) {
    std::ostringstream out;
    out << (bound ? "t,value,bound\n" : "t,value\n");
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_double(t[i]) << ',' << format_double(value[i]);
        if (bound) out << ',' << format_double((*bound)[i]);
        out << '\n';
    }
    return out.str();
}

std::unique_ptr<Process> make_process(const ExperimentConfig& cfg) {
    const std::string type = cfg.model_type();
    if (type == "poisson_cubic") {
        auto model = cfg.poisson_model();
        model.validate();
        return std::make_unique<PoissonCubicProcess>(model);
    }
    if (type == "langevin_cubic") {
        auto model = cfg.langevin_model();
        model.validate();
        return std::make_unique<LangevinProcess>(model, cfg.sim().dt);
    }
    if (type == "chain") return std::make_unique<EmbeddedChainProcess>(cfg.chain());
    throw std::domain_error("unknown model type: " + type);
}

TestFunction config_test_function(const ExperimentConfig& cfg) {
    const auto& f = cfg.doc.at("defect").at("f");
    return hat_function(f.at("z").get<double>(), f.at("epsilon").get<double>());
}

void per_x_plot_files(ReportSink& sink, const std::string& stem,
                      const CriterionReport& rep) {
    for (std::size_t i = 0; i < rep.x_grid.size(); ++i) {
        std::vector<double> t, v;
        for (const auto& p : rep.points)
            if (p.x == rep.x_grid[i]) {
                t.push_back(p.t);
                v.push_back(p.estimate);
            }
        if (t.empty()) continue;
        std::ostringstream name;
        name << stem << "_x" << i << ".plot.csv";
        sink.write_plot(name.str(), plot_curve(t, v));
    }
}

void run_defect(const ExperimentConfig& cfg, ReportSink& sink) {
    const auto process = make_process(cfg);
    const double z = cfg.doc.at("probe").at("z").get<double>();
    const DefectSurface surface = eventual_continuity_defect(
        *process, z, config_test_function(cfg), cfg.x_grid(), cfg.t_grid(),
        cfg.sim().n_paths, cfg.master_seed, cfg.burn_in(),
        cfg.doc.at("defect").at("tolerance").get<double>(), cfg.threads);
    sink.write_json("defect_report.json", surface.report.to_json());
    sink.write_csv("defect_surface.csv", surface.to_csv());
    per_x_plot_files(sink, "defect", surface.report);
    sink.caveat(surface.report.caveat);
}

void run_tv_defect(const ExperimentConfig& cfg, ReportSink& sink) {
    CriterionReport rep;
    if (cfg.model_type() == "chain") {
        const FiniteChain chain = cfg.chain();
        std::vector<int> x_grid;
        for (double x : cfg.x_grid()) x_grid.push_back(static_cast<int>(std::lround(x)));
        std::vector<long> t_grid;
        for (double t : cfg.t_grid()) t_grid.push_back(std::lround(t));
        rep = tv_defect(chain, static_cast<int>(std::lround(
                                   cfg.doc.at("probe").at("z").get<double>())),
                        x_grid, t_grid, cfg.burn_in(),
                        cfg.doc.at("defect").at("tolerance").get<double>());
    } else {
        const auto process = make_process(cfg);
        rep = tv_defect(*process, cfg.doc.at("probe").at("z").get<double>(), cfg.x_grid(),
                        cfg.t_grid(), cfg.bin_edges(), cfg.sim().n_paths, cfg.master_seed,
                        cfg.burn_in(), cfg.doc.at("defect").at("tolerance").get<double>(),
                        cfg.threads);
    }
    sink.write_json("tv_defect_report.json", rep.to_json());
    sink.write_csv("tv_defect_grid.csv", rep.to_csv());
    per_x_plot_files(sink, "tv_defect", rep);
    sink.caveat(rep.caveat);
}

void run_c4(const ExperimentConfig& cfg, ReportSink& sink) {
    const auto process = make_process(cfg);
    const CriterionReport rep = estimate_C4(
        *process, cfg.doc.at("probe").at("z").get<double>(),
        cfg.doc.at("probe").at("epsilon").get<double>(), cfg.x_grid(), cfg.t_grid(),
        cfg.sim().n_paths, cfg.master_seed, cfg.burn_in(), 0.95, cfg.threads);
    sink.write_json("c4_report.json", rep.to_json());
    sink.write_csv("c4_grid.csv", rep.to_csv());
    per_x_plot_files(sink, "c4", rep);
    sink.caveat(rep.caveat);
}

void run_c1c2(const ExperimentConfig& cfg, ReportSink& sink) {
    const auto process = make_process(cfg);
    const auto [c1, c2] = estimate_C1_C2(
        *process, cfg.doc.at("probe").at("z").get<double>(),
        cfg.doc.at("probe").at("epsilon").get<double>(), cfg.x_grid(), cfg.t_grid(),
        cfg.sim().n_paths, cfg.master_seed, cfg.burn_in(), 0.95, cfg.threads);
    sink.write_json("c1_report.json", c1.to_json());
    sink.write_csv("c1_grid.csv", c1.to_csv());
    sink.write_json("c2_report.json", c2.to_json());
    sink.write_csv("c2_grid.csv", c2.to_csv());
    sink.caveat(c1.caveat);
    sink.caveat(c2.caveat);
}

void run_coupling_bounds(const ExperimentConfig& cfg, ReportSink& sink) {
    auto model = cfg.poisson_model();
    model.validate();
    const auto& cj = cfg.doc.at("coupling");
    const CouplingParams params{cj.at("lambda").get<double>()};
    const SimConfig sim = cfg.sim();
    const CouplingDiagnostics diag = run_coupling_diagnostics(
        model, cj.at("x").get<double>(), cj.at("y").get<double>(), params, cfg.t_grid(),
        sim.n_paths, cfg.master_seed, sim.ode_tolerance, cfg.threads);
    sink.write_json("coupling_constants.json", diag.constants_json());
    sink.write_csv("coupling_bounds.csv", diag.to_csv());
    sink.write_plot("coupling_z2.plot.csv",
                    plot_curve(diag.t_grid, diag.e_z2, &diag.bound_z2));
    sink.write_plot("coupling_ztilde.plot.csv",
                    plot_curve(diag.t_grid, diag.e_ztilde, &diag.bound_ztilde));
    if (!diag.constants.regime_ok)
        sink.caveat("ztilde bound skipped: (x, y) outside the proven validity regime");
}

void run_reachability(const ExperimentConfig& cfg, ReportSink& sink) {
    auto model = cfg.poisson_model();
    model.validate();
    const auto& rj = cfg.doc.at("reachability");
    const ReachabilitySchedule schedule = reachability_schedule(
        model.a, model.b, model.m, model.M, rj.at("delta_tilde").get<double>(),
        rj.at("epsilon").get<double>(), rj.at("r_request").get<double>());
    sink.write_json("reachability_schedule.json", schedule.to_json());

    if (rj.at("validate_mc").get<bool>()) {
        // worst starting point of each case interval, hit frequency at the
        // combined horizon vs the case bound
        const double z = model.equilibrium();
        const PoissonCubicProcess process(model);
        const long n = rj.at("n_paths").get<long>();
        const double T = schedule.combined_T;
        struct Row {
            const char* name;
            double x;
            double bound;
        };
        const Row rows[] = {
            {"case1", z + schedule.r, schedule.case1_bound},
            {"case2", schedule.delta_tilde, schedule.case2_bound},
            {"case3", z - schedule.r, schedule.case3_bound},
        };
        std::ostringstream csv;
        csv << "case,worst_x,t,bound,empirical,se\n";
        std::uint64_t row_index = 0;
        for (const auto& row : rows) {
            const EmpiricalMeasure law = sample_law(
                process, row.x, T, n, derive_seed(cfg.master_seed, 0xEACB, row_index++),
                cfg.threads);
            const WilsonInterval w = ball_hit_fraction(law, z, schedule.eps);
            const double se =
                std::sqrt(w.estimate * (1.0 - w.estimate) / static_cast<double>(n));
            csv << row.name << ',' << format_double(row.x) << ',' << format_double(T) << ','
                << format_double(row.bound) << ',' << format_double(w.estimate) << ','
                << format_double(se) << '\n';
        }
        sink.write_csv("reachability_mc.csv", csv.str());
    }
    sink.caveat("schedule times carry the documented 1% safety margins");
}

void run_moment_decay(const ExperimentConfig& cfg, ReportSink& sink) {
    auto model = cfg.poisson_model();
    model.validate();
    const double x = cfg.doc.at("moment_decay").at("x").get<double>();
    const MomentDecayReport rep = moment_decay_fit(model, model.equilibrium(), x,
                                                   cfg.t_grid(), cfg.sim().n_paths,
                                                   cfg.master_seed, cfg.threads);
    sink.write_json("moment_decay.json", rep.to_json());
    sink.write_csv("moment_decay.csv", rep.to_csv());
    sink.write_plot("moment_decay.plot.csv", plot_curve(rep.t_grid, rep.e_sq, &rep.bound));
    if (cfg.doc.at("moment_decay").at("spill_endpoints").get<bool>()) {
        SimConfig sim = cfg.sim();
        sim.record_times = {cfg.t_grid().back()};
        const TrajectoryBatch batch = simulate_poisson_batch(model, x, sim, cfg.threads);
        sink.write_csv("moment_decay_endpoints.csv", batch.endpoints_csv());
    }
}

void run_chain_oracle(const ExperimentConfig& cfg, ReportSink& sink) {
    const FiniteChain chain = cfg.chain();
    const int z =
        static_cast<int>(std::lround(cfg.doc.at("probe").at("z").get<double>()));
    const double eps = cfg.doc.at("probe").at("epsilon").get<double>();
    const ChainConditionReport rep = exact_condition_report(chain, z, eps);
    sink.write_json("chain_c1_report.json", rep.c1.to_json());
    sink.write_json("chain_c2_report.json", rep.c2.to_json());
    sink.write_json("chain_c4_report.json", rep.c4.to_json());
    if (rep.cesaro_only)
        sink.caveat("periodic chain: exact limits reported along Cesaro averages only");

    const InvariantMeasureResult inv = invariant_measure(chain);
    if (inv.unique()) {
        sink.write_csv("invariant_measure.csv", inv.measure->to_csv());
    } else {
        std::ostringstream msg;
        msg << "no unique invariant measure: " << inv.recurrent_classes.size()
            << " recurrent classes";
        sink.caveat(msg.str());
    }

    if (cfg.doc.contains("splitting")) {
        const auto& sj = cfg.doc.at("splitting");
        const SplittingTrace trace = alpha_splitting_decomposition(
            chain, sj.at("x1").get<int>(), sj.at("x2").get<int>(),
            sj.at("A").get<std::vector<int>>(), sj.at("t1").get<long>(),
            sj.at("k").get<int>());
        sink.write_json("splitting_trace.json", trace.to_json());
    }
}

void run_oracle_crosscheck(const ExperimentConfig& cfg, ReportSink& sink) {
    const FiniteChain chain = cfg.chain();
    const EmbeddedChainProcess process(chain);
    const auto& cc = cfg.doc.at("crosscheck");
    const int x0 = cc.at("x").get<int>();
    const int target = cc.at("target_state").get<int>();
    const long n = cc.at("n_paths").get<long>();
    const double confidence = cc.at("confidence").get<double>();

    nlohmann::json rows = nlohmann::json::array();
    bool all_within = true;
    auto add_row = [&](const std::string& quantity, double t, double exact,
                       const WilsonInterval& w) {
        const bool within = exact >= w.lo && exact <= w.hi;
        all_within = all_within && within;
        rows.push_back({{"quantity", quantity},
                        {"t", t},
                        {"exact", exact},
                        {"estimate", w.estimate},
                        {"ci_low", w.lo},
                        {"ci_high", w.hi},
                        {"within_ci", within}});
    };

    for (const auto& tj : cc.at("t_values")) {
        const long t = tj.get<long>();
        const double exact = power_distribution(chain, x0, t)[static_cast<std::size_t>(target)];
        const EmpiricalMeasure law =
            sample_law(process, static_cast<double>(x0), static_cast<double>(t), n,
                       derive_seed(cfg.master_seed, static_cast<std::uint64_t>(t)),
                       cfg.threads);
        add_row("P^t(x,{target})", static_cast<double>(t),
                exact, ball_hit_fraction(law, static_cast<double>(target), 0.5, confidence));
    }

    const InvariantMeasureResult inv = invariant_measure(chain);
    if (inv.unique()) {
        const double t_eq = cc.at("t_equilibrium").get<double>();
        const EmpiricalMeasure law =
            sample_law(process, static_cast<double>(x0), t_eq, n,
                       derive_seed(cfg.master_seed, 0x1471), cfg.threads);
        for (int s = 0; s < chain.n_states(); ++s)
            add_row("pi(state " + std::to_string(s) + ")", t_eq,
                    (*inv.measure)[static_cast<std::size_t>(s)],
                    ball_hit_fraction(law, static_cast<double>(s), 0.5, confidence));
    } else {
        sink.caveat("invariant-measure crosscheck skipped: no unique invariant measure");
    }

    const nlohmann::json doc = {{"schema_version", 1},
                                {"kind", "oracle_crosscheck"},
                                {"n_paths", n},
                                {"rows", rows},
                                {"all_within_ci", all_within}};
    sink.write_json("oracle_crosscheck.json", doc);

    std::ostringstream csv;
    csv << "quantity,t,exact,estimate,ci_low,ci_high,within_ci\n";
    for (const auto& row : rows)
        csv << row.at("quantity").get<std::string>() << ','
            << format_double(row.at("t").get<double>()) << ','
            << format_double(row.at("exact").get<double>()) << ','
            << format_double(row.at("estimate").get<double>()) << ','
            << format_double(row.at("ci_low").get<double>()) << ','
            << format_double(row.at("ci_high").get<double>()) << ','
            << (row.at("within_ci").get<bool>() ? "true" : "false") << '\n';
    sink.write_csv("oracle_crosscheck.csv", csv.str());
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : outputs)
        outs.push_back({{"path", o.path},
                        {"bytes", o.bytes},
                        {"fnv64", o.fnv64}});
    return nlohmann::json{{"schema_version", 1},
                          {"kind", "run_manifest"},
                          {"experiment", experiment},
                          {"config_hash", config_hash},
                          {"tool_version", tool_version},
                          {"master_seed", master_seed},
                          {"wall_clock_ms", wall_clock_ms},
                          {"outputs", outs},
                          {"caveats", caveats}};
}

RunManifest run_experiment(const ExperimentConfig& cfg,
                           const std::filesystem::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.experiment = cfg.experiment;
    manifest.master_seed = cfg.master_seed;
    manifest.config_hash = fnv1a_hex(cfg.canonical());
    write_file_atomic(out_dir / "config.json", cfg.canonical());

    ReportSink sink(cfg, out_dir, manifest);
    if (cfg.experiment == "defect")
        run_defect(cfg, sink);
    else if (cfg.experiment == "tv_defect")
        run_tv_defect(cfg, sink);
    else if (cfg.experiment == "c4")
        run_c4(cfg, sink);
    else if (cfg.experiment == "c1c2")
        run_c1c2(cfg, sink);
    else if (cfg.experiment == "coupling_bounds")
        run_coupling_bounds(cfg, sink);
    else if (cfg.experiment == "reachability")
        run_reachability(cfg, sink);
    else if (cfg.experiment == "moment_decay")
        run_moment_decay(cfg, sink);
    else if (cfg.experiment == "chain_oracle")
        run_chain_oracle(cfg, sink);
    else if (cfg.experiment == "oracle_crosscheck")
        run_oracle_crosscheck(cfg, sink);
    else
        throw std::domain_error("unknown experiment: " + cfg.experiment);

    manifest.wall_clock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    const nlohmann::json mj = manifest.to_json();
    validate_report(mj);
    write_file_atomic(out_dir / "manifest.json", mj.dump(2) + "\n");
    return manifest;
}

}  // namespace ergolab
