#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ergolab/chain.hpp"
#include "ergolab/flow.hpp"
#include "ergolab/simulate.hpp"
#include "ergolab/stats.hpp"

using namespace ergolab;

namespace {

PoissonCubicModel canonical_model() {
    PoissonCubicModel model;
    model.a = 1.0;
    model.b = 1.0;
    model.sigma = SigmaSpec::sinusoidal(1.0, 0.25);
    model.m = 0.75;
    model.M = 1.25;
    model.lip_sigma = 0.25;
    model.validate();
    return model;
}

FiniteChain two_state() {
    Eigen::MatrixXd P(2, 2);
    P << 0.9, 0.1, 0.2, 0.8;
    return FiniteChain(P);
}

}  // namespace

TEST_CASE("poisson path with no jumps follows the exact flow", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    const double record[] = {0.5, 1.0};
    const SimulatedPath path =
        poisson_cubic_path_with_jumps(model, 2.0, {}, record);
    CHECK(path.values[0] == exact_cubic_flow(2.0, 0.5, 1.0, 1.0));
    CHECK(path.values[1] == exact_cubic_flow(2.0, 1.0, 1.0, 1.0));

    // at the fixed point the no-jump path never moves
    const SimulatedPath fixed =
        poisson_cubic_path_with_jumps(model, 1.0, {}, record);
    CHECK(fixed.values[1] == 1.0);
}

TEST_CASE("single injected jump unrolls the definition", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    const double tau = 0.35, T = 1.25, x = 0.4;
    const double jumps[] = {tau};
    const double record[] = {T};
    const SimulatedPath path = poisson_cubic_path_with_jumps(model, x, jumps, record);

    const double y_tau = exact_cubic_flow(x, tau, model.a, model.b);
    const double after = y_tau + model.sigma(y_tau);
    CHECK(path.values[0] == exact_cubic_flow(after, T - tau, model.a, model.b));
}

TEST_CASE("zero-jump frequency matches the exponential clock", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.master_seed = 99;
    const long n = 100000;
    long zero_jump = 0;
    for (long i = 0; i < n; ++i)
        if (simulate_poisson_cubic(model, 1.0, cfg, static_cast<std::uint64_t>(i))
                .jump_times.empty())
            ++zero_jump;
    const double freq = static_cast<double>(zero_jump) / static_cast<double>(n);
    const double expect = std::exp(-1.0);
    const double se = std::sqrt(expect * (1.0 - expect) / static_cast<double>(n));
    CHECK(std::abs(freq - expect) <= 3.0 * se);
}

TEST_CASE("mass at the equilibrium equals the zero-jump frequency", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    const PoissonCubicProcess process(model);
    const double eq = model.equilibrium();
    const double T = 1.0;
    const long n = 50000;
    const EmpiricalMeasure law = sample_law(process, eq, T, n, 1234);
    long at_eq = 0;
    for (double s : law.samples())
        if (s == eq) ++at_eq;
    const double freq = static_cast<double>(at_eq) / static_cast<double>(n);
    const double expect = std::exp(-T);
    const double se = std::sqrt(expect * (1.0 - expect) / static_cast<double>(n));
    CHECK(std::abs(freq - expect) <= 3.0 * se);
}

TEST_CASE("jump count over [0,T] is Poisson(T)", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    SimConfig cfg;
    cfg.horizon = 5.0;
    cfg.master_seed = 7;
    const long n = 100000;
    std::vector<long> counts;
    counts.reserve(n);
    for (long i = 0; i < n; ++i) {
        const SimulatedPath p =
            simulate_poisson_cubic(model, 0.5, cfg, static_cast<std::uint64_t>(i));
        for (std::size_t k = 1; k < p.jump_times.size(); ++k)
            REQUIRE(p.jump_times[k] > p.jump_times[k - 1]);
        counts.push_back(static_cast<long>(p.jump_times.size()));
    }
    // chi-square against Poisson(5) pmf, tail pooled to keep expected >= 5
    const double T = 5.0;
    const int K = 15;
    std::vector<double> expected(K + 1, 0.0);
    double pmf = std::exp(-T);
    double tail = 1.0;
    for (int k = 0; k < K; ++k) {
        expected[k] = pmf * static_cast<double>(n);
        tail -= pmf;
        pmf *= T / static_cast<double>(k + 1);
    }
    expected[K] = tail * static_cast<double>(n);
    std::vector<double> observed(K + 1, 0.0);
    for (long c : counts) observed[static_cast<std::size_t>(std::min<long>(c, K))] += 1.0;
    double chi2 = 0.0;
    for (int k = 0; k <= K; ++k)
        chi2 += (observed[k] - expected[k]) * (observed[k] - expected[k]) / expected[k];
    CHECK(chi_square_tail(chi2, K) > 0.001);
}

TEST_CASE("batches are reproducible and thread-count independent", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    SimConfig cfg;
    cfg.horizon = 2.0;
    cfg.n_paths = 500;
    cfg.master_seed = 2024;
    cfg.record_times = {0.5, 1.0, 2.0};
    const TrajectoryBatch one = simulate_poisson_batch(model, 0.3, cfg, 1);
    const TrajectoryBatch two = simulate_poisson_batch(model, 0.3, cfg, 2);
    REQUIRE(one.values.size() == two.values.size());
    for (std::size_t i = 0; i < one.values.size(); ++i) {
        CHECK(one.values[i] == two.values[i]);
        CHECK(one.jump_times[i] == two.jump_times[i]);
    }

    const PoissonCubicProcess process(model);
    const EmpiricalMeasure law_a = sample_law(process, 0.3, 2.0, 400, 5, 1);
    const EmpiricalMeasure law_b = sample_law(process, 0.3, 2.0, 400, 5, 2);
    CHECK(law_a.samples() == law_b.samples());
}

TEST_CASE("sample_law with one path reproduces the path simulator", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    const PoissonCubicProcess process(model);
    SimConfig cfg;
    cfg.horizon = 1.7;
    cfg.master_seed = 321;
    const EmpiricalMeasure law = sample_law(process, 0.8, 1.7, 1, 321);
    CHECK(law.samples()[0] == simulate_poisson_cubic(model, 0.8, cfg, 0).endpoint());
}

TEST_CASE("langevin: zero is an absorbing path", "[simulate]") {
    LangevinCubicModel model;
    SimConfig cfg;
    cfg.horizon = 5.0;
    cfg.dt = 1e-3;
    cfg.master_seed = 11;
    cfg.record_times = {1.0, 5.0};
    const SimulatedPath path = simulate_langevin(model, 0.0, cfg, 3);
    CHECK(path.values[0] == 0.0);
    CHECK(path.values[1] == 0.0);
}

TEST_CASE("langevin with zero noise is first order in dt", "[simulate]") {
    LangevinCubicModel model;
    model.s = 0.0;
    const double exact = exact_cubic_flow(2.0, 2.0, 1.5, 1.0);
    auto endpoint_error = [&](double dt) {
        SimConfig cfg;
        cfg.horizon = 2.0;
        cfg.dt = dt;
        cfg.master_seed = 1;
        return std::abs(simulate_langevin(model, 2.0, cfg, 0).endpoint() - exact);
    };
    const double e1 = endpoint_error(1e-3);
    const double e2 = endpoint_error(5e-4);
    CHECK(e1 / e2 == Catch::Approx(2.0).margin(0.4));
}

TEST_CASE("langevin long-run mean matches the stationary density", "[simulate]") {
    // stationary density of dX = (1.5X - X^3) dt + X dB on (0, inf) is
    // proportional to x e^{-x^2}; its mean is sqrt(pi)/2
    LangevinCubicModel model;
    SimConfig cfg;
    cfg.horizon = 50.0;
    cfg.dt = 2e-3;
    cfg.master_seed = 77;
    const LangevinProcess process(model, cfg.dt);
    const EmpiricalMeasure law = sample_law(process, 1.0, 50.0, 4000, 77);
    RunningMoments m;
    for (double s : law.samples()) m.add(s);
    const double target = std::sqrt(std::numbers::pi) / 2.0;
    CHECK(std::abs(m.mean() - target) < 3.0 * m.se() + 0.02);
}

TEST_CASE("langevin divergence is flagged, not dropped", "[simulate]") {
    LangevinCubicModel model;
    model.s = 50.0;  // wild multiplicative noise to force overflow
    SimConfig cfg;
    cfg.horizon = 24.0;  // long enough for most paths to blow up, not all
    cfg.dt = 0.25;
    cfg.master_seed = 5;
    cfg.n_paths = 50;
    const TrajectoryBatch batch = simulate_langevin_batch(model, 1.0, cfg);
    CHECK(batch.diverged_count > 0);
    CHECK(batch.diverged_count < 50);

    const LangevinProcess process(model, cfg.dt);
    const EmpiricalMeasure law = sample_law(process, 1.0, 24.0, 50, 5);
    CHECK(law.diverged_paths == static_cast<std::size_t>(batch.diverged_count));
    CHECK(law.size() + law.diverged_paths == 50);
}

TEST_CASE("cesaro sampling concentrates at x as t -> 0", "[simulate]") {
    const PoissonCubicProcess process(canonical_model());
    const EmpiricalMeasure law = sample_cesaro_law(process, 0.6, 1e-6, 200, 42);
    for (double s : law.samples()) CHECK(s == Catch::Approx(0.6).margin(1e-5));
}

TEST_CASE("embedded chain cesaro sampling matches the exact oracle", "[simulate]") {
    const FiniteChain chain = two_state();
    const EmbeddedChainProcess process(chain);
    const long t = 7;
    const long n = 20000;
    const EmpiricalMeasure law =
        sample_cesaro_law(process, 0.0, static_cast<double>(t), n, 2718);
    const FiniteMeasure exact = cesaro_distribution(chain, 0, t);
    for (int s = 0; s < 2; ++s) {
        const WilsonInterval w =
            ball_hit_fraction(law, static_cast<double>(s), 0.5, 0.999);
        CHECK(w.lo <= exact[static_cast<std::size_t>(s)]);
        CHECK(w.hi >= exact[static_cast<std::size_t>(s)]);
    }
}

TEST_CASE("embedded chain law matches matrix powers", "[simulate]") {
    const FiniteChain chain = two_state();
    const EmbeddedChainProcess process(chain);
    CHECK(process.state_at(1.0, 0.0, 9, 4) == 1.0);
    const FiniteMeasure exact = power_distribution(chain, 0, 3);
    const EmpiricalMeasure law = sample_law(process, 0.0, 3.0, 20000, 3141);
    const WilsonInterval w = ball_hit_fraction(law, 0.0, 0.5, 0.999);
    CHECK(w.lo <= exact[0]);
    CHECK(w.hi >= exact[0]);
}

TEST_CASE("sigma bounds are validated on the probe grid", "[simulate]") {
    PoissonCubicModel bad = canonical_model();
    bad.m = 0.9;  // sinusoidal sigma dips to 0.75 < m
    CHECK_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring("violates"));

    PoissonCubicModel lip = canonical_model();
    lip.lip_sigma = 0.1;  // true Lipschitz constant is 0.25
    CHECK_THROWS_WITH(lip.validate(), Catch::Matchers::ContainsSubstring("Lipschitz"));
}

TEST_CASE("trajectory batch spills endpoints as csv", "[simulate]") {
    const PoissonCubicModel model = canonical_model();
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.n_paths = 3;
    cfg.master_seed = 8;
    const TrajectoryBatch batch = simulate_poisson_batch(model, 0.5, cfg);
    const std::string csv = batch.endpoints_csv();
    CHECK(csv.rfind("path_index,time,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
