#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "ergolab/measures.hpp"
#include "ergolab/rng.hpp"
#include "test_util.hpp"

using namespace ergolab;
using testutil::random_prob_vector;

TEST_CASE("tv_finite on the worked examples", "[measures]") {
    const FiniteMeasure half({0.5, 0.5});
    CHECK(tv_finite(half, half) == 0.0);
    CHECK(tv_finite(FiniteMeasure::point_mass(0, 2), FiniteMeasure::point_mass(1, 2)) == 1.0);
    CHECK(tv_finite(half, FiniteMeasure({0.25, 0.75})) == Catch::Approx(0.25));
    CHECK_THROWS_AS(tv_finite(half, FiniteMeasure({1.0, 0.0, 0.0})), std::domain_error);
}

TEST_CASE("tv_finite is a metric bounded by one", "[measures]") {
    PathRng rng(3, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 6);
        const FiniteMeasure mu(random_prob_vector(rng, n));
        const FiniteMeasure nu(random_prob_vector(rng, n));
        const FiniteMeasure rho(random_prob_vector(rng, n));
        const double d_mn = tv_finite(mu, nu);
        CHECK(d_mn >= 0.0);
        CHECK(d_mn <= 1.0);
        CHECK(d_mn == Catch::Approx(tv_finite(nu, mu)));
        CHECK(d_mn <= tv_finite(mu, rho) + tv_finite(rho, nu) + 1e-12);
    }
}

TEST_CASE("w1 on the worked examples", "[measures]") {
    CHECK(w1_empirical_1d(EmpiricalMeasure({0.0, 1.0}), EmpiricalMeasure({0.0, 1.0})) == 0.0);
    CHECK(w1_empirical_1d(EmpiricalMeasure({0.0, 0.0}), EmpiricalMeasure({1.0, 1.0})) == 1.0);
    CHECK(w1_empirical_1d(EmpiricalMeasure({0.0, 2.0}), EmpiricalMeasure({1.0, 1.0})) == 1.0);
    CHECK_THROWS_AS(EmpiricalMeasure({}), std::domain_error);
    CHECK_THROWS_AS(
        w1_empirical_1d(EmpiricalMeasure({0.0, 1.0}), EmpiricalMeasure({0.0, 1.0, 2.0})),
        std::domain_error);
}

TEST_CASE("w1 of a translate is exactly the shift", "[measures]") {
    PathRng rng(5, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> samples, shifted;
        const double c = (rng.uniform() - 0.5) * 20.0;
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 100);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = rng.normal() * 5.0;
            samples.push_back(s);
            shifted.push_back(s + c);
        }
        const double w1 =
            w1_empirical_1d(EmpiricalMeasure(samples), EmpiricalMeasure(shifted));
        CHECK(w1 == Catch::Approx(std::abs(c)).margin(1e-12));
    }
}

TEST_CASE("tv_binned on the worked examples", "[measures]") {
    const std::vector<double> bins{0.0, 0.5, 1.0};
    const EmpiricalMeasure low(std::vector<double>(100, 0.1));
    const EmpiricalMeasure high(std::vector<double>(100, 0.9));
    CHECK(tv_binned(low, low, bins) == 0.0);
    CHECK(tv_binned(low, high, bins) == Catch::Approx(1.0).margin(1e-12));

    std::vector<double> mixed(50, 0.1);
    mixed.insert(mixed.end(), 50, 0.9);
    CHECK(tv_binned(low, EmpiricalMeasure(mixed), bins) == Catch::Approx(0.5));
}

TEST_CASE("tv_binned never drops out-of-range samples", "[measures]") {
    const std::vector<double> bins{0.0, 1.0};
    const EmpiricalMeasure below(std::vector<double>(10, -5.0));
    const EmpiricalMeasure above(std::vector<double>(10, 5.0));
    CHECK(tv_binned(below, above, bins) == Catch::Approx(1.0).margin(1e-12));
    CHECK(tv_binned(below, below, bins) == 0.0);
}

TEST_CASE("refining bins never decreases tv_binned on fixed samples", "[measures]") {
    PathRng rng(9, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 200; ++i) {
            a.push_back(rng.normal());
            b.push_back(rng.normal() + 0.3);
        }
        const EmpiricalMeasure mu(a), nu(b);
        std::vector<double> coarse, fine;
        for (int k = 0; k <= 4; ++k) coarse.push_back(-2.0 + k * 1.0);
        for (int k = 0; k <= 16; ++k) fine.push_back(-2.0 + k * 0.25);
        CHECK(tv_binned(mu, nu, coarse) <= tv_binned(mu, nu, fine) + 1e-12);
    }
}

TEST_CASE("hat function values and sandwich", "[measures]") {
    const TestFunction f = hat_function(0.0, 1.0);
    CHECK(f(0.0) == 1.0);
    CHECK(f(1.0) == 0.0);
    CHECK(f(-1.0) == 0.0);
    CHECK(hat_function(2.0, 0.5)(2.25) == Catch::Approx(0.5));
    CHECK_THROWS_AS(hat_function(0.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(hat_function(0.0, -1.0), std::domain_error);

    // (1/2) 1_{B(z, eps/2)} <= f <= 1_{B(z, eps)} pointwise
    PathRng rng(13, 0);
    const double z = 0.7, eps = 0.4;
    const TestFunction g = hat_function(z, eps);
    CHECK(g.sup_norm == 1.0);
    CHECK(g.lip_const == Catch::Approx(1.0 / eps));
    for (int i = 0; i < 1000; ++i) {
        const double s = z + (rng.uniform() - 0.5) * 4.0;
        const double v = g(s);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (std::abs(s - z) < eps / 2.0) CHECK(v >= 0.5);
        if (std::abs(s - z) >= eps) CHECK(v == 0.0);
    }
}

TEST_CASE("ball_hit_fraction endpoints and the wilson example", "[measures]") {
    const EmpiricalMeasure inside(std::vector<double>(100, 0.0));
    CHECK(ball_hit_fraction(inside, 0.0, 1.0).estimate == 1.0);
    CHECK(ball_hit_fraction(inside, 10.0, 1.0).estimate == 0.0);

    std::vector<double> quarter(25, 0.0);
    quarter.insert(quarter.end(), 75, 10.0);
    const WilsonInterval w = ball_hit_fraction(EmpiricalMeasure(quarter), 0.0, 1.0);
    CHECK(w.estimate == Catch::Approx(0.25));
    CHECK(w.lo == Catch::Approx(0.175453).margin(1e-3));
    CHECK(w.hi == Catch::Approx(0.343045).margin(1e-3));
}

TEST_CASE("expectation on point masses and mixtures", "[measures]") {
    const TestFunction f = hat_function(0.0, 1.0);
    CHECK(expectation(EmpiricalMeasure({0.0}), f) == 1.0);
    CHECK(expectation(EmpiricalMeasure({0.3}), f) == Catch::Approx(f(0.3)));
    CHECK(expectation(EmpiricalMeasure({-0.5, 0.5}), f) == Catch::Approx(0.5));
}

TEST_CASE("finite expectation difference is bounded by 2 sup tv", "[measures]") {
    PathRng rng(17, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 8);
        const FiniteMeasure mu(random_prob_vector(rng, n));
        const FiniteMeasure nu(random_prob_vector(rng, n));
        const TestFunction f = hat_function(rng.uniform() * n, 0.5 + rng.uniform() * 3.0);
        const double diff = std::abs(expectation(mu, f) - expectation(nu, f));
        CHECK(diff <= 2.0 * f.sup_norm * tv_finite(mu, nu) + 1e-12);
        CHECK(std::abs(expectation(mu, f)) <= f.sup_norm + 1e-12);
    }
}

TEST_CASE("measure invariants are enforced", "[measures]") {
    CHECK_THROWS_AS(FiniteMeasure({0.5, 0.4}), std::domain_error);
    CHECK_THROWS_AS(FiniteMeasure({1.5, -0.5}), std::domain_error);
    CHECK_THROWS_AS(EmpiricalMeasure({1.0}, {0.5}), std::domain_error);
    CHECK_NOTHROW(EmpiricalMeasure({1.0, 2.0}, {0.5, 0.5}));
    CHECK_THROWS_AS(tv_binned(EmpiricalMeasure({0.0}), EmpiricalMeasure({0.0}), {1.0}),
                    std::domain_error);
    CHECK_THROWS_AS(
        tv_binned(EmpiricalMeasure({0.0}), EmpiricalMeasure({0.0}), {1.0, 1.0}),
        std::domain_error);
}

TEST_CASE("csv serialization round-trips the schema columns", "[measures]") {
    const EmpiricalMeasure mu({1.5, -2.25});
    const std::string csv = mu.to_csv();
    CHECK(csv.rfind("sample,weight\n", 0) == 0);
    CHECK(csv.find("1.5,0.5") != std::string::npos);
    const FiniteMeasure pi({0.25, 0.75});
    CHECK(pi.to_csv().rfind("state,prob\n", 0) == 0);
}
