#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ergolab/stats.hpp"

namespace ergolab {

// Probability measure on a finite state universe {0, ..., n-1}.
class FiniteMeasure {
public:
    explicit FiniteMeasure(std::vector<double> probs);

    static FiniteMeasure point_mass(std::size_t state, std::size_t n_states);
    static FiniteMeasure uniform(std::size_t n_states);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_.at(i); }
    const std::vector<double>& probs() const noexcept { return probs_; }

    // states carrying strictly positive mass, in increasing order
    std::vector<std::size_t> support() const;

    std::string to_csv() const;  // columns: state,prob

private:
    std::vector<double> probs_;
};

// Weighted sample cloud on the real line; the Monte Carlo stand-in for a
// law P_t(x,.) or its Cesaro average. Empty weights mean uniform.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<double> samples,
                              std::vector<double> weights = {});

    std::size_t size() const noexcept { return samples_.size(); }
    const std::vector<double>& samples() const noexcept { return samples_; }
    bool uniform_weights() const noexcept { return weights_.empty(); }
    double weight(std::size_t i) const;

    // paths that left the finite range and were excluded from the cloud;
    // carried so reports can surface the exclusion instead of hiding it
    std::size_t diverged_paths = 0;

    std::string to_csv() const;  // columns: sample,weight

private:
    std::vector<double> samples_;
    std::vector<double> weights_;  // empty = uniform 1/n
};

// Bounded Lipschitz test function together with the constants the
// stability criteria need.
struct TestFunction {
    std::function<double(double)> eval;
    double sup_norm = 1.0;
    double lip_const = 0.0;

    double operator()(double x) const { return eval(x); }
};

// f(x) = max(0, 1 - |x-z|/eps): sup norm 1, Lipschitz constant 1/eps,
// and (1/2)*1_{B(z,eps/2)} <= f <= 1_{B(z,eps)}.
TestFunction hat_function(double z, double eps);

// Half L1 distance between two measures on the same finite universe.
double tv_finite(const FiniteMeasure& mu, const FiniteMeasure& nu);

// 1-Wasserstein distance of two uniform-weight clouds of equal size,
// computed by pairing order statistics.
double w1_empirical_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Half L1 distance between binned masses. Samples falling outside
// [edges.front(), edges.back()) land in overflow bins on either end, never
// dropped. Consistent lower bound of the true total variation distance.
double tv_binned(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                 const std::vector<double>& bin_edges);

// Weighted fraction of samples with |s - z| < eps, with a Wilson score
// interval. Weighted clouds use the Kish effective sample size.
WilsonInterval ball_hit_fraction(const EmpiricalMeasure& mu, double z, double eps,
                                 double confidence = 0.95);

double expectation(const EmpiricalMeasure& mu, const TestFunction& f);

// Finite-measure expectation; f is evaluated at the state index.
double expectation(const FiniteMeasure& mu, const TestFunction& f);

}  // namespace ergolab
