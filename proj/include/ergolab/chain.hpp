#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "ergolab/criterion_report.hpp"
#include "ergolab/measures.hpp"

namespace ergolab {

// Row-stochastic transition kernel over labeled states: the exact oracle
// every Monte Carlo estimator is cross-checked against. Immutable.
class FiniteChain {
public:
    explicit FiniteChain(Eigen::MatrixXd kernel, std::vector<std::string> labels = {},
                         std::optional<Eigen::MatrixXd> metric = {});

    int n_states() const { return static_cast<int>(kernel_.rows()); }
    const Eigen::MatrixXd& kernel() const { return kernel_; }
    const std::vector<std::string>& labels() const { return labels_; }

    // discrete metric unless an explicit one was supplied
    double metric(int i, int j) const;
    bool has_explicit_metric() const { return metric_.has_value(); }

    // {y : d(z,y) < eps}
    std::vector<int> ball(int z, double eps) const;

    // strongly connected components with no outgoing edges
    const std::vector<std::vector<int>>& recurrent_classes() const { return recurrent_; }
    bool single_recurrent_class() const { return recurrent_.size() == 1; }
    // gcd of cycle lengths over recurrent classes (1 = aperiodic)
    int period() const { return period_; }

    static FiniteChain from_json(const nlohmann::json& j);
    // square CSV matrix, one row per line
    static FiniteChain from_csv(const std::string& text);

private:
    Eigen::MatrixXd kernel_;
    std::vector<std::string> labels_;
    std::optional<Eigen::MatrixXd> metric_;
    std::vector<std::vector<int>> recurrent_;
    int period_ = 1;
};

// Row x of kernel^t; t = 0 gives the point mass at x.
FiniteMeasure power_distribution(const FiniteChain& chain, int x, long t);

struct InvariantMeasureResult {
    std::optional<FiniteMeasure> measure;  // present iff unique
    std::vector<std::vector<int>> recurrent_classes;
    bool unique() const { return measure.has_value(); }
};

// Stationary distribution by direct linear solve; reports the recurrent
// class decomposition instead of a measure when it is not unique.
InvariantMeasureResult invariant_measure(const FiniteChain& chain);

// (1/t) * sum_{s=1..t} P^s(x,.) - discrete-time Cesaro average.
FiniteMeasure cesaro_distribution(const FiniteChain& chain, int x, long t);

// min over starting states of P^{t1}(x, A)
double doeblin_alpha(const FiniteChain& chain, const std::vector<int>& A, long t1);

struct SplittingRound {
    FiniteMeasure nu_x1, mu_x1;
    FiniteMeasure nu_x2, mu_x2;
    long t_i;
};

struct SplittingTrace {
    double alpha;
    std::vector<SplittingRound> rounds;
    double residual_bound;  // 2*(1-alpha)^k

    // max entrywise violation of P^{t_i} mu_{i-1} = alpha nu_i + (1-alpha) mu_i
    double reconstruction_residual(const FiniteChain& chain, int x1, int x2) const;
    nlohmann::json to_json() const;
};

// Runs the minorization induction with constant round length t1: each
// pushforward is split into its conditional on A (mass alpha) plus a
// remainder. After k rounds the unmatched mass is bounded by 2(1-alpha)^k;
// for singleton A the conditional parts coincide, so the exact TV between
// the two pushforwards is bounded by (1-alpha)^k.
SplittingTrace alpha_splitting_decomposition(const FiniteChain& chain, int x1, int x2,
                                             const std::vector<int>& A, long t1, int k);

struct ChainConditionReport {
    CriterionReport c1;  // limsup_t Q_t(x, B(z,eps)) > 0, worst x
    CriterionReport c2;  // liminf_t P_t(z, B(z,eps)) > 0
    CriterionReport c4;  // inf_x liminf_t P_t(x, B(z,eps)) > 0
    bool cesaro_only = false;  // periodic chain: limits taken along Cesaro averages
};

// Exact limit values of the three lower-bound conditions. For chains with
// a periodic recurrent class the P_t limits do not exist pointwise; the
// report then carries Cesaro-limit values and the cesaro_only flag.
ChainConditionReport exact_condition_report(const FiniteChain& chain, int z, double eps);

}  // namespace ergolab
