#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ergolab {

// Mean/variance accumulator with Kahan-compensated sums so that results do
// not depend on accumulation order at the precision we care about.
class RunningMoments {
public:
    void add(double x) noexcept {
        n_ += 1;
        add_compensated(sum_, c1_, x);
        add_compensated(sum_sq_, c2_, x * x);
    }

    std::size_t count() const noexcept { return n_; }

    double mean() const {
        require_nonempty();
        return (sum_ + c1_) / static_cast<double>(n_);
    }

    // unbiased sample variance (n-1 denominator), 0 for n < 2
    double variance() const {
        require_nonempty();
        if (n_ < 2) return 0.0;
        const double n = static_cast<double>(n_);
        const double m = mean();
        const double v = ((sum_sq_ + c2_) - n * m * m) / (n - 1.0);
        return v > 0.0 ? v : 0.0;
    }

    double stddev() const { return std::sqrt(variance()); }

    // standard error of the mean
    double se() const {
        require_nonempty();
        return stddev() / std::sqrt(static_cast<double>(n_));
    }

    void merge(const RunningMoments& other) noexcept {
        n_ += other.n_;
        add_compensated(sum_, c1_, other.sum_ + other.c1_);
        add_compensated(sum_sq_, c2_, other.sum_sq_ + other.c2_);
    }

private:
    static void add_compensated(double& sum, double& comp, double x) noexcept {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    void require_nonempty() const {
        if (n_ == 0) throw std::domain_error("RunningMoments: no observations");
    }

    std::size_t n_ = 0;
    double sum_ = 0.0, c1_ = 0.0;
    double sum_sq_ = 0.0, c2_ = 0.0;
};

struct WilsonInterval {
    double estimate;
    double lo;
    double hi;
};

// Two-sided normal quantile for the given confidence level (e.g. 0.95).
double normal_two_sided_z(double confidence);

// Wilson score interval for a binomial proportion. `successes` may be a
// weighted count; `n` the (effective) number of trials.
WilsonInterval wilson_interval(double successes, double n, double confidence = 0.95);

// Upper tail probability of the chi-square distribution with k dof.
double chi_square_tail(double x, double dof);

}  // namespace ergolab
