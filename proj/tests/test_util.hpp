#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ergolab/rng.hpp"

namespace ergolab::testutil {

// fixed-seed generators so property tests are reproducible

inline std::vector<double> random_prob_vector(PathRng& rng, std::size_t n) {
    std::vector<double> v(n);
    double total = 0.0;
    for (auto& x : v) {
        x = rng.uniform_pos();
        total += x;
    }
    for (auto& x : v) x /= total;
    // renormalize exactly against accumulated rounding
    double s = 0.0;
    for (double x : v) s += x;
    v.back() += 1.0 - s;
    return v;
}

inline Eigen::MatrixXd random_stochastic_matrix(PathRng& rng, int n) {
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i) {
        const auto row = random_prob_vector(rng, static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) P(i, j) = row[static_cast<std::size_t>(j)];
    }
    return P;
}

}  // namespace ergolab::testutil
