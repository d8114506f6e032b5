#include "ergolab/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace ergolab {

double normal_two_sided_z(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::domain_error("confidence level must lie in (0,1)");
    const boost::math::normal_distribution<double> n01;
    return boost::math::quantile(n01, 0.5 + confidence / 2.0);
}

WilsonInterval wilson_interval(double successes, double n, double confidence) {
    if (!(n > 0.0)) throw std::domain_error("wilson_interval: n must be positive");
    if (successes < 0.0 || successes > n)
        throw std::domain_error("wilson_interval: successes outside [0,n]");
    const double z = normal_two_sided_z(confidence);
    const double p = successes / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = p + z2 / (2.0 * n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {p, (center - half) / denom, (center + half) / denom};
}

double chi_square_tail(double x, double dof) {
    if (!(dof > 0.0)) throw std::domain_error("chi_square_tail: dof must be positive");
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

}  // namespace ergolab
