#include "ergolab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ergolab {

namespace {
void check_params(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("cubic flow: a and b must be positive");
}

constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double exact_cubic_flow(double x, double t, double a, double b) {
    check_params(a, b);
    if (t < 0.0) throw std::domain_error("exact_cubic_flow: t must be nonnegative");
    if (x == 0.0) return 0.0;
    const double eq = std::sqrt(a / b);
    if (x == eq || x == -eq) return x;
    const double u0 = 1.0 / (x * x);
    const double u = b / a + (u0 - b / a) * std::exp(-2.0 * a * t);
    return std::copysign(1.0 / std::sqrt(u), x);
}

double cubic_flow_hit_time(double x, double y, double a, double b) {
    check_params(a, b);
    if (x == y) return 0.0;
    if (x == 0.0 || y == 0.0 || std::signbit(x) != std::signbit(y))
        throw std::domain_error("cubic_flow_hit_time: points must share a basin");
    const double eq = std::sqrt(a / b);
    const double ax = std::abs(x), ay = std::abs(y);
    const bool toward = (ax < eq && ax < ay && ay < eq) || (ax > eq && ay < ax && ay > eq);
    if (!toward)
        throw std::domain_error("cubic_flow_hit_time: target not on the path to equilibrium");
    const double num = 1.0 / (ay * ay) - b / a;
    const double den = 1.0 / (ax * ax) - b / a;
    return -std::log(num / den) / (2.0 * a);
}

double flow_entry_time(double x_lo, double x_hi, double z, double eps, double a, double b) {
    check_params(a, b);
    if (!(eps > 0.0)) throw std::domain_error("flow_entry_time: eps must be positive");
    if (x_lo > x_hi) throw std::domain_error("flow_entry_time: empty interval");
    if (x_lo <= 0.0 && x_hi >= 0.0)
        throw std::domain_error("flow_entry_time: interval straddles the unstable point 0");
    const double eq = std::sqrt(a / b);
    const double basin_eq = x_lo > 0.0 ? eq : -eq;
    if (z != basin_eq)
        throw std::domain_error("flow_entry_time: z is not the equilibrium of the basin");

    auto endpoint_time = [&](double x) {
        if (std::abs(x - z) <= eps) return 0.0;
        const double target = std::abs(x) < std::abs(z) ? z - std::copysign(eps, z)
                                                        : z + std::copysign(eps, z);
        return cubic_flow_hit_time(x, target, a, b);
    };
    const double t = std::max(endpoint_time(x_lo), endpoint_time(x_hi));
    return t * 1.01;
}

double flow_stay_window(double lo, double hi, double target_lo, double target_hi,
                        double a, double b) {
    check_params(a, b);
    if (lo > hi) throw std::domain_error("flow_stay_window: empty interval");
    if (!(target_lo < lo && hi < target_hi))
        throw std::domain_error("flow_stay_window: interval must start strictly inside target");
    const double eq = std::sqrt(a / b);

    // exit time of a single trajectory from (target_lo, target_hi); the
    // path is monotone from x toward its limit, so it exits only if the
    // limit lies strictly beyond a target bound
    auto exit_time = [&](double x) {
        const double limit = x == 0.0 ? 0.0 : std::copysign(eq, x);
        if (limit > target_hi) return cubic_flow_hit_time(x, target_hi, a, b);
        if (limit < target_lo) return cubic_flow_hit_time(x, target_lo, a, b);
        return kInf;
    };
    return std::min(exit_time(lo), exit_time(hi));
}

}  // namespace ergolab
