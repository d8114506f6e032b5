#include "ergolab/coupling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ergolab/exec.hpp"
#include "ergolab/flow.hpp"
#include "ergolab/io.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/stats.hpp"

namespace ergolab {

double lambda_threshold(double a, double lip_sigma) {
    if (lip_sigma < 0.0) throw std::domain_error("lambda_threshold: lip_sigma >= 0 required");
    return a + lip_sigma + lip_sigma * lip_sigma / 2.0;
}

double z_squared_bound(double x, double y, double lambda, double a, double lip_sigma,
                       double t) {
    if (t < 0.0) throw std::domain_error("z_squared_bound: t must be nonnegative");
    const double exponent = 2.0 * a - 2.0 * lambda + 2.0 * lip_sigma + lip_sigma * lip_sigma;
    const double d = x - y;
    return d * d * std::exp(exponent * t);
}

double stable_equilibrium_p(double a, double b, double lambda, double lip_sigma) {
    if (!(lambda > a))
        throw std::domain_error("stable_equilibrium_p: requires lambda > a");
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("stable_equilibrium_p: a, b must be positive");
    const double c =
        (a + lip_sigma + lip_sigma * lip_sigma / 2.0) * std::sqrt(a / (2.0 * b));
    const auto g = [&](double p) { return (a - lambda) * p - b * p * p * p + c; };
    double lo = 0.0;
    double hi = c / (lambda - a) + 1.0;
    // g(0) = c > 0 and g is strictly decreasing, so the bracket holds
    if (!(g(lo) > 0.0) || !(g(hi) < 0.0))
        throw std::logic_error("stable_equilibrium_p: bracket failed");
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ztilde_bound(double x, double y, double lambda, double a, double b,
                    double lip_sigma, double M, double t) {
    if (t < 0.0) throw std::domain_error("ztilde_bound: t must be nonnegative");
    const double threshold = lambda_threshold(a, lip_sigma);
    if (!(lambda > threshold))
        throw std::domain_error("ztilde_bound: lambda must exceed (a+L)+L^2/2 = " +
                                std::to_string(threshold));
    if (!(x >= std::sqrt(a / (2.0 * b)) - 1e-12) || !(y >= std::sqrt(a / b) - 1e-12))
        throw std::domain_error(
            "ztilde_bound: outside the validity regime x >= sqrt(a/(2b)), y >= sqrt(a/b)");
    const double exponent = 2.0 * a - 2.0 * lambda + 2.0 * lip_sigma + lip_sigma * lip_sigma;
    const double first = 2.0 * lambda * std::abs(x - y) *
                         (1.0 - std::exp(exponent * t / 2.0)) / (-exponent);
    const double p = stable_equilibrium_p(a, b, lambda, lip_sigma);
    const double q = std::min(p, std::sqrt(a / b));
    const double second = 2.0 * M * t * std::exp(-b * q * q * t);
    return first + second;
}

double defect_upper_bound(double lip_f, double e_abs_z, double e_abs_ztilde) {
    if (lip_f < 0.0 || e_abs_z < 0.0 || e_abs_ztilde < 0.0)
        throw std::domain_error("defect_upper_bound: inputs must be nonnegative");
    return lip_f * (e_abs_z + e_abs_ztilde);
}

namespace {

// dX~ = aX~ - bX~^3 + lambda (X^x(t) - X~) with X^x in closed form from
// its segment anchor. Adaptive RK4 with step doubling; local error from
// Richardson comparison of one full and two half steps.
class ForcedCubicIntegrator {
public:
    ForcedCubicIntegrator(const PoissonCubicModel& model, double lambda, double tol)
        : model_(model), lambda_(lambda), tol_(tol) {}

    void anchor_forcing(double xx_value, double at_time) {
        xx_anchor_ = xx_value;
        t_anchor_ = at_time;
    }

    double integrate(double w, double t0, double t1) {
        double t = t0;
        double h = std::min(0.1, t1 - t0);
        int rejected_in_a_row = 0;
        while (t < t1) {
            h = std::min(h, t1 - t);
            if (h < 1e-13 * std::max(1.0, std::abs(t1)))
                throw std::runtime_error(step_report(t, h, rejected_in_a_row));
            const double full = rk4_step(t, w, h);
            const double half = rk4_step(t + 0.5 * h, rk4_step(t, w, 0.5 * h), 0.5 * h);
            const double err = std::abs(half - full) / 15.0;
            const double tol_eff = tol_ * (1.0 + std::abs(half));
            if (err <= tol_eff) {
                w = half + (half - full) / 15.0;
                t += h;
                rejected_in_a_row = 0;
            } else {
                ++rejected_in_a_row;
            }
            const double scale = err > 0.0 ? 0.9 * std::pow(tol_eff / err, 0.2) : 5.0;
            h *= std::clamp(scale, 0.2, 5.0);
        }
        return w;
    }

private:
    double forcing(double t) const {
        return exact_cubic_flow(xx_anchor_, t - t_anchor_, model_.a, model_.b);
    }

    double rhs(double t, double w) const {
        return model_.a * w - model_.b * w * w * w + lambda_ * (forcing(t) - w);
    }

    double rk4_step(double t, double w, double h) const {
        const double k1 = rhs(t, w);
        const double k2 = rhs(t + 0.5 * h, w + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, w + 0.5 * h * k2);
        const double k4 = rhs(t + h, w + h * k3);
        return w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    std::string step_report(double t, double h, int rejections) const {
        std::ostringstream msg;
        msg << "feedback coupling ODE: tolerance " << tol_ << " not met at t = " << t
            << " after shrinking to h = " << h << " (" << rejections
            << " consecutive rejections)";
        return msg.str();
    }

    const PoissonCubicModel& model_;
    double lambda_;
    double tol_;
    double xx_anchor_ = 0.0;
    double t_anchor_ = 0.0;
};

std::vector<double> draw_shared_jump_times(std::uint64_t seed, std::uint64_t path,
                                           double horizon) {
    PathRng rng(seed, path);
    std::vector<double> jumps;
    double t = rng.exponential();
    while (t <= horizon) {
        jumps.push_back(t);
        t += rng.exponential();
    }
    return jumps;
}
}  // namespace

CoupledTriplePath simulate_feedback_coupling(const PoissonCubicModel& model, double x,
                                             double y, const CouplingParams& params,
                                             std::span<const double> record_times,
                                             double ode_tol, std::uint64_t master_seed,
                                             std::uint64_t path_index) {
    if (record_times.empty())
        throw std::domain_error("simulate_feedback_coupling: need record times");
    if (!std::is_sorted(record_times.begin(), record_times.end()))
        throw std::domain_error("simulate_feedback_coupling: record times must be sorted");
    if (!(ode_tol > 0.0))
        throw std::domain_error("simulate_feedback_coupling: ode_tol must be positive");

    const double horizon = record_times.back();
    const std::vector<double> jumps = draw_shared_jump_times(master_seed, path_index, horizon);

    CoupledTriplePath out;
    out.times.assign(record_times.begin(), record_times.end());
    out.jump_times = jumps;

    ForcedCubicIntegrator integrator(model, params.lambda, ode_tol);

    // segment state: values at segment_start, with X^x anchored for forcing
    double seg_start = 0.0;
    double xx = x, xt = y, xy = y;
    integrator.anchor_forcing(xx, seg_start);
    std::size_t next_jump = 0;

    auto advance_to = [&](double t) {
        // values at time t within the current inter-jump segment
        const double dt = t - seg_start;
        const double xx_t = exact_cubic_flow(xx, dt, model.a, model.b);
        const double xy_t = exact_cubic_flow(xy, dt, model.a, model.b);
        const double xt_t = dt == 0.0 ? xt : integrator.integrate(xt, seg_start, t);
        return std::array<double, 3>{xx_t, xt_t, xy_t};
    };

    for (double t : record_times) {
        while (next_jump < jumps.size() && jumps[next_jump] <= t) {
            const double tau = jumps[next_jump];
            const auto left = advance_to(tau);
            xx = left[0] + model.sigma(left[0]);
            xt = left[1] + model.sigma(left[1]);
            xy = left[2] + model.sigma(left[2]);
            seg_start = tau;
            integrator.anchor_forcing(xx, seg_start);
            ++next_jump;
        }
        const auto now = advance_to(t);
        out.x_path.push_back(now[0]);
        out.tilde_path.push_back(now[1]);
        out.y_path.push_back(now[2]);
    }
    return out;
}

std::string CouplingDiagnostics::to_csv() const {
    std::ostringstream out;
    out << "t,e_z2,se_z2,bound_z2,e_ztilde,se_ztilde,bound_ztilde\n";
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        out << format_double(t_grid[i]) << ',' << format_double(e_z2[i]) << ','
            << format_double(se_z2[i]) << ',' << format_double(bound_z2[i]) << ','
            << format_double(e_ztilde[i]) << ',' << format_double(se_ztilde[i]) << ','
            << format_double(bound_ztilde[i]) << '\n';
    return out.str();
}

nlohmann::json CouplingDiagnostics::constants_json() const {
    return nlohmann::json{{"schema_version", 1},
                          {"kind", "coupling_constants"},
                          {"lambda", constants.lambda},
                          {"threshold", constants.threshold},
                          {"exponent", constants.exponent},
                          {"p", constants.p},
                          {"q", constants.q},
                          {"regime_ok", constants.regime_ok},
                          {"n_paths", n_paths}};
}

CouplingDiagnostics run_coupling_diagnostics(const PoissonCubicModel& model, double x,
                                             double y, const CouplingParams& params,
                                             const std::vector<double>& t_grid, long n,
                                             std::uint64_t master_seed, double ode_tol,
                                             int threads) {
    if (n < 1) throw std::domain_error("run_coupling_diagnostics: n must be >= 1");
    if (t_grid.empty()) throw std::domain_error("run_coupling_diagnostics: empty t grid");

    CouplingDiagnostics diag;
    diag.t_grid = t_grid;
    diag.n_paths = n;
    diag.constants.lambda = params.lambda;
    diag.constants.threshold = lambda_threshold(model.a, model.lip_sigma);
    diag.constants.exponent = 2.0 * model.a - 2.0 * params.lambda + 2.0 * model.lip_sigma +
                              model.lip_sigma * model.lip_sigma;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    diag.constants.p = params.lambda > model.a
                           ? stable_equilibrium_p(model.a, model.b, params.lambda,
                                                  model.lip_sigma)
                           : nan;
    diag.constants.q = std::isnan(diag.constants.p)
                           ? nan
                           : std::min(diag.constants.p, model.equilibrium());
    diag.constants.regime_ok = params.lambda > diag.constants.threshold &&
                               x >= std::sqrt(model.a / (2.0 * model.b)) - 1e-12 &&
                               y >= model.equilibrium() - 1e-12;

    const std::size_t T = t_grid.size();
    std::vector<double> z2(static_cast<std::size_t>(n) * T);
    std::vector<double> abs_z(z2.size());
    std::vector<double> abs_zt(z2.size());
    parallel_for(static_cast<std::size_t>(n),
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t i = begin; i < end; ++i) {
                         const CoupledTriplePath p = simulate_feedback_coupling(
                             model, x, y, params, t_grid, ode_tol, master_seed, i);
                         for (std::size_t j = 0; j < T; ++j) {
                             const double z = p.x_path[j] - p.tilde_path[j];
                             const double zt = p.tilde_path[j] - p.y_path[j];
                             z2[i * T + j] = z * z;
                             abs_z[i * T + j] = std::abs(z);
                             abs_zt[i * T + j] = std::abs(zt);
                         }
                     }
                 },
                 threads);

    // accumulate in path order so the result is thread-count independent
    for (std::size_t j = 0; j < T; ++j) {
        RunningMoments m_z2, m_abs_z, m_zt;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
            m_z2.add(z2[i * T + j]);
            m_abs_z.add(abs_z[i * T + j]);
            m_zt.add(abs_zt[i * T + j]);
        }
        diag.e_z2.push_back(m_z2.mean());
        diag.se_z2.push_back(m_z2.se());
        diag.e_abs_z.push_back(m_abs_z.mean());
        diag.e_ztilde.push_back(m_zt.mean());
        diag.se_ztilde.push_back(m_zt.se());
        diag.bound_z2.push_back(z_squared_bound(x, y, params.lambda, model.a,
                                                model.lip_sigma, t_grid[j]));
        diag.bound_ztilde.push_back(
            diag.constants.regime_ok
                ? ztilde_bound(x, y, params.lambda, model.a, model.b, model.lip_sigma,
                               model.M, t_grid[j])
                : nan);
    }
    return diag;
}

}  // namespace ergolab
