#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ergolab/models.hpp"

namespace ergolab {

// Feedback gain of the auxiliary coupled process; admissible for the decay
// bounds when lambda > (a + L_sigma) + L_sigma^2 / 2.
struct CouplingParams {
    double lambda = 0.0;
};

// (a + L_sigma) + L_sigma^2 / 2
double lambda_threshold(double a, double lip_sigma);

// |x-y|^2 * exp((2a - 2*lambda + 2L + L^2) t): decay of E|Z_t|^2 for the
// coupled pair. Vacuous (exponent >= 0) when lambda is below the threshold.
double z_squared_bound(double x, double y, double lambda, double a, double lip_sigma,
                       double t);

// The unique real root p > 0 of (a - lambda) p - b p^3 + c = 0 with
// c = (a + L + L^2/2) sqrt(a/(2b)); the cubic is strictly decreasing for
// lambda > a, so bisection brackets [0, c/(lambda-a) + 1].
double stable_equilibrium_p(double a, double b, double lambda, double lip_sigma);

// Decay bound for E|Z~_t| in the validity regime x >= sqrt(a/(2b)),
// y >= sqrt(a/b), with q = min(p, sqrt(a/b)):
//   2 lambda |x-y| (1 - e^{(2a-2lambda+2L+L^2) t / 2}) / (2lambda-2a-2L-L^2)
//   + 2 M t e^{-b q^2 t}.
// The bound is tested exactly as displayed; arguments outside the regime
// are a domain error.
double ztilde_bound(double x, double y, double lambda, double a, double b,
                    double lip_sigma, double M, double t);

// L_f (E|Z| + E|Z~|): bound on |P_t f(x) - P_t f(y)| under the coupling.
double defect_upper_bound(double lip_f, double e_abs_z, double e_abs_ztilde);

// Three processes sharing one Poisson clock: the x- and y-started
// solutions plus the feedback-coupled auxiliary process started at y.
struct CoupledTriplePath {
    std::vector<double> times;
    std::vector<double> x_path;       // X^x
    std::vector<double> tilde_path;   // X~^y (coupled)
    std::vector<double> y_path;       // X^y
    std::vector<double> jump_times;
};

// X^x and X^y follow the exact cubic flow between jumps; the auxiliary
// process integrates dX~ = aX~ - bX~^3 + lambda (X^x(t) - X~) by adaptive
// step-doubled RK4 with per-step tolerance ode_tol (X^x substituted in
// closed form). All three jump at the same times, each by sigma of its own
// left limit.
CoupledTriplePath simulate_feedback_coupling(const PoissonCubicModel& model, double x,
                                             double y, const CouplingParams& params,
                                             std::span<const double> record_times,
                                             double ode_tol, std::uint64_t master_seed,
                                             std::uint64_t path_index);

struct CouplingDiagnostics {
    std::vector<double> t_grid;
    std::vector<double> e_z2, se_z2, bound_z2;
    std::vector<double> e_abs_z;  // for the Jensen check and defect bounds
    std::vector<double> e_ztilde, se_ztilde, bound_ztilde;
    long n_paths = 0;

    struct Constants {
        double lambda = 0.0;
        double threshold = 0.0;    // admissibility threshold for lambda
        double exponent = 0.0;     // 2a - 2lambda + 2L + L^2
        double p = 0.0;            // stable equilibrium of the damped cubic
        double q = 0.0;            // p ^ sqrt(a/b)
        bool regime_ok = false;    // x, y inside the ztilde validity regime
    } constants;

    std::string to_csv() const;  // t,e_z2,se_z2,bound_z2,e_ztilde,se_ztilde,bound_ztilde
    nlohmann::json constants_json() const;
};

// Empirical moments of the coupled construction on t_grid with the
// closed-form bounds evaluated alongside. Uses the same coupled paths for
// the moments and the bound comparison.
CouplingDiagnostics run_coupling_diagnostics(const PoissonCubicModel& model, double x,
                                             double y, const CouplingParams& params,
                                             const std::vector<double>& t_grid, long n,
                                             std::uint64_t master_seed,
                                             double ode_tol = 1e-9, int threads = 0);

}  // namespace ergolab
