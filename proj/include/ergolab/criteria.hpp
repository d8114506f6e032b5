#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ergolab/chain.hpp"
#include "ergolab/criterion_report.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/simulate.hpp"

namespace ergolab {

// Nonincreasing envelope rho(t) -> 0; optionally scaled by the p-th power
// of the starting distance so one spec covers rho_x(t) = c |x-z|^p e^{-g t}.
struct RhoSpec {
    enum class Kind { exponential, power };
    Kind kind = Kind::exponential;
    double scale = 1.0;  // c
    double rate = 1.0;   // g in e^{-g t}, or beta in t^{-beta}
    bool distance_prefactor = false;

    double operator()(double t, double dist, double p) const;
};

// Moment certificate E d(X_t^x, z)^p <= rho_x(t) + b 1_{B(z,kappa)}; turns
// into transition-probability lower bounds by Chebyshev.
struct LyapunovCertificate {
    double z = 0.0;
    double p = 1.0;
    double b = 0.0;
    double kappa = 1.0;
    RhoSpec rho;

    void validate() const;

    // The jump SDE instance: p = 2, rho_x(t) = C |x-z|^2 e^{-t}, b = C with
    // C = (3a+4)^2/(4b) + 3M^2 + 3a/b + a^3/b and z = sqrt(a/b).
    static LyapunovCertificate poisson_cubic_moment(double a, double b, double M);
};

// (3a+4)^2/(4b) + 3M^2 + 3a/b + a^3/b: the Gronwall constant of the
// quadratic moment bound for the jump SDE.
double moment_bound_constant(double a, double b, double M);

// max(0, 1 - rho(t)/r^p - b/r^p): certified lower bound on P_t(x, B(z,r)).
// dist = d(x, z) feeds the optional distance prefactor of rho.
double chebyshev_lower_bound(const LyapunovCertificate& cert, double r, double t,
                             double dist = 0.0);

// Composition lower bound: liminf P_{t+T}(x, B(z,eps)) >= p_stay * p_reach.
double chain_lower_bound(double p_stay, double p_reach);

// |Ef(X_t^x) - Ef(X_t^z)| on an (x,t) grid with common random numbers
// (shared jump clock / noise for each path index), plus the per-x defect
// max over the post-burn-in grid.
struct DefectSurface {
    std::vector<double> x_grid, t_grid;
    double t_min = 0.0;  // burn-in: cells with t < t_min are excluded from defects
    std::vector<std::vector<double>> estimate;  // [x][t]
    std::vector<std::vector<double>> se;        // [x][t]
    std::vector<double> defect;                 // per x: max over t >= t_min
    std::vector<double> defect_se;              // se at the argmax cell
    CriterionReport report;

    std::string to_csv() const;  // columns: x,t,defect,ci_low,ci_high
};

// Burn-in convention used when the caller does not pin t_min: the second
// half of the t grid.
double default_burn_in(const std::vector<double>& t_grid);

DefectSurface eventual_continuity_defect(const Process& process, double z,
                                         const TestFunction& f,
                                         const std::vector<double>& x_grid,
                                         const std::vector<double>& t_grid, long n,
                                         std::uint64_t master_seed, double t_min = -1.0,
                                         double tolerance = 0.1, int threads = 0);

// Total-variation defect: binned TV between sampled laws of x and z per
// grid cell. Reported values are TV distances in [0,1]; the Def-2.2
// supremum over ||f||=1 equals twice the reported value (stated in the
// caveat).
CriterionReport tv_defect(const Process& process, double z,
                          const std::vector<double>& x_grid,
                          const std::vector<double>& t_grid,
                          const std::vector<double>& bin_edges, long n,
                          std::uint64_t master_seed, double t_min = -1.0,
                          double tolerance = 0.1, int threads = 0);

// Exact chain variant: TV(P^t(x,.), P^t(z,.)) from matrix powers.
CriterionReport tv_defect(const FiniteChain& chain, int z, const std::vector<int>& x_grid,
                          const std::vector<long>& t_grid, double t_min = -1.0,
                          double tolerance = 0.1);

CriterionReport estimate_C4(const Process& process, double z, double eps,
                            const std::vector<double>& x_grid,
                            const std::vector<double>& t_grid, long n,
                            std::uint64_t master_seed, double t_min = -1.0,
                            double confidence = 0.95, int threads = 0);

// C1 from Cesaro laws (max over t >= t_min per x, min over x), C2 from the
// law started at the probe point (min over t >= t_min).
std::pair<CriterionReport, CriterionReport> estimate_C1_C2(
    const Process& process, double z, double eps, const std::vector<double>& x_grid,
    const std::vector<double>& t_grid, long n, std::uint64_t master_seed,
    double t_min = -1.0, double confidence = 0.95, int threads = 0);

// Explicit lower-bound schedule for reaching B(sqrt(a/b), eps) from the
// interval [sqrt(a/b)-r, sqrt(a/b)+r], assembled from the deterministic
// flow and the exponential jump clock.
struct ReachabilitySchedule {
    double a = 0.0, b = 0.0, m = 0.0, M = 0.0;
    double delta_tilde = 0.0;
    double eps = 0.0;
    int n = 0;            // floor(sqrt(4a/b)/m) + 1 jump rungs
    double delta0 = 0.0;  // rung tolerance, < (sqrt(a/b)-delta_tilde)/(n+1)
    double r_request = 0.0;
    double r = 0.0;       // finalized radius
    std::string r_binding;  // which constraint fixed r
    double r0 = 0.0;        // Chebyshev radius with liminf bound >= 1/2
    double t_delta = 0.0;   // jump window near the unstable point
    double T1 = 0.0;        // entry time for the positive-side interval
    double T2 = 0.0;        // entry time into the delta0-collar of -sqrt(a/b)
    std::vector<double> ladder;  // stay windows t_1 .. t_{n-1}
    double combined_T = 0.0;     // T1 + t_delta + T2 + 2 t_1 + t_2 + ... + t_{n-1}
    double case1_bound = 0.0, case2_bound = 0.0, case3_bound = 0.0;
    double combined_lower_bound = 0.0;  // min of the three cases at combined_T

    double case1(double t) const;  // e^{-t}, valid t >= T1
    double case2(double t) const;  // e^{-t} (1 - e^{-t_delta}), valid t >= T1 + t_delta
    // (e^{-T2} - e^{-T2-t_1}) prod_{i=1..n-1} (1-e^{-t_i}) e^{-(t+T1+T2+2t_1+t_2+...+t_{n-1})}
    double case3(double t) const;

    nlohmann::json to_json() const;
};

ReachabilitySchedule reachability_schedule(double a, double b, double m, double M,
                                           double delta_tilde, double eps,
                                           double r_request);

struct MomentDecayReport {
    double z = 0.0, x = 0.0;
    std::vector<double> t_grid;
    std::vector<double> e_sq, se_sq;   // empirical E|X_t - z|^2 and its SE
    std::vector<double> bound;         // |x-z|^2 e^{-t} + C
    double C = 0.0;
    double c_fit = 0.0, gamma_fit = 0.0;  // least-squares fit of C' V0 e^{-g t} + C'
    bool dominated = false;               // empirical <= bound + 3 SE at every t
    // ball fraction at the largest grid time for the radius 2 sqrt(C)
    // (the radius at which the Chebyshev tail bound reaches 3/4)
    double doeblin_radius = 0.0;
    WilsonInterval doeblin_hit{0.0, 0.0, 0.0};

    std::string to_csv() const;  // columns: t,e_sq,se_sq,bound
    nlohmann::json to_json() const;
};

// Empirical quadratic moment decay toward z = sqrt(a/b) checked against
// the closed-form envelope; requires z to be the model equilibrium.
MomentDecayReport moment_decay_fit(const PoissonCubicModel& model, double z, double x,
                                   const std::vector<double>& t_grid, long n,
                                   std::uint64_t master_seed, int threads = 0);

}  // namespace ergolab
