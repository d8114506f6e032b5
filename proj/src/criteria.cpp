#include "ergolab/criteria.hpp"

#include <algorithm>
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

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_sorted_nonempty(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw std::domain_error(std::string(name) + " grid must be nonempty");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::domain_error(std::string(name) + " grid must be sorted");
}
}  // namespace

double RhoSpec::operator()(double t, double dist, double p) const {
    const double prefactor = distance_prefactor ? std::pow(std::abs(dist), p) : 1.0;
    switch (kind) {
        case Kind::exponential: return scale * prefactor * std::exp(-rate * t);
        case Kind::power:
            if (!(t > 0.0)) throw std::domain_error("power rho needs t > 0");
            return scale * prefactor * std::pow(t, -rate);
    }
    throw std::logic_error("unknown RhoSpec kind");
}

void LyapunovCertificate::validate() const {
    if (!(p > 0.0)) throw std::domain_error("LyapunovCertificate: p must be positive");
    if (!(kappa > 0.0)) throw std::domain_error("LyapunovCertificate: kappa must be positive");
    if (b < 0.0) throw std::domain_error("LyapunovCertificate: b must be nonnegative");
    if (rho.scale < 0.0 || !(rho.rate > 0.0))
        throw std::domain_error("LyapunovCertificate: rho must decay (scale >= 0, rate > 0)");
    double prev = kInf;
    for (double t : {1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) {
        const double v = rho(t, 1.0, p);
        if (v > prev + 1e-15)
            throw std::domain_error("LyapunovCertificate: rho is not nonincreasing");
        prev = v;
    }
}

double moment_bound_constant(double a, double b, double M) {
    if (!(a > 0.0) || !(b > 0.0) || !(M > 0.0))
        throw std::domain_error("moment_bound_constant: a, b, M must be positive");
    return (3.0 * a + 4.0) * (3.0 * a + 4.0) / (4.0 * b) + 3.0 * M * M + 3.0 * a / b +
           a * a * a / b;
}

LyapunovCertificate LyapunovCertificate::poisson_cubic_moment(double a, double b, double M) {
    const double C = moment_bound_constant(a, b, M);
    LyapunovCertificate cert;
    cert.z = std::sqrt(a / b);
    cert.p = 2.0;
    cert.b = C;
    cert.kappa = kInf;
    cert.rho = RhoSpec{RhoSpec::Kind::exponential, C, 1.0, true};
    cert.validate();
    return cert;
}

double chebyshev_lower_bound(const LyapunovCertificate& cert, double r, double t,
                             double dist) {
    if (!(r > 0.0)) throw std::domain_error("chebyshev_lower_bound: r must be positive");
    const double rp = std::pow(r, cert.p);
    return std::max(0.0, 1.0 - cert.rho(t, dist, cert.p) / rp - cert.b / rp);
}

double chain_lower_bound(double p_stay, double p_reach) {
    if (p_stay < 0.0 || p_stay > 1.0 || p_reach < 0.0 || p_reach > 1.0)
        throw std::domain_error("chain_lower_bound: inputs must lie in [0,1]");
    return p_stay * p_reach;
}

double default_burn_in(const std::vector<double>& t_grid) {
    require_sorted_nonempty(t_grid, "t");
    return t_grid[t_grid.size() / 2];
}

namespace {
double resolve_burn_in(const std::vector<double>& t_grid, double t_min) {
    return t_min < 0.0 ? default_burn_in(t_grid) : t_min;
}

// CI for |mean| from a normal approximation; clamped at zero
std::pair<double, double> abs_mean_ci(double est, double se) {
    const double z = 1.959963984540054;
    return {std::max(0.0, est - z * se), est + z * se};
}
}  // namespace

std::string DefectSurface::to_csv() const {
    std::ostringstream out;
    out << "x,t,defect,ci_low,ci_high\n";
    for (std::size_t i = 0; i < x_grid.size(); ++i)
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const auto ci = abs_mean_ci(estimate[i][j], se[i][j]);
            out << format_double(x_grid[i]) << ',' << format_double(t_grid[j]) << ','
                << format_double(estimate[i][j]) << ',' << format_double(ci.first) << ','
                << format_double(ci.second) << '\n';
        }
    return out.str();
}

DefectSurface eventual_continuity_defect(const Process& process, double z,
                                         const TestFunction& f,
                                         const std::vector<double>& x_grid,
                                         const std::vector<double>& t_grid, long n,
                                         std::uint64_t master_seed, double t_min,
                                         double tolerance, int threads) {
    if (x_grid.empty()) throw std::domain_error("eventual_continuity_defect: empty x grid");
    require_sorted_nonempty(t_grid, "t");
    if (n < 2) throw std::domain_error("eventual_continuity_defect: n must be >= 2");

    DefectSurface surface;
    surface.x_grid = x_grid;  // farthest-from-z first, so the trend reads toward z
    std::sort(surface.x_grid.begin(), surface.x_grid.end(),
              [z](double u, double v) { return std::abs(u - z) > std::abs(v - z); });
    surface.t_grid = t_grid;
    surface.t_min = resolve_burn_in(t_grid, t_min);
    const std::size_t nx = surface.x_grid.size(), nt = t_grid.size();
    surface.estimate.assign(nx, std::vector<double>(nt, 0.0));
    surface.se.assign(nx, std::vector<double>(nt, 0.0));

    for (std::size_t j = 0; j < nt; ++j) {
        // one jump clock / noise stream per t cell, shared by every x and
        // by the probe point: common random numbers pair the paths
        const std::uint64_t cell_seed = derive_seed(master_seed, j);
        std::vector<double> f_at_z(static_cast<std::size_t>(n));
        parallel_for(static_cast<std::size_t>(n),
                     [&](std::size_t begin, std::size_t end) {
                         for (std::size_t k = begin; k < end; ++k)
                             f_at_z[k] = f(process.state_at(z, t_grid[j], cell_seed, k));
                     },
                     threads);
        for (std::size_t i = 0; i < nx; ++i) {
            std::vector<double> f_at_x(static_cast<std::size_t>(n));
            parallel_for(static_cast<std::size_t>(n),
                         [&](std::size_t begin, std::size_t end) {
                             for (std::size_t k = begin; k < end; ++k)
                                 f_at_x[k] = f(process.state_at(surface.x_grid[i], t_grid[j],
                                                                cell_seed, k));
                         },
                         threads);
            RunningMoments diff;
            for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
                const double d = f_at_x[k] - f_at_z[k];
                if (!std::isnan(d)) diff.add(d);
            }
            surface.estimate[i][j] = std::abs(diff.mean());
            surface.se[i][j] = diff.se();
        }
    }

    surface.defect.assign(nx, 0.0);
    surface.defect_se.assign(nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        double best = -1.0;
        for (std::size_t j = 0; j < nt; ++j) {
            if (t_grid[j] < surface.t_min) continue;
            if (surface.estimate[i][j] > best) {
                best = surface.estimate[i][j];
                surface.defect[i] = surface.estimate[i][j];
                surface.defect_se[i] = surface.se[i][j];
            }
        }
    }

    CriterionReport& rep = surface.report;
    rep.condition = ConditionId::EC;
    rep.probe_z = z;
    rep.x_grid = surface.x_grid;
    rep.t_grid = t_grid;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
            const auto ci = abs_mean_ci(surface.estimate[i][j], surface.se[i][j]);
            rep.points.push_back(
                {surface.x_grid[i], t_grid[j], surface.estimate[i][j], ci.first, ci.second});
        }
    const std::size_t nearest = nx - 1;
    rep.summary_value = surface.defect[nearest];
    const auto ci = abs_mean_ci(surface.defect[nearest], surface.defect_se[nearest]);
    rep.summary_ci_low = ci.first;
    rep.summary_ci_high = ci.second;
    rep.verdict = verdict_for_defect(ci.first, ci.second, tolerance);
    rep.caveat = std::string(kGridCaveat) +
                 " Summary is the post-burn-in defect at the grid point nearest the probe; "
                 "the x->z limsup of Def-style eventual continuity is approximated by the "
                 "reported trend only.";
    return surface;
}

namespace {
struct TvWithSe {
    double tv;
    double se;
};

// half-L1 distance between binned masses with a delta-method SE
TvWithSe binned_tv_with_se(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const std::vector<double>& edges) {
    const double tv = tv_binned(mu, nu, edges);
    auto masses = [&edges](const EmpiricalMeasure& m) {
        std::vector<double> mass(edges.size() + 1, 0.0);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto it = std::upper_bound(edges.begin(), edges.end(), m.samples()[i]);
            mass[static_cast<std::size_t>(it - edges.begin())] += m.weight(i);
        }
        return mass;
    };
    const auto p = masses(mu);
    const auto q = masses(nu);
    double var = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        var += p[i] * (1.0 - p[i]) / static_cast<double>(mu.size()) +
               q[i] * (1.0 - q[i]) / static_cast<double>(nu.size());
    return {tv, 0.5 * std::sqrt(var)};
}

struct SummaryCell {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// min over per-x candidate cells; the CI is taken from the most
// conservative (lowest ci_low) candidate
SummaryCell conservative_min(const std::vector<SummaryCell>& candidates) {
    SummaryCell out = candidates.front();
    for (const auto& c : candidates) {
        out.value = std::min(out.value, c.value);
        if (c.ci_low < out.ci_low) {
            out.ci_low = c.ci_low;
            out.ci_high = c.ci_high;
        }
    }
    return out;
}
}  // namespace

CriterionReport tv_defect(const Process& process, double z,
                          const std::vector<double>& x_grid,
                          const std::vector<double>& t_grid,
                          const std::vector<double>& bin_edges, long n,
                          std::uint64_t master_seed, double t_min, double tolerance,
                          int threads) {
    if (x_grid.empty()) throw std::domain_error("tv_defect: empty x grid");
    require_sorted_nonempty(t_grid, "t");
    const double burn_in = resolve_burn_in(t_grid, t_min);

    CriterionReport rep;
    rep.condition = ConditionId::TV_EC;
    rep.probe_z = z;
    rep.x_grid = x_grid;
    std::sort(rep.x_grid.begin(), rep.x_grid.end(),
              [z](double u, double v) { return std::abs(u - z) > std::abs(v - z); });
    rep.t_grid = t_grid;

    std::vector<double> defect(rep.x_grid.size(), -1.0);
    std::vector<std::pair<double, double>> defect_ci(rep.x_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const EmpiricalMeasure law_z =
            sample_law(process, z, t_grid[j], n, derive_seed(master_seed, 0, j), threads);
        for (std::size_t i = 0; i < rep.x_grid.size(); ++i) {
            const EmpiricalMeasure law_x =
                sample_law(process, rep.x_grid[i], t_grid[j], n,
                           derive_seed(master_seed, i + 1, j), threads);
            const TvWithSe r = binned_tv_with_se(law_x, law_z, bin_edges);
            const auto ci = abs_mean_ci(r.tv, r.se);
            rep.points.push_back({rep.x_grid[i], t_grid[j], r.tv, ci.first, ci.second});
            if (t_grid[j] >= burn_in && r.tv > defect[i]) {
                defect[i] = r.tv;
                defect_ci[i] = ci;
            }
        }
    }
    const std::size_t nearest = rep.x_grid.size() - 1;
    rep.summary_value = defect[nearest];
    rep.summary_ci_low = defect_ci[nearest].first;
    rep.summary_ci_high = defect_ci[nearest].second;
    rep.verdict = verdict_for_defect(rep.summary_ci_low, rep.summary_ci_high, tolerance);
    rep.caveat = std::string(kGridCaveat) +
                 " Values are binned total variation distances (a consistent lower-bound "
                 "proxy); the sup over ||f||_inf = 1 equals twice the reported TV.";
    return rep;
}

CriterionReport tv_defect(const FiniteChain& chain, int z, const std::vector<int>& x_grid,
                          const std::vector<long>& t_grid, double t_min, double tolerance) {
    if (x_grid.empty() || t_grid.empty())
        throw std::domain_error("tv_defect(chain): empty grid");
    CriterionReport rep;
    rep.condition = ConditionId::TV_EC;
    rep.probe_z = static_cast<double>(z);
    rep.exact = true;
    for (int x : x_grid) rep.x_grid.push_back(static_cast<double>(x));
    for (long t : t_grid) rep.t_grid.push_back(static_cast<double>(t));
    const double burn_in =
        t_min < 0.0 ? rep.t_grid[rep.t_grid.size() / 2] : t_min;

    std::vector<double> defect(x_grid.size(), -1.0);
    for (long t : t_grid) {
        const FiniteMeasure from_z = power_distribution(chain, z, t);
        for (std::size_t i = 0; i < x_grid.size(); ++i) {
            const double tv = tv_finite(power_distribution(chain, x_grid[i], t), from_z);
            rep.points.push_back(
                {static_cast<double>(x_grid[i]), static_cast<double>(t), tv, tv, tv});
            if (static_cast<double>(t) >= burn_in)
                defect[i] = std::max(defect[i], tv);
        }
    }
    // nearest state to z under the chain metric
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < x_grid.size(); ++i)
        if (chain.metric(x_grid[i], z) < chain.metric(x_grid[nearest], z)) nearest = i;
    rep.summary_value = defect[nearest];
    rep.summary_ci_low = rep.summary_value;
    rep.summary_ci_high = rep.summary_value;
    rep.verdict =
        verdict_for_defect(rep.summary_ci_low, rep.summary_ci_high, tolerance);
    rep.caveat =
        "Exact total variation distances from matrix powers; grid maxima over t >= "
        "burn-in stand in for the t->infinity limsup.";
    return rep;
}

CriterionReport estimate_C4(const Process& process, double z, double eps,
                            const std::vector<double>& x_grid,
                            const std::vector<double>& t_grid, long n,
                            std::uint64_t master_seed, double t_min, double confidence,
                            int threads) {
    if (x_grid.empty()) throw std::domain_error("estimate_C4: empty x grid");
    require_sorted_nonempty(t_grid, "t");
    const double burn_in = resolve_burn_in(t_grid, t_min);

    CriterionReport rep;
    rep.condition = ConditionId::C4;
    rep.probe_z = z;
    rep.radius = eps;
    rep.x_grid = x_grid;
    rep.t_grid = t_grid;

    std::vector<SummaryCell> per_x;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        SummaryCell liminf_proxy{kInf, kInf, kInf};
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const EmpiricalMeasure law = sample_law(process, x_grid[i], t_grid[j], n,
                                                    derive_seed(master_seed, i, j), threads);
            const WilsonInterval w = ball_hit_fraction(law, z, eps, confidence);
            rep.points.push_back({x_grid[i], t_grid[j], w.estimate, w.lo, w.hi});
            if (t_grid[j] >= burn_in && w.estimate < liminf_proxy.value)
                liminf_proxy = {w.estimate, w.lo, w.hi};
        }
        per_x.push_back(liminf_proxy);
    }
    const SummaryCell summary = conservative_min(per_x);
    rep.summary_value = summary.value;
    rep.summary_ci_low = summary.ci_low;
    rep.summary_ci_high = summary.ci_high;
    rep.verdict = verdict_for_lower_bound(summary.value, summary.ci_low);
    rep.caveat = std::string(kGridCaveat) +
                 " Summary is the min over x of the post-burn-in min ball mass, with the "
                 "most conservative Wilson interval among the per-x minima.";
    return rep;
}

std::pair<CriterionReport, CriterionReport> estimate_C1_C2(
    const Process& process, double z, double eps, const std::vector<double>& x_grid,
    const std::vector<double>& t_grid, long n, std::uint64_t master_seed, double t_min,
    double confidence, int threads) {
    if (x_grid.empty()) throw std::domain_error("estimate_C1_C2: empty x grid");
    require_sorted_nonempty(t_grid, "t");
    const double burn_in = resolve_burn_in(t_grid, t_min);

    CriterionReport c1;
    c1.condition = ConditionId::C1;
    c1.probe_z = z;
    c1.radius = eps;
    c1.x_grid = x_grid;
    c1.t_grid = t_grid;
    std::vector<SummaryCell> per_x;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        SummaryCell limsup_proxy{-kInf, -kInf, -kInf};
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const EmpiricalMeasure law =
                sample_cesaro_law(process, x_grid[i], t_grid[j], n,
                                  derive_seed(master_seed, i, j), threads);
            const WilsonInterval w = ball_hit_fraction(law, z, eps, confidence);
            c1.points.push_back({x_grid[i], t_grid[j], w.estimate, w.lo, w.hi});
            if (t_grid[j] >= burn_in && w.estimate > limsup_proxy.value)
                limsup_proxy = {w.estimate, w.lo, w.hi};
        }
        per_x.push_back(limsup_proxy);
    }
    const SummaryCell s1 = conservative_min(per_x);
    c1.summary_value = s1.value;
    c1.summary_ci_low = s1.ci_low;
    c1.summary_ci_high = s1.ci_high;
    c1.verdict = verdict_for_lower_bound(s1.value, s1.ci_low);
    c1.caveat = std::string(kGridCaveat) +
                " Cesaro laws sampled at a uniform time per path; summary is the min over "
                "x of the post-burn-in max ball mass.";

    CriterionReport c2;
    c2.condition = ConditionId::C2;
    c2.probe_z = z;
    c2.radius = eps;
    c2.x_grid = {z};
    c2.t_grid = t_grid;
    SummaryCell liminf_proxy{kInf, kInf, kInf};
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const EmpiricalMeasure law = sample_law(process, z, t_grid[j], n,
                                                derive_seed(master_seed, 0xC2, j), threads);
        const WilsonInterval w = ball_hit_fraction(law, z, eps, confidence);
        c2.points.push_back({z, t_grid[j], w.estimate, w.lo, w.hi});
        if (t_grid[j] >= burn_in && w.estimate < liminf_proxy.value)
            liminf_proxy = {w.estimate, w.lo, w.hi};
    }
    c2.summary_value = liminf_proxy.value;
    c2.summary_ci_low = liminf_proxy.ci_low;
    c2.summary_ci_high = liminf_proxy.ci_high;
    c2.verdict = verdict_for_lower_bound(liminf_proxy.value, liminf_proxy.ci_low);
    c2.caveat = std::string(kGridCaveat) +
                " Summary is the post-burn-in min ball mass of the law started at the probe.";
    return {std::move(c1), std::move(c2)};
}

double ReachabilitySchedule::case1(double t) const {
    if (t < T1) throw std::domain_error("case1 bound is valid for t >= T1");
    return std::exp(-t);
}

double ReachabilitySchedule::case2(double t) const {
    if (t < T1 + t_delta)
        throw std::domain_error("case2 bound is valid for t >= T1 + t_delta");
    return std::exp(-t) * (1.0 - std::exp(-t_delta));
}

double ReachabilitySchedule::case3(double t) const {
    double ladder_sum = 0.0;
    for (double ti : ladder) ladder_sum += ti;
    const double validity = T1 + T2 + (ladder.empty() ? 0.0 : ladder.front()) + ladder_sum;
    if (t < validity)
        throw std::domain_error("case3 bound is valid for t >= T1 + T2 + 2t_1 + ... + t_{n-1}");
    double value = std::exp(-T2) - std::exp(-T2 - (ladder.empty() ? 0.0 : ladder.front()));
    for (double ti : ladder) value *= 1.0 - std::exp(-ti);
    value *= std::exp(-(t + T1 + T2 + (ladder.empty() ? 0.0 : ladder.front()) + ladder_sum));
    return value;
}

nlohmann::json ReachabilitySchedule::to_json() const {
    return nlohmann::json{{"schema_version", 1},
                          {"kind", "reachability_schedule"},
                          {"a", a},
                          {"b", b},
                          {"m", m},
                          {"M", M},
                          {"delta_tilde", delta_tilde},
                          {"eps", eps},
                          {"n", n},
                          {"delta0", delta0},
                          {"r_request", r_request},
                          {"r", r},
                          {"r_binding", r_binding},
                          {"r0", r0},
                          {"t_delta", t_delta},
                          {"T1", T1},
                          {"T2", T2},
                          {"ladder", ladder},
                          {"combined_T", combined_T},
                          {"case1_bound", case1_bound},
                          {"case2_bound", case2_bound},
                          {"case3_bound", case3_bound},
                          {"combined_lower_bound", combined_lower_bound}};
}

ReachabilitySchedule reachability_schedule(double a, double b, double m, double M,
                                           double delta_tilde, double eps,
                                           double r_request) {
    if (!(a > 0.0) || !(b > 0.0) || !(m > 0.0) || !(M > m))
        throw std::domain_error("reachability_schedule: need a,b,m > 0 and M > m");
    if (!(eps > 0.0)) throw std::domain_error("reachability_schedule: eps must be positive");
    const double z = std::sqrt(a / b);
    const double delta_cap = std::min({m / 3.0, std::abs(z - m), z});
    if (!(delta_tilde > 0.0 && delta_tilde < delta_cap)) {
        std::ostringstream msg;
        msg << "reachability_schedule: delta_tilde must satisfy 0 < delta_tilde < "
            << "min{m/3, |sqrt(a/b)-m|, sqrt(a/b)} = " << delta_cap;
        throw std::domain_error(msg.str());
    }

    ReachabilitySchedule s;
    s.a = a;
    s.b = b;
    s.m = m;
    s.M = M;
    s.delta_tilde = delta_tilde;
    s.eps = eps;
    s.r_request = r_request;
    s.n = static_cast<int>(std::floor(std::sqrt(4.0 * a / b) / m)) + 1;
    s.delta0 = 0.5 * (z - delta_tilde) / static_cast<double>(s.n + 1);

    const double C = moment_bound_constant(a, b, M);
    s.r0 = std::sqrt(2.0 * C);

    struct Candidate {
        double value;
        const char* name;
    };
    const Candidate candidates[] = {
        {r_request, "requested"},
        {M + 2.0 * delta_tilde, "M + 2*delta_tilde"},
        {-z + s.n * M + s.n * s.delta0, "-sqrt(a/b) + n*M + n*delta0"},
        {s.r0, "r0"},
    };
    s.r = -kInf;
    for (const auto& c : candidates)
        if (c.value > s.r) {
            s.r = c.value;
            s.r_binding = c.name;
        }

    s.T1 = flow_entry_time(delta_tilde, z + s.r, z, eps, a, b);

    // window during which the flow image of [-delta~, delta~] stays inside
    // (-2 delta~, 2 delta~); infinite when 2 delta~ reaches past the
    // equilibrium, capped at 1 (any finite choice keeps the bound valid)
    const double stay0 =
        flow_stay_window(-delta_tilde, delta_tilde, -2.0 * delta_tilde, 2.0 * delta_tilde,
                         a, b);
    s.t_delta = std::min(0.99 * stay0, 1.0);

    s.T2 = flow_entry_time(z - s.r, -delta_tilde, -z, s.delta0, a, b);

    for (int i = 1; i <= s.n - 1; ++i) {
        const double k = static_cast<double>(i);
        const double lo = -z + k * m - k * s.delta0;
        const double hi = -z + k * M + k * s.delta0;
        const double window =
            flow_stay_window(lo, hi, lo - s.delta0, hi + s.delta0, a, b);
        s.ladder.push_back(std::min(0.99 * window, 1.0));
    }

    s.combined_T = s.T1 + s.t_delta + s.T2;
    if (!s.ladder.empty()) s.combined_T += s.ladder.front();
    for (double ti : s.ladder) s.combined_T += ti;

    s.case1_bound = s.case1(s.combined_T);
    s.case2_bound = s.case2(s.combined_T);
    s.case3_bound = s.case3(s.combined_T);
    s.combined_lower_bound = std::min({s.case1_bound, s.case2_bound, s.case3_bound});
    return s;
}

std::string MomentDecayReport::to_csv() const {
    std::ostringstream out;
    out << "t,e_sq,se_sq,bound\n";
    for (std::size_t j = 0; j < t_grid.size(); ++j)
        out << format_double(t_grid[j]) << ',' << format_double(e_sq[j]) << ','
            << format_double(se_sq[j]) << ',' << format_double(bound[j]) << '\n';
    return out.str();
}

nlohmann::json MomentDecayReport::to_json() const {
    return nlohmann::json{{"schema_version", 1},
                          {"kind", "moment_decay"},
                          {"z", z},
                          {"x", x},
                          {"t_grid", t_grid},
                          {"e_sq", e_sq},
                          {"se_sq", se_sq},
                          {"bound", bound},
                          {"C", C},
                          {"c_fit", c_fit},
                          {"gamma_fit", gamma_fit},
                          {"dominated", dominated},
                          {"doeblin_radius", doeblin_radius},
                          {"doeblin_hit",
                           {{"estimate", doeblin_hit.estimate},
                            {"ci_low", doeblin_hit.lo},
                            {"ci_high", doeblin_hit.hi}}}};
}

MomentDecayReport moment_decay_fit(const PoissonCubicModel& model, double z, double x,
                                   const std::vector<double>& t_grid, long n,
                                   std::uint64_t master_seed, int threads) {
    require_sorted_nonempty(t_grid, "t");
    if (!(t_grid.front() > 0.0) || t_grid.back() < 10.0 * t_grid.front())
        throw std::domain_error("moment_decay_fit: t grid must span at least one decade");
    if (std::abs(z - model.equilibrium()) > 1e-9)
        throw std::domain_error(
            "moment_decay_fit: the closed-form envelope holds at z = sqrt(a/b) only");

    MomentDecayReport rep;
    rep.z = z;
    rep.x = x;
    rep.t_grid = t_grid;
    rep.C = moment_bound_constant(model.a, model.b, model.M);
    const double v0 = (x - z) * (x - z);

    const PoissonCubicProcess process(model);
    rep.dominated = true;
    EmpiricalMeasure last_law({0.0});
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const EmpiricalMeasure law =
            sample_law(process, x, t_grid[j], n, derive_seed(master_seed, j), threads);
        RunningMoments sq;
        for (double s : law.samples()) sq.add((s - z) * (s - z));
        rep.e_sq.push_back(sq.mean());
        rep.se_sq.push_back(sq.se());
        rep.bound.push_back(v0 * std::exp(-t_grid[j]) + rep.C);
        if (sq.mean() > rep.bound.back() + 3.0 * sq.se()) rep.dominated = false;
        if (j + 1 == t_grid.size()) last_law = law;
    }

    // least-squares fit of E(t) ~ c (v0 e^{-g t} + 1) over g by golden
    // section; c is linear given g
    auto sse_for = [&](double g) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const double basis = v0 * std::exp(-g * t_grid[j]) + 1.0;
            num += rep.e_sq[j] * basis;
            den += basis * basis;
        }
        const double c = den > 0.0 ? num / den : 0.0;
        double sse = 0.0;
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const double r = rep.e_sq[j] - c * (v0 * std::exp(-g * t_grid[j]) + 1.0);
            sse += r * r;
        }
        return std::pair<double, double>(sse, c);
    };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 1e-3, hi = 10.0;
    double g1 = hi - phi * (hi - lo), g2 = lo + phi * (hi - lo);
    double f1 = sse_for(g1).first, f2 = sse_for(g2).first;
    for (int iter = 0; iter < 200; ++iter) {
        if (f1 < f2) {
            hi = g2;
            g2 = g1;
            f2 = f1;
            g1 = hi - phi * (hi - lo);
            f1 = sse_for(g1).first;
        } else {
            lo = g1;
            g1 = g2;
            f1 = f2;
            g2 = lo + phi * (hi - lo);
            f2 = sse_for(g2).first;
        }
    }
    rep.gamma_fit = 0.5 * (lo + hi);
    rep.c_fit = sse_for(rep.gamma_fit).second;

    rep.doeblin_radius = 2.0 * std::sqrt(rep.C);
    rep.doeblin_hit = ball_hit_fraction(last_law, z, rep.doeblin_radius);
    return rep;
}

}  // namespace ergolab
