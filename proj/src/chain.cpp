#include "ergolab/chain.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ergolab {

namespace {
constexpr double kRowSumTolerance = 1e-12;
constexpr double kSolveResidual = 1e-10;

std::vector<std::vector<bool>> reachability(const Eigen::MatrixXd& P) {
    const int n = static_cast<int>(P.rows());
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
        reach[i][i] = true;
        for (int j = 0; j < n; ++j)
            if (P(i, j) > 0.0) reach[i][j] = true;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach[i][k])
                for (int j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    return reach;
}

// communicating classes that no edge leaves
std::vector<std::vector<int>> find_recurrent_classes(const Eigen::MatrixXd& P) {
    const int n = static_cast<int>(P.rows());
    const auto reach = reachability(P);
    std::vector<bool> assigned(n, false);
    std::vector<std::vector<int>> classes;
    for (int i = 0; i < n; ++i) {
        if (assigned[i]) continue;
        std::vector<int> cls;
        for (int j = 0; j < n; ++j)
            if (reach[i][j] && reach[j][i]) cls.push_back(j);
        bool closed = true;
        for (int u : cls)
            for (int v = 0; v < n; ++v)
                if (P(u, v) > 0.0 && !(reach[v][u] && reach[u][v])) closed = false;
        for (int u : cls) assigned[u] = true;
        if (closed) classes.push_back(std::move(cls));
    }
    return classes;
}

int class_period(const Eigen::MatrixXd& P, const std::vector<int>& cls) {
    const int n = static_cast<int>(P.rows());
    std::vector<int> level(n, -1);
    std::vector<bool> in_class(n, false);
    for (int s : cls) in_class[s] = true;
    std::vector<int> queue{cls.front()};
    level[cls.front()] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int u = queue[q];
        for (int v = 0; v < n; ++v) {
            if (P(u, v) > 0.0 && in_class[v] && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    int g = 0;
    for (int u : cls)
        for (int v = 0; v < n; ++v)
            if (P(u, v) > 0.0 && in_class[v])
                g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    return g == 0 ? 1 : g;
}

FiniteMeasure row_to_measure(const Eigen::RowVectorXd& row) {
    std::vector<double> p(row.data(), row.data() + row.size());
    return FiniteMeasure(std::move(p));
}

Eigen::RowVectorXd propagate(const Eigen::RowVectorXd& mu, const Eigen::MatrixXd& P,
                             long steps) {
    Eigen::RowVectorXd v = mu;
    for (long s = 0; s < steps; ++s) v = v * P;
    return v;
}

// stationary vector of the chain restricted to one closed class
Eigen::VectorXd class_stationary(const Eigen::MatrixXd& P, const std::vector<int>& cls) {
    const int m = static_cast<int>(cls.size());
    Eigen::MatrixXd sub(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sub(i, j) = P(cls[i], cls[j]);
    // pi^T sub = pi^T with sum(pi) = 1: replace one equation by normalization
    Eigen::MatrixXd A = sub.transpose() - Eigen::MatrixXd::Identity(m, m);
    A.row(m - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(m - 1) = 1.0;
    Eigen::VectorXd pi = A.fullPivLu().solve(b);
    const double residual = (sub.transpose() * pi - pi).cwiseAbs().maxCoeff();
    if (residual > kSolveResidual)
        throw std::runtime_error("invariant_measure: solver residual " +
                                 std::to_string(residual));
    return pi;
}

// absorption probabilities a(x, class) and the limit rows
// L(x,.) = sum_c a(x,c) pi_c, valid as the Cesaro limit always and as the
// pointwise limit when every recurrent class is aperiodic
Eigen::MatrixXd limit_rows(const FiniteChain& chain) {
    const Eigen::MatrixXd& P = chain.kernel();
    const int n = chain.n_states();
    const auto& classes = chain.recurrent_classes();
    std::vector<int> class_of(n, -1);
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (int s : classes[c]) class_of[s] = static_cast<int>(c);
    std::vector<int> transient;
    for (int s = 0; s < n; ++s)
        if (class_of[s] < 0) transient.push_back(s);

    Eigen::MatrixXd absorb = Eigen::MatrixXd::Zero(n, static_cast<int>(classes.size()));
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (int s : classes[c]) absorb(s, static_cast<int>(c)) = 1.0;
    if (!transient.empty()) {
        const int m = static_cast<int>(transient.size());
        Eigen::MatrixXd Q(m, m);
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, static_cast<int>(classes.size()));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) Q(i, j) = P(transient[i], transient[j]);
            for (int j = 0; j < n; ++j)
                if (class_of[j] >= 0) B(i, class_of[j]) += P(transient[i], j);
        }
        const Eigen::MatrixXd H =
            (Eigen::MatrixXd::Identity(m, m) - Q).fullPivLu().solve(B);
        for (int i = 0; i < m; ++i) absorb.row(transient[i]) = H.row(i);
    }

    Eigen::MatrixXd limits = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const Eigen::VectorXd pi = class_stationary(P, classes[c]);
        for (int x = 0; x < n; ++x) {
            const double a = absorb(x, static_cast<int>(c));
            if (a == 0.0) continue;
            for (std::size_t i = 0; i < classes[c].size(); ++i)
                limits(x, classes[c][i]) += a * pi(static_cast<int>(i));
        }
    }
    return limits;
}

double ball_mass(const Eigen::RowVectorXd& row, const std::vector<int>& ball) {
    double m = 0.0;
    for (int s : ball) m += row(s);
    return m;
}
}  // namespace

FiniteChain::FiniteChain(Eigen::MatrixXd kernel, std::vector<std::string> labels,
                         std::optional<Eigen::MatrixXd> metric)
    : kernel_(std::move(kernel)), labels_(std::move(labels)), metric_(std::move(metric)) {
    const int n = static_cast<int>(kernel_.rows());
    if (n == 0 || kernel_.cols() != n)
        throw std::domain_error("FiniteChain: kernel must be square and nonempty");
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double p = kernel_(i, j);
            if (p < -kRowSumTolerance || p > 1.0 + kRowSumTolerance)
                throw std::domain_error("FiniteChain: entry outside [0,1]");
            row_sum += p;
        }
        if (std::abs(row_sum - 1.0) > 1e-9)
            throw std::domain_error("FiniteChain: row " + std::to_string(i) +
                                    " sums to " + std::to_string(row_sum));
    }
    if (!labels_.empty() && static_cast<int>(labels_.size()) != n)
        throw std::domain_error("FiniteChain: label count mismatch");
    if (metric_) {
        if (metric_->rows() != n || metric_->cols() != n)
            throw std::domain_error("FiniteChain: metric dimension mismatch");
        for (int i = 0; i < n; ++i) {
            if (std::abs((*metric_)(i, i)) > 0.0)
                throw std::domain_error("FiniteChain: metric diagonal must be zero");
            for (int j = 0; j < n; ++j) {
                if ((*metric_)(i, j) < 0.0 ||
                    std::abs((*metric_)(i, j) - (*metric_)(j, i)) > 1e-12)
                    throw std::domain_error("FiniteChain: metric must be symmetric nonnegative");
                for (int k = 0; k < n; ++k)
                    if ((*metric_)(i, j) > (*metric_)(i, k) + (*metric_)(k, j) + 1e-12)
                        throw std::domain_error("FiniteChain: metric violates triangle inequality");
            }
        }
    }
    recurrent_ = find_recurrent_classes(kernel_);
    period_ = 1;
    for (const auto& cls : recurrent_) period_ = std::lcm(period_, class_period(kernel_, cls));
}

double FiniteChain::metric(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_states() || j >= n_states())
        throw std::domain_error("FiniteChain::metric: state out of range");
    if (metric_) return (*metric_)(i, j);
    return i == j ? 0.0 : 1.0;
}

std::vector<int> FiniteChain::ball(int z, double eps) const {
    std::vector<int> b;
    for (int s = 0; s < n_states(); ++s)
        if (metric(z, s) < eps) b.push_back(s);
    return b;
}

FiniteChain FiniteChain::from_json(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    const auto rows = j.at("rows");
    if (static_cast<int>(rows.size()) != n)
        throw std::domain_error("chain json: row count != n");
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw std::domain_error("chain json: row length != n");
        for (int k = 0; k < n; ++k) P(i, k) = rows[i][k].get<double>();
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
    std::optional<Eigen::MatrixXd> metric;
    if (j.contains("metric")) {
        Eigen::MatrixXd D(n, n);
        const auto m = j.at("metric");
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) D(i, k) = m[i][k].get<double>();
        metric = std::move(D);
    }
    return FiniteChain(std::move(P), std::move(labels), std::move(metric));
}

FiniteChain FiniteChain::from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::domain_error("chain csv: empty");
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw std::domain_error("chain csv: matrix must be square");
        for (int j = 0; j < n; ++j) P(i, j) = rows[i][j];
    }
    return FiniteChain(std::move(P));
}

FiniteMeasure power_distribution(const FiniteChain& chain, int x, long t) {
    if (x < 0 || x >= chain.n_states())
        throw std::domain_error("power_distribution: state out of range");
    if (t < 0) throw std::domain_error("power_distribution: t must be nonnegative");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(chain.n_states());
    v(x) = 1.0;
    return row_to_measure(propagate(v, chain.kernel(), t));
}

InvariantMeasureResult invariant_measure(const FiniteChain& chain) {
    InvariantMeasureResult result;
    result.recurrent_classes = chain.recurrent_classes();
    if (!chain.single_recurrent_class()) return result;
    const auto& cls = chain.recurrent_classes().front();
    const Eigen::VectorXd pi = class_stationary(chain.kernel(), cls);
    std::vector<double> full(static_cast<std::size_t>(chain.n_states()), 0.0);
    for (std::size_t i = 0; i < cls.size(); ++i)
        full[static_cast<std::size_t>(cls[i])] = pi(static_cast<int>(i));
    result.measure = FiniteMeasure(std::move(full));
    return result;
}

FiniteMeasure cesaro_distribution(const FiniteChain& chain, int x, long t) {
    if (t < 1) throw std::domain_error("cesaro_distribution: t must be >= 1");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(chain.n_states());
    v(x) = 1.0;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(chain.n_states());
    for (long s = 1; s <= t; ++s) {
        v = v * chain.kernel();
        acc += v;
    }
    acc /= static_cast<double>(t);
    return row_to_measure(acc);
}

double doeblin_alpha(const FiniteChain& chain, const std::vector<int>& A, long t1) {
    if (A.empty()) throw std::domain_error("doeblin_alpha: A must be nonempty");
    if (t1 < 1) throw std::domain_error("doeblin_alpha: t1 must be >= 1");
    for (int s : A)
        if (s < 0 || s >= chain.n_states())
            throw std::domain_error("doeblin_alpha: state out of range");
    double alpha = 1.0;
    for (int x = 0; x < chain.n_states(); ++x) {
        Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(chain.n_states());
        v(x) = 1.0;
        v = propagate(v, chain.kernel(), t1);
        alpha = std::min(alpha, ball_mass(v, A));
    }
    return alpha;
}

SplittingTrace alpha_splitting_decomposition(const FiniteChain& chain, int x1, int x2,
                                             const std::vector<int>& A, long t1, int k) {
    if (k < 1) throw std::domain_error("alpha_splitting_decomposition: k must be >= 1");
    const double alpha = doeblin_alpha(chain, A, t1);
    if (!(alpha > 0.0))
        throw std::domain_error(
            "alpha_splitting_decomposition: doeblin_alpha is zero, no minorization at t1");
    if (alpha >= 1.0)
        throw std::domain_error(
            "alpha_splitting_decomposition: alpha = 1 makes the remainder degenerate");
    const int n = chain.n_states();
    std::vector<bool> in_A(static_cast<std::size_t>(n), false);
    for (int s : A) in_A[static_cast<std::size_t>(s)] = true;

    SplittingTrace trace;
    trace.alpha = alpha;
    trace.residual_bound = 2.0 * std::pow(1.0 - alpha, k);

    std::array<Eigen::RowVectorXd, 2> mu_prev;
    for (int j = 0; j < 2; ++j) {
        mu_prev[j] = Eigen::RowVectorXd::Zero(n);
        mu_prev[j](j == 0 ? x1 : x2) = 1.0;
    }
    for (int round = 0; round < k; ++round) {
        std::array<Eigen::RowVectorXd, 2> nu, mu;
        for (int j = 0; j < 2; ++j) {
            const Eigen::RowVectorXd pushed = propagate(mu_prev[j], chain.kernel(), t1);
            double mass_A = 0.0;
            for (int s = 0; s < n; ++s)
                if (in_A[static_cast<std::size_t>(s)]) mass_A += pushed(s);
            nu[j] = Eigen::RowVectorXd::Zero(n);
            for (int s = 0; s < n; ++s)
                if (in_A[static_cast<std::size_t>(s)]) nu[j](s) = pushed(s) / mass_A;
            mu[j] = (pushed - alpha * nu[j]) / (1.0 - alpha);
            mu_prev[j] = mu[j];
        }
        trace.rounds.push_back(SplittingRound{row_to_measure(nu[0]), row_to_measure(mu[0]),
                                              row_to_measure(nu[1]), row_to_measure(mu[1]),
                                              t1});
    }
    return trace;
}

double SplittingTrace::reconstruction_residual(const FiniteChain& chain, int x1,
                                               int x2) const {
    const int n = chain.n_states();
    std::array<Eigen::RowVectorXd, 2> mu_prev;
    for (int j = 0; j < 2; ++j) {
        mu_prev[j] = Eigen::RowVectorXd::Zero(n);
        mu_prev[j](j == 0 ? x1 : x2) = 1.0;
    }
    double worst = 0.0;
    for (const auto& round : rounds) {
        for (int j = 0; j < 2; ++j) {
            const Eigen::RowVectorXd pushed = propagate(mu_prev[j], chain.kernel(), round.t_i);
            const FiniteMeasure& nu = j == 0 ? round.nu_x1 : round.nu_x2;
            const FiniteMeasure& mu = j == 0 ? round.mu_x1 : round.mu_x2;
            for (int s = 0; s < n; ++s) {
                const double recon = alpha * nu[static_cast<std::size_t>(s)] +
                                     (1.0 - alpha) * mu[static_cast<std::size_t>(s)];
                worst = std::max(worst, std::abs(recon - pushed(s)));
            }
            for (int s = 0; s < n; ++s)
                mu_prev[j](s) = mu[static_cast<std::size_t>(s)];
        }
    }
    return worst;
}

nlohmann::json SplittingTrace::to_json() const {
    nlohmann::json rounds_json = nlohmann::json::array();
    for (const auto& r : rounds)
        rounds_json.push_back({{"t_i", r.t_i},
                               {"nu_x1", r.nu_x1.probs()},
                               {"mu_x1", r.mu_x1.probs()},
                               {"nu_x2", r.nu_x2.probs()},
                               {"mu_x2", r.mu_x2.probs()}});
    return nlohmann::json{{"schema_version", 1},
                          {"kind", "splitting_trace"},
                          {"alpha", alpha},
                          {"residual_bound", residual_bound},
                          {"rounds", rounds_json}};
}

ChainConditionReport exact_condition_report(const FiniteChain& chain, int z, double eps) {
    if (z < 0 || z >= chain.n_states())
        throw std::domain_error("exact_condition_report: probe state out of range");
    if (!(eps > 0.0)) throw std::domain_error("exact_condition_report: eps must be positive");
    const auto ball_states = chain.ball(z, eps);
    const Eigen::MatrixXd limits = limit_rows(chain);

    ChainConditionReport report;
    report.cesaro_only = chain.period() > 1;
    std::string caveat =
        "Exact oracle values; t = -1 denotes the t->infinity limit of the exact kernel.";
    if (report.cesaro_only)
        caveat += " Chain is periodic: P_t limits are reported along Cesaro averages only.";

    auto make = [&](ConditionId id, bool all_x) {
        CriterionReport r;
        r.condition = id;
        r.probe_z = static_cast<double>(z);
        r.radius = eps;
        r.t_grid = {-1.0};
        r.caveat = caveat;
        r.exact = true;
        double worst = 2.0;
        const int x_lo = all_x ? 0 : z;
        const int x_hi = all_x ? chain.n_states() - 1 : z;
        for (int x = x_lo; x <= x_hi; ++x) {
            const double v = ball_mass(limits.row(x), ball_states);
            r.x_grid.push_back(static_cast<double>(x));
            r.points.push_back({static_cast<double>(x), -1.0, v, v, v});
            worst = std::min(worst, v);
        }
        r.summary_value = worst;
        r.summary_ci_low = worst;
        r.summary_ci_high = worst;
        r.verdict = worst > 0.0 ? Verdict::supported : Verdict::not_supported;
        return r;
    };
    report.c1 = make(ConditionId::C1, true);
    report.c2 = make(ConditionId::C2, false);
    report.c4 = make(ConditionId::C4, true);
    return report;
}

}  // namespace ergolab
