#include "ergolab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ergolab/io.hpp"

namespace ergolab {

namespace {
constexpr double kMassTolerance = 1e-12;

double checked_total(const std::vector<double>& w, const char* what) {
    double total = 0.0;
    for (double v : w) {
        if (!(v >= -kMassTolerance))
            throw std::domain_error(std::string(what) + ": negative mass entry");
        total += v;
    }
    return total;
}
}  // namespace

FiniteMeasure::FiniteMeasure(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::domain_error("FiniteMeasure: empty support");
    const double total = checked_total(probs_, "FiniteMeasure");
    if (std::abs(total - 1.0) > 1e-9)
        throw std::domain_error("FiniteMeasure: probabilities sum to " +
                                std::to_string(total) + ", expected 1");
}

FiniteMeasure FiniteMeasure::point_mass(std::size_t state, std::size_t n_states) {
    if (state >= n_states) throw std::domain_error("point_mass: state out of range");
    std::vector<double> p(n_states, 0.0);
    p[state] = 1.0;
    return FiniteMeasure(std::move(p));
}

FiniteMeasure FiniteMeasure::uniform(std::size_t n_states) {
    if (n_states == 0) throw std::domain_error("uniform: empty universe");
    return FiniteMeasure(std::vector<double>(n_states, 1.0 / static_cast<double>(n_states)));
}

std::vector<std::size_t> FiniteMeasure::support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < probs_.size(); ++i)
        if (probs_[i] > 0.0) s.push_back(i);
    return s;
}

std::string FiniteMeasure::to_csv() const {
    std::ostringstream out;
    out << "state,prob\n";
    for (std::size_t i = 0; i < probs_.size(); ++i)
        out << i << ',' << format_double(probs_[i]) << '\n';
    return out.str();
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples, std::vector<double> weights)
    : samples_(std::move(samples)), weights_(std::move(weights)) {
    if (samples_.empty()) throw std::domain_error("EmpiricalMeasure: needs at least one sample");
    if (!weights_.empty()) {
        if (weights_.size() != samples_.size())
            throw std::domain_error("EmpiricalMeasure: weight/sample count mismatch");
        const double total = checked_total(weights_, "EmpiricalMeasure");
        if (std::abs(total - 1.0) > kMassTolerance * static_cast<double>(weights_.size()) &&
            std::abs(total - 1.0) > 1e-9)
            throw std::domain_error("EmpiricalMeasure: weights sum to " +
                                    std::to_string(total) + ", expected 1");
    }
}

double EmpiricalMeasure::weight(std::size_t i) const {
    if (i >= samples_.size()) throw std::out_of_range("EmpiricalMeasure::weight");
    return weights_.empty() ? 1.0 / static_cast<double>(samples_.size()) : weights_[i];
}

std::string EmpiricalMeasure::to_csv() const {
    std::ostringstream out;
    out << "sample,weight\n";
    for (std::size_t i = 0; i < samples_.size(); ++i)
        out << format_double(samples_[i]) << ',' << format_double(weight(i)) << '\n';
    return out.str();
}

TestFunction hat_function(double z, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("hat_function: eps must be positive");
    TestFunction f;
    f.eval = [z, eps](double x) { return std::max(0.0, 1.0 - std::abs(x - z) / eps); };
    f.sup_norm = 1.0;
    f.lip_const = 1.0 / eps;
    return f;
}

double tv_finite(const FiniteMeasure& mu, const FiniteMeasure& nu) {
    if (mu.size() != nu.size())
        throw std::domain_error("tv_finite: measures live on different state universes");
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) acc += std::abs(mu[i] - nu[i]);
    return 0.5 * acc;
}

double w1_empirical_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (!mu.uniform_weights() || !nu.uniform_weights())
        throw std::domain_error("w1_empirical_1d: requires uniform weights");
    if (mu.size() != nu.size())
        throw std::domain_error("w1_empirical_1d: sample counts differ; resample first");
    std::vector<double> a = mu.samples();
    std::vector<double> b = nu.samples();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

namespace {
// bin index over edges e_0 < ... < e_m: 0 = underflow, m+1 = overflow
std::vector<double> binned_masses(const EmpiricalMeasure& mu,
                                  const std::vector<double>& edges) {
    std::vector<double> mass(edges.size() + 1, 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), mu.samples()[i]);
        mass[static_cast<std::size_t>(it - edges.begin())] += mu.weight(i);
    }
    return mass;
}
}  // namespace

double tv_binned(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                 const std::vector<double>& bin_edges) {
    if (bin_edges.size() < 2) throw std::domain_error("tv_binned: need at least two bin edges");
    if (!std::is_sorted(bin_edges.begin(), bin_edges.end()) ||
        std::adjacent_find(bin_edges.begin(), bin_edges.end()) != bin_edges.end())
        throw std::domain_error("tv_binned: bin edges must be strictly increasing");
    const auto a = binned_masses(mu, bin_edges);
    const auto b = binned_masses(nu, bin_edges);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return 0.5 * acc;
}

WilsonInterval ball_hit_fraction(const EmpiricalMeasure& mu, double z, double eps,
                                 double confidence) {
    if (!(eps > 0.0)) throw std::domain_error("ball_hit_fraction: eps must be positive");
    double hit = 0.0;
    double total = 0.0;
    double total_sq = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double w = mu.weight(i);
        total += w;
        total_sq += w * w;
        if (std::abs(mu.samples()[i] - z) < eps) hit += w;
    }
    // Kish effective sample size; equals the count for uniform weights
    const double n_eff = total * total / total_sq;
    const double p = hit / total;
    return wilson_interval(p * n_eff, n_eff, confidence);
}

double expectation(const EmpiricalMeasure& mu, const TestFunction& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) acc += mu.weight(i) * f(mu.samples()[i]);
    return acc;
}

double expectation(const FiniteMeasure& mu, const TestFunction& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        acc += mu[i] * f(static_cast<double>(i));
    return acc;
}

}  // namespace ergolab
