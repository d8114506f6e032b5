#include "ergolab/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ergolab {

double SigmaSpec::operator()(double x) const {
    switch (kind) {
        case Kind::constant: return c0;
        case Kind::sinusoidal: return c0 + c1 * std::sin(x);
    }
    throw std::logic_error("unknown SigmaSpec kind");
}

std::string SigmaSpec::describe() const {
    std::ostringstream out;
    if (kind == Kind::constant)
        out << "constant " << c0;
    else
        out << c0 << " + " << c1 << "*sin(x)";
    return out.str();
}

SigmaSpec SigmaSpec::constant(double c) { return SigmaSpec{Kind::constant, c, 0.0}; }

SigmaSpec SigmaSpec::sinusoidal(double c0, double c1) {
    return SigmaSpec{Kind::sinusoidal, c0, c1};
}

SigmaSpec SigmaSpec::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return constant(j.at("c0").get<double>());
    if (kind == "sinusoidal")
        return sinusoidal(j.at("c0").get<double>(), j.at("c1").get<double>());
    throw std::domain_error("sigma spec: unknown kind '" + kind + "'");
}

double PoissonCubicModel::equilibrium() const { return std::sqrt(a / b); }

void PoissonCubicModel::validate(const ProbeGrid& probe) const {
    std::vector<std::string> problems;
    if (!(a > 0.0)) problems.push_back("a must be positive");
    if (!(b > 0.0)) problems.push_back("b must be positive");
    if (!(m > 0.0)) problems.push_back("m must be positive");
    if (!(M > m)) problems.push_back("M must exceed m");
    if (lip_sigma < 0.0) problems.push_back("lip_sigma must be nonnegative");
    if (probe.count < 2) problems.push_back("probe grid needs at least two points");

    if (problems.empty()) {
        const double step = (probe.hi - probe.lo) / static_cast<double>(probe.count - 1);
        const double tol = 1e-9;
        double prev_x = probe.lo;
        double prev_s = sigma(prev_x);
        for (int i = 0; i < probe.count; ++i) {
            const double x = probe.lo + step * static_cast<double>(i);
            const double s = sigma(x);
            if (s < m - tol || s > M + tol) {
                std::ostringstream msg;
                msg << "sigma(" << x << ") = " << s << " violates m<sigma<M with m=" << m
                    << ", M=" << M;
                problems.push_back(msg.str());
                break;
            }
            if (i > 0 && std::abs(s - prev_s) > lip_sigma * std::abs(x - prev_x) + tol) {
                std::ostringstream msg;
                msg << "sigma violates the Lipschitz bound " << lip_sigma
                    << " between probe points " << prev_x << " and " << x;
                problems.push_back(msg.str());
                break;
            }
            prev_x = x;
            prev_s = s;
        }
    }
    if (!problems.empty()) {
        std::string joined = "PoissonCubicModel invalid:";
        for (const auto& p : problems) joined += "\n  - " + p;
        throw std::domain_error(joined);
    }
}

PoissonCubicModel PoissonCubicModel::from_json(const nlohmann::json& j) {
    PoissonCubicModel model;
    model.a = j.at("a").get<double>();
    model.b = j.at("b").get<double>();
    model.sigma = SigmaSpec::from_json(j.at("sigma"));
    model.m = j.at("m").get<double>();
    model.M = j.at("M").get<double>();
    model.lip_sigma = j.at("lip_sigma").get<double>();
    return model;
}

void LangevinCubicModel::validate() const {
    if (!(c3 > 0.0)) throw std::domain_error("LangevinCubicModel: c3 must be positive");
}

LangevinCubicModel LangevinCubicModel::from_json(const nlohmann::json& j) {
    LangevinCubicModel model;
    if (j.contains("c1")) model.c1 = j.at("c1").get<double>();
    if (j.contains("c3")) model.c3 = j.at("c3").get<double>();
    if (j.contains("s")) model.s = j.at("s").get<double>();
    return model;
}

void SimConfig::validate() const {
    std::vector<std::string> problems;
    if (!(horizon > 0.0)) problems.push_back("horizon must be positive");
    if (!(dt > 0.0)) problems.push_back("dt must be positive");
    if (dt > horizon) problems.push_back("dt must not exceed the horizon");
    if (!(ode_tolerance > 0.0)) problems.push_back("ode_tolerance must be positive");
    if (n_paths < 1) problems.push_back("n_paths must be >= 1");
    for (double t : record_times)
        if (t < 0.0 || t > horizon) {
            problems.push_back("record times must lie in [0, horizon]");
            break;
        }
    if (!problems.empty()) {
        std::string joined = "SimConfig invalid:";
        for (const auto& p : problems) joined += "\n  - " + p;
        throw std::domain_error(joined);
    }
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
    SimConfig cfg;
    cfg.horizon = j.at("horizon").get<double>();
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("ode_tolerance")) cfg.ode_tolerance = j.at("ode_tolerance").get<double>();
    if (j.contains("n_paths")) cfg.n_paths = j.at("n_paths").get<long>();
    if (j.contains("record_times"))
        cfg.record_times = j.at("record_times").get<std::vector<double>>();
    return cfg;
}

}  // namespace ergolab
