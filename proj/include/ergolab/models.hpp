#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ergolab {

// Bounded Lipschitz jump amplitude. Built-ins: constant c0 and
// c0 + c1*sin(x).
struct SigmaSpec {
    enum class Kind { constant, sinusoidal };
    Kind kind = Kind::constant;
    double c0 = 1.0;
    double c1 = 0.0;

    double operator()(double x) const;
    std::string describe() const;

    static SigmaSpec constant(double c);
    static SigmaSpec sinusoidal(double c0, double c1);
    static SigmaSpec from_json(const nlohmann::json& j);
};

// Range and resolution on which the global bounds on sigma are probed.
struct ProbeGrid {
    double lo = -50.0;
    double hi = 50.0;
    int count = 10001;
};

// dX = (aX - bX^3) dt + sigma(X-) dN with N a unit-rate Poisson process;
// m <= sigma <= M and |sigma(x)-sigma(y)| <= lip_sigma |x-y|.
struct PoissonCubicModel {
    double a = 1.0;
    double b = 1.0;
    SigmaSpec sigma;
    double m = 0.0;
    double M = 0.0;
    double lip_sigma = 0.0;

    double equilibrium() const;  // sqrt(a/b)

    // Checks a,b,m,M and the sigma bounds on the probe grid (the bounds
    // are global statements, so they are sampled, not proven). Throws
    // listing every violation, including the first offending probe point.
    void validate(const ProbeGrid& probe = {}) const;

    static PoissonCubicModel from_json(const nlohmann::json& j);
};

// dX = (c1 X - c3 X^3) dt + s X dB; the counterexample diffusion whose
// semigroup is not eventually continuous at the unstable point 0.
struct LangevinCubicModel {
    double c1 = 1.5;
    double c3 = 1.0;
    double s = 1.0;

    void validate() const;  // c3 > 0
    static LangevinCubicModel from_json(const nlohmann::json& j);
};

struct SimConfig {
    double horizon = 1.0;
    double dt = 1e-3;            // diffusion step
    double ode_tolerance = 1e-9;
    long n_paths = 1;
    std::uint64_t master_seed = 0;
    std::vector<double> record_times;  // empty = endpoint only

    void validate() const;
    static SimConfig from_json(const nlohmann::json& j);
};

}  // namespace ergolab
