#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ergolab/chain.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/models.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// One realized path sampled at the requested times.
struct SimulatedPath {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> jump_times;  // Poisson driver only
    bool diverged = false;
    double endpoint() const { return values.back(); }
};

// Deterministic core of the jump SDE: exact cubic flow between the given
// jump times, jump map X <- X + sigma(X-). No randomness in here, which is
// what lets tests inject a fixed jump schedule.
SimulatedPath poisson_cubic_path_with_jumps(const PoissonCubicModel& model, double x,
                                            std::span<const double> jump_times,
                                            std::span<const double> record_times);

// Jump times drawn as cumulative unit-rate exponentials from the stream
// (master_seed, path_index); between jumps the state is exact.
SimulatedPath simulate_poisson_cubic(const PoissonCubicModel& model, double x,
                                     const SimConfig& cfg, std::uint64_t path_index);

// Tamed explicit Euler-Maruyama for the cubic Langevin diffusion:
// drift increment dt*f(X)/(1 + dt*|f(X)|), diffusion s*X*sqrt(dt)*xi.
// A non-finite state flags the path as diverged (recorded, not dropped).
SimulatedPath simulate_langevin(const LangevinCubicModel& model, double x,
                                const SimConfig& cfg, std::uint64_t path_index);

// Seeded one-dimensional Markov process: the single surface the criterion
// estimators drive. state_at must be a pure function of its arguments so
// batches reproduce bit-identically regardless of scheduling; NaN marks a
// diverged path.
class Process {
public:
    virtual ~Process() = default;
    virtual double state_at(double x, double t, std::uint64_t master_seed,
                            std::uint64_t path_index) const = 0;
    virtual std::string id() const = 0;
};

class PoissonCubicProcess final : public Process {
public:
    explicit PoissonCubicProcess(PoissonCubicModel model) : model_(std::move(model)) {}
    double state_at(double x, double t, std::uint64_t seed, std::uint64_t path) const override;
    std::string id() const override { return "poisson_cubic"; }
    const PoissonCubicModel& model() const { return model_; }

private:
    PoissonCubicModel model_;
};

class LangevinProcess final : public Process {
public:
    LangevinProcess(LangevinCubicModel model, double dt) : model_(model), dt_(dt) {}
    double state_at(double x, double t, std::uint64_t seed, std::uint64_t path) const override;
    std::string id() const override { return "langevin_cubic"; }
    const LangevinCubicModel& model() const { return model_; }
    double dt() const { return dt_; }

private:
    LangevinCubicModel model_;
    double dt_;
};

// Discrete chain embedded in continuous time: the state on (k-1, k] is the
// chain after k transitions, so a uniform draw on (0, t] at integer t
// averages P^1..P^t exactly like the discrete Cesaro oracle. x is the
// starting state index.
class EmbeddedChainProcess final : public Process {
public:
    explicit EmbeddedChainProcess(FiniteChain chain) : chain_(std::move(chain)) {}
    double state_at(double x, double t, std::uint64_t seed, std::uint64_t path) const override;
    std::string id() const override { return "embedded_chain"; }
    const FiniteChain& chain() const { return chain_; }

private:
    FiniteChain chain_;
};

// n independent endpoints of the law P_t(x, .); path i uses the stream
// (master_seed, i). Diverged paths are excluded from the cloud and counted
// in EmpiricalMeasure::diverged_paths.
EmpiricalMeasure sample_law(const Process& process, double x, double t, long n,
                            std::uint64_t master_seed, int threads = 0);

// One-sample estimator of the time-averaged law Q_t(x, .): each path is
// evaluated at an independent uniform time U in (0, t].
EmpiricalMeasure sample_cesaro_law(const Process& process, double x, double t, long n,
                                   std::uint64_t master_seed, int threads = 0);

struct TrajectoryBatch {
    std::string model_id;
    double initial_x = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<double> record_times;
    std::vector<std::vector<double>> values;      // [path][time]
    std::vector<std::vector<double>> jump_times;  // [path], Poisson only
    long diverged_count = 0;

    std::string endpoints_csv() const;  // columns: path_index,time,value
};

TrajectoryBatch simulate_poisson_batch(const PoissonCubicModel& model, double x,
                                       const SimConfig& cfg, int threads = 0);
TrajectoryBatch simulate_langevin_batch(const LangevinCubicModel& model, double x,
                                        const SimConfig& cfg, int threads = 0);

}  // namespace ergolab
