#include "ergolab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ergolab/exec.hpp"
#include "ergolab/flow.hpp"
#include "ergolab/io.hpp"

namespace ergolab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> draw_jump_times(PathRng& rng, double horizon) {
    std::vector<double> jumps;
    double t = rng.exponential();
    while (t <= horizon) {
        jumps.push_back(t);
        t += rng.exponential();
    }
    return jumps;
}

void check_record_times(std::span<const double> record_times) {
    if (record_times.empty())
        throw std::domain_error("simulate: need at least one record time");
    if (!std::is_sorted(record_times.begin(), record_times.end()))
        throw std::domain_error("simulate: record times must be sorted");
}
}  // namespace

SimulatedPath poisson_cubic_path_with_jumps(const PoissonCubicModel& model, double x,
                                            std::span<const double> jump_times,
                                            std::span<const double> record_times) {
    check_record_times(record_times);
    SimulatedPath path;
    path.times.assign(record_times.begin(), record_times.end());
    path.jump_times.assign(jump_times.begin(), jump_times.end());
    path.values.reserve(record_times.size());

    double state = x;
    double segment_start = 0.0;
    std::size_t next_jump = 0;
    for (double t : record_times) {
        while (next_jump < jump_times.size() && jump_times[next_jump] <= t) {
            const double tau = jump_times[next_jump];
            const double left_limit =
                exact_cubic_flow(state, tau - segment_start, model.a, model.b);
            state = left_limit + model.sigma(left_limit);
            segment_start = tau;
            ++next_jump;
        }
        path.values.push_back(exact_cubic_flow(state, t - segment_start, model.a, model.b));
    }
    return path;
}

SimulatedPath simulate_poisson_cubic(const PoissonCubicModel& model, double x,
                                     const SimConfig& cfg, std::uint64_t path_index) {
    PathRng rng(cfg.master_seed, path_index);
    const std::vector<double> jumps = draw_jump_times(rng, cfg.horizon);
    const std::vector<double> record =
        cfg.record_times.empty() ? std::vector<double>{cfg.horizon} : cfg.record_times;
    return poisson_cubic_path_with_jumps(model, x, jumps, record);
}

SimulatedPath simulate_langevin(const LangevinCubicModel& model, double x,
                                const SimConfig& cfg, std::uint64_t path_index) {
    const std::vector<double> record =
        cfg.record_times.empty() ? std::vector<double>{cfg.horizon} : cfg.record_times;
    check_record_times(record);

    PathRng rng(cfg.master_seed, path_index);
    SimulatedPath path;
    path.times = record;
    path.values.reserve(record.size());

    // record times snap to the nearest whole step of the scheme
    const long n_steps = std::lround(record.back() / cfg.dt);
    const double sqrt_dt = std::sqrt(cfg.dt);
    double state = x;
    std::size_t next_record = 0;
    for (long step = 0; step <= n_steps; ++step) {
        while (next_record < record.size() &&
               std::lround(record[next_record] / cfg.dt) <= step) {
            path.values.push_back(state);
            ++next_record;
        }
        if (step == n_steps) break;
        const double drift = model.c1 * state - model.c3 * state * state * state;
        const double tamed = drift * cfg.dt / (1.0 + cfg.dt * std::abs(drift));
        const double noise = model.s * state * sqrt_dt * rng.normal();
        state += tamed + noise;
        if (!std::isfinite(state)) {
            path.diverged = true;
            while (path.values.size() < record.size()) path.values.push_back(kNaN);
            return path;
        }
    }
    while (path.values.size() < record.size()) path.values.push_back(state);
    return path;
}

double PoissonCubicProcess::state_at(double x, double t, std::uint64_t seed,
                                     std::uint64_t path) const {
    if (t < 0.0) throw std::domain_error("state_at: t must be nonnegative");
    if (t == 0.0) return x;
    PathRng rng(seed, path);
    const std::vector<double> jumps = draw_jump_times(rng, t);
    const double record[1] = {t};
    return poisson_cubic_path_with_jumps(model_, x, jumps, record).endpoint();
}

double LangevinProcess::state_at(double x, double t, std::uint64_t seed,
                                 std::uint64_t path) const {
    if (t < 0.0) throw std::domain_error("state_at: t must be nonnegative");
    if (t == 0.0) return x;
    SimConfig cfg;
    cfg.horizon = t;
    cfg.dt = std::min(dt_, t);
    cfg.master_seed = seed;
    const SimulatedPath path_out = simulate_langevin(model_, x, cfg, path);
    return path_out.diverged ? kNaN : path_out.endpoint();
}

double EmbeddedChainProcess::state_at(double x, double t, std::uint64_t seed,
                                      std::uint64_t path) const {
    if (t < 0.0) throw std::domain_error("state_at: t must be nonnegative");
    const int n = chain_.n_states();
    const int start = static_cast<int>(std::lround(x));
    if (start < 0 || start >= n)
        throw std::domain_error("embedded chain: initial state out of range");
    const long steps = static_cast<long>(std::ceil(t));
    PathRng rng(seed, path);
    int state = start;
    for (long s = 0; s < steps; ++s) {
        const double u = rng.uniform();
        double acc = 0.0;
        int next = n - 1;
        for (int j = 0; j < n; ++j) {
            acc += chain_.kernel()(state, j);
            if (u < acc) {
                next = j;
                break;
            }
        }
        state = next;
    }
    return static_cast<double>(state);
}

namespace {
EmpiricalMeasure gather_samples(const std::vector<double>& raw) {
    std::vector<double> kept;
    kept.reserve(raw.size());
    std::size_t diverged = 0;
    for (double v : raw) {
        if (std::isnan(v))
            ++diverged;
        else
            kept.push_back(v);
    }
    if (kept.empty())
        throw std::runtime_error("sample_law: every path diverged");
    EmpiricalMeasure out(std::move(kept));
    out.diverged_paths = diverged;
    return out;
}

// tag separating the Cesaro time draw from the path's own stream
constexpr std::uint64_t kCesaroTag = 0xCE5A0CE5A0CE5A01ull;
}  // namespace

EmpiricalMeasure sample_law(const Process& process, double x, double t, long n,
                            std::uint64_t master_seed, int threads) {
    if (n < 1) throw std::domain_error("sample_law: n must be >= 1");
    std::vector<double> raw(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n),
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t i = begin; i < end; ++i)
                         raw[i] = process.state_at(x, t, master_seed, i);
                 },
                 threads);
    return gather_samples(raw);
}

EmpiricalMeasure sample_cesaro_law(const Process& process, double x, double t, long n,
                                   std::uint64_t master_seed, int threads) {
    if (n < 1) throw std::domain_error("sample_cesaro_law: n must be >= 1");
    if (!(t > 0.0)) throw std::domain_error("sample_cesaro_law: t must be positive");
    const std::uint64_t u_seed = derive_seed(master_seed, kCesaroTag);
    std::vector<double> raw(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n),
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t i = begin; i < end; ++i) {
                         PathRng u_rng(u_seed, i);
                         const double u = t * u_rng.uniform_pos();  // in (0, t]
                         raw[i] = process.state_at(x, u, master_seed, i);
                     }
                 },
                 threads);
    return gather_samples(raw);
}

std::string TrajectoryBatch::endpoints_csv() const {
    std::ostringstream out;
    out << "path_index,time,value\n";
    const double t_end = record_times.back();
    for (std::size_t i = 0; i < values.size(); ++i)
        out << i << ',' << format_double(t_end) << ','
            << format_double(values[i].back()) << '\n';
    return out.str();
}

namespace {
template <typename SimulateOne>
TrajectoryBatch run_batch(const std::string& model_id, double x, const SimConfig& cfg,
                          int threads, bool keep_jumps, SimulateOne&& simulate_one) {
    cfg.validate();
    TrajectoryBatch batch;
    batch.model_id = model_id;
    batch.initial_x = x;
    batch.master_seed = cfg.master_seed;
    batch.record_times =
        cfg.record_times.empty() ? std::vector<double>{cfg.horizon} : cfg.record_times;
    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    batch.values.resize(n);
    if (keep_jumps) batch.jump_times.resize(n);
    std::vector<char> diverged(n, 0);
    parallel_for(n,
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t i = begin; i < end; ++i) {
                         SimulatedPath p = simulate_one(i);
                         batch.values[i] = std::move(p.values);
                         if (keep_jumps) batch.jump_times[i] = std::move(p.jump_times);
                         diverged[i] = p.diverged ? 1 : 0;
                     }
                 },
                 threads);
    for (char d : diverged) batch.diverged_count += d;
    return batch;
}
}  // namespace

TrajectoryBatch simulate_poisson_batch(const PoissonCubicModel& model, double x,
                                       const SimConfig& cfg, int threads) {
    return run_batch("poisson_cubic", x, cfg, threads, true, [&](std::size_t i) {
        return simulate_poisson_cubic(model, x, cfg, i);
    });
}

TrajectoryBatch simulate_langevin_batch(const LangevinCubicModel& model, double x,
                                        const SimConfig& cfg, int threads) {
    return run_batch("langevin_cubic", x, cfg, threads, false, [&](std::size_t i) {
        return simulate_langevin(model, x, cfg, i);
    });
}

}  // namespace ergolab
