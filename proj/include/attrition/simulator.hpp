#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "attrition/errors.hpp"
#include "attrition/model.hpp"
#include "attrition/rng.hpp"
#include "attrition/trajectory.hpp"

namespace attrition {

// How the integrator advances counts within an epoch: Euler-Maruyama in
// count space (prepoint coefficients, floor clamp) or the exact
// log-normal update in log space.
enum class StepSpace { counts, log_counts };

// Seeded synthetic battle generation; the stand-in for exercise data.
struct SimConfig {
  ModelSpec spec;
  CoefficientSet theta;
  StateVector initial;
  std::size_t n_runs = 6;
  std::size_t n_epochs = 10;
  int substeps_per_epoch = 10;
  std::uint64_t master_seed = 1;
  double count_floor = 0.0;
  StepSpace space = StepSpace::counts;

  void validate() const {
    if (n_runs < 1 || n_epochs < 1) throw UsageError("sim config: runs and epochs must be >= 1");
    if (substeps_per_epoch < 1) throw UsageError("sim config: substeps must be >= 1");
    if (initial.m.size() != spec.n_units())
      throw UsageError("sim config: initial state does not match the model spec");
    if (!theta.conforms_to(spec))
      throw UsageError("sim config: coefficients do not match the model spec");
    for (double m : initial.m)
      if (!(m >= 0.0) || !std::isfinite(m))
        throw UsageError("sim config: initial counts must be finite and >= 0");
  }
};

// One prepoint (Ito) Euler-Maruyama step of h minutes:
//   m' = max(floor, m + g(m) h + z m sqrt(h) xi).
inline StateVector step(const StateVector& state, const CoefficientSet& theta,
                        const ModelSpec& spec, double h,
                        std::span<const double> noise_draws, double count_floor = 0.0) {
  check_conformance(state, theta, spec);
  if (!(h > 0.0)) throw UsageError("step size must be > 0");
  if (noise_draws.size() != spec.n_units())
    throw UsageError("noise draw dimension does not match the model spec");
  for (double d : noise_draws)
    if (!std::isfinite(d)) throw UsageError("non-finite noise draw");

  std::vector<double> g(spec.n_units());
  drift_into(g, state.m, theta, spec);
  StateVector next{state.t + h, std::vector<double>(spec.n_units())};
  const double sqrt_h = std::sqrt(h);
  const auto& slots = spec.noise_units();
  std::vector<double> amp(spec.n_units(), 0.0);
  for (std::size_t i = 0; i < slots.size(); ++i)
    amp[slots[i]] = theta.noise_coeff(i) * state.m[slots[i]];
  for (std::size_t u = 0; u < spec.n_units(); ++u) {
    double m = state.m[u] + g[u] * h + amp[u] * sqrt_h * noise_draws[u];
    next.m[u] = m < count_floor ? count_floor : m;
  }
  return next;
}

// Exact log-normal step: X' = X + (g/m) h + z sqrt(h) xi in X = ln m.
inline StateVector step_log_normal(const StateVector& state, const CoefficientSet& theta,
                                   const ModelSpec& spec, double h,
                                   std::span<const double> noise_draws,
                                   double count_floor = 0.0) {
  check_conformance(state, theta, spec);
  if (!(h > 0.0)) throw UsageError("step size must be > 0");
  for (double m : state.m)
    if (!(m > 0.0)) throw NumericError("log-space stepping requires counts > 0");
  for (double d : noise_draws)
    if (!std::isfinite(d)) throw UsageError("non-finite noise draw");

  std::vector<double> g(spec.n_units());
  drift_into(g, state.m, theta, spec);
  StateVector next{state.t + h, std::vector<double>(spec.n_units())};
  const double sqrt_h = std::sqrt(h);
  const auto& slots = spec.noise_units();
  std::vector<double> z(spec.n_units(), 0.0);
  for (std::size_t i = 0; i < slots.size(); ++i) z[slots[i]] = theta.noise_coeff(i);
  for (std::size_t u = 0; u < spec.n_units(); ++u) {
    const double m =
        state.m[u] * std::exp(g[u] / state.m[u] * h + z[u] * sqrt_h * noise_draws[u]);
    next.m[u] = m < count_floor ? count_floor : m;
  }
  return next;
}

// One run: n_epochs+1 states at t0, t0+dt, ... Each run has its own RNG
// stream derived from (master_seed, run_index) by splitmix64, so runs
// are independent and individually reproducible; draws are consumed in
// unit order, substep by substep.
inline Trajectory run(const SimConfig& config, std::size_t run_index) {
  config.validate();
  Xoshiro256pp rng(derive_stream_seed(config.master_seed, run_index));
  Trajectory traj;
  traj.run_id = run_index;
  traj.states.reserve(config.n_epochs + 1);
  StateVector state = config.initial;
  traj.states.push_back(state);
  const double h = config.spec.dt() / config.substeps_per_epoch;
  std::vector<double> draws(config.spec.n_units());
  for (std::size_t e = 0; e < config.n_epochs; ++e) {
    for (int s = 0; s < config.substeps_per_epoch; ++s) {
      for (double& d : draws) d = rng.standard_normal();
      state = config.space == StepSpace::counts
                  ? step(state, config.theta, config.spec, h, draws, config.count_floor)
                  : step_log_normal(state, config.theta, config.spec, h, draws,
                                    config.count_floor);
    }
    // land exactly on the epoch grid
    state.t = config.initial.t + static_cast<double>(e + 1) * config.spec.dt();
    traj.states.push_back(state);
  }
  return traj;
}

// n_runs independent trajectories. Per-run streams make the parallel and
// serial paths bit-identical.
inline Ensemble ensemble(const SimConfig& config, unsigned n_threads = 1) {
  config.validate();
  Ensemble out(config.n_runs);
  if (n_threads <= 1 || config.n_runs == 1) {
    for (std::size_t r = 0; r < config.n_runs; ++r) out[r] = run(config, r);
    return out;
  }
  std::vector<std::thread> pool;
  const unsigned workers =
      std::min<unsigned>(n_threads, static_cast<unsigned>(config.n_runs));
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < config.n_runs; r += workers) out[r] = run(config, r);
    });
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace attrition
