#pragma once

#include <cmath>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "attrition/errors.hpp"
#include "attrition/model.hpp"
#include "attrition/numeric.hpp"
#include "attrition/trajectory.hpp"

namespace attrition {

// Coordinates the transition density is written in. Raw counts use the
// state-dependent covariance (z*m)^2 at the prepoint; log coordinates use
// the constant covariance z^2 and require strictly positive counts.
enum class FitCoordinates { counts, log_counts };

struct LikelihoodOptions {
  double count_floor = 1e-6;  // prepoint counts below this are clamped in the noise term
  FitCoordinates coords = FitCoordinates::counts;
};

struct LagrangianReport {
  double lagrangian = 0.0;        // quadratic form, >= 0
  double sigma = 0.0;             // det of the covariance diagonal
  std::vector<double> residual;   // rate minus drift, per unit
  int n_active = 0;               // units with nonzero noise coefficient
  int clamped = 0;                // prepoint counts lifted to the floor
};

namespace detail {

struct EpochTerms {
  double lagrangian = 0.0;
  double log_sigma = 0.0;
  int clamped = 0;
};

// Shared kernel for the quadratic form and log-determinant. `rate` is
// Mdot in count coordinates or Xdot in log coordinates, evaluated by the
// caller; `g_scratch` must have n_units slots.
inline EpochTerms epoch_terms(std::span<const double> m_from,
                              std::span<const double> rate,
                              const CoefficientSet& theta, const ModelSpec& spec,
                              const LikelihoodOptions& opts,
                              std::span<double> g_scratch) {
  drift_into(g_scratch, m_from, theta, spec);
  EpochTerms out;
  const auto& slots = spec.noise_units();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::size_t u = slots[i];
    const double z = theta.noise_coeff(i);
    double variance;
    double resid;
    if (opts.coords == FitCoordinates::counts) {
      double m = m_from[u];
      if (m <= opts.count_floor) {
        m = opts.count_floor;
        ++out.clamped;
      }
      const double a = z * m;
      variance = a * a;
      resid = rate[u] - g_scratch[u];
    } else {
      if (!(m_from[u] > 0.0))
        throw std::domain_error("log-coordinate likelihood requires counts > 0");
      variance = z * z;
      resid = rate[u] - g_scratch[u] / m_from[u];
    }
    if (!(variance > 0.0)) throw DegenerateMetricError(spec.unit_name(u));
    out.lagrangian += resid * resid / (2.0 * variance);
    out.log_sigma += std::log(variance);
  }
  return out;
}

inline std::vector<double> transition_rate(const EpochTransition& tr,
                                           const LikelihoodOptions& opts) {
  if (!(tr.dt > 0.0)) throw UsageError("transition dt must be > 0");
  if (tr.from.m.size() != tr.to.m.size())
    throw UsageError("transition endpoints have mismatched dimensions");
  std::vector<double> rate(tr.from.m.size());
  for (std::size_t u = 0; u < rate.size(); ++u) {
    if (opts.coords == FitCoordinates::counts) {
      rate[u] = (tr.to.m[u] - tr.from.m[u]) / tr.dt;
    } else {
      if (!(tr.from.m[u] > 0.0 && tr.to.m[u] > 0.0))
        throw std::domain_error("log-coordinate likelihood requires counts > 0");
      rate[u] = (std::log(tr.to.m[u]) - std::log(tr.from.m[u])) / tr.dt;
    }
    if (!std::isfinite(rate[u])) throw UsageError("transition implies non-finite rate");
  }
  return rate;
}

}  // namespace detail

// Prepoint Lagrangian of one transition:
//   L = sum_G (rate^G - g^G)^2 / (2 var^G),  var^G = (z^G m^G)^2 at m_from.
inline LagrangianReport lagrangian(const EpochTransition& tr, const CoefficientSet& theta,
                                   const ModelSpec& spec,
                                   const LikelihoodOptions& opts = {}) {
  check_conformance(tr.from, theta, spec);
  const auto rate = detail::transition_rate(tr, opts);
  std::vector<double> g(spec.n_units());
  const auto terms = detail::epoch_terms(tr.from.m, rate, theta, spec, opts, g);

  LagrangianReport report;
  report.lagrangian = terms.lagrangian;
  report.sigma = std::exp(terms.log_sigma);
  report.clamped = terms.clamped;
  report.residual.resize(spec.n_units());
  for (std::size_t u = 0; u < spec.n_units(); ++u) {
    const double gx = opts.coords == FitCoordinates::counts
                          ? g[u]
                          : g[u] / tr.from.m[u];
    report.residual[u] = rate[u] - gx;
  }
  for (std::size_t i = 0; i < spec.noise_units().size(); ++i)
    if (theta.noise_coeff(i) != 0.0) ++report.n_active;
  return report;
}

// Negative log transition density:
//   C = L*dt + (N/2) ln(2 pi dt) + (1/2) ln sigma.
inline double epoch_cost(const EpochTransition& tr, const CoefficientSet& theta,
                         const ModelSpec& spec, const LikelihoodOptions& opts = {}) {
  check_conformance(tr.from, theta, spec);
  const auto rate = detail::transition_rate(tr, opts);
  std::vector<double> g(spec.n_units());
  const auto terms = detail::epoch_terms(tr.from.m, rate, theta, spec, opts, g);
  const double n = static_cast<double>(spec.n_units());
  return terms.lagrangian * tr.dt + 0.5 * n * std::log(2.0 * M_PI * tr.dt) +
         0.5 * terms.log_sigma;
}

namespace detail {

inline void check_uniform_dt(const Ensemble& ensemble, const ModelSpec& spec) {
  for (const auto& run : ensemble) {
    if (run.states.size() < 2)
      throw UsageError("run " + std::to_string(run.run_id) +
                       " has fewer than 2 states");
    for (std::size_t e = 0; e + 1 < run.states.size(); ++e) {
      const double dt = run.states[e + 1].t - run.states[e].t;
      if (std::abs(dt - spec.dt()) > 1e-9 * spec.dt())
        throw FormatError("run " + std::to_string(run.run_id) +
                          ": epoch length " + format_full(dt) +
                          " does not match spec dt " + format_full(spec.dt()));
    }
  }
}

}  // namespace detail

// Sum of epoch costs over every consecutive transition of every run.
// Per-transition costs land in a canonical (run-major) buffer that is
// reduced by a fixed pairwise tree, so the value is bit-identical for
// any worker count.
inline double total_cost(const Ensemble& ensemble, const CoefficientSet& theta,
                         const ModelSpec& spec, const LikelihoodOptions& opts = {},
                         unsigned n_threads = 1, long* clamp_events = nullptr) {
  if (ensemble.empty()) throw UsageError("total cost of an empty ensemble");
  detail::check_uniform_dt(ensemble, spec);

  struct Slot {
    const Trajectory* run;
    std::size_t epoch;
  };
  std::vector<Slot> slots;
  for (const auto& run : ensemble)
    for (std::size_t e = 0; e + 1 < run.states.size(); ++e)
      slots.push_back({&run, e});

  std::vector<double> costs(slots.size());
  std::vector<long> clamps(slots.size(), 0);
  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto tr = transition_at(*slots[k].run, slots[k].epoch);
      const auto rate = detail::transition_rate(tr, opts);
      std::vector<double> g(spec.n_units());
      const auto terms = detail::epoch_terms(tr.from.m, rate, theta, spec, opts, g);
      const double n = static_cast<double>(spec.n_units());
      costs[k] = terms.lagrangian * tr.dt + 0.5 * n * std::log(2.0 * M_PI * tr.dt) +
                 0.5 * terms.log_sigma;
      clamps[k] = terms.clamped;
    }
  };

  if (n_threads <= 1 || slots.size() < 64) {
    worker(0, slots.size());
  } else {
    const unsigned workers = std::min<unsigned>(n_threads, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    const std::size_t chunk = (slots.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(slots.size(), b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& t : pool) t.join();
  }

  if (clamp_events) {
    long total = 0;
    for (long c : clamps) total += c;
    *clamp_events += total;
  }
  return pairwise_sum(costs);
}

}  // namespace attrition
