#pragma once

#include <chrono>
#include <cmath>
#include <span>
#include <vector>

#include "attrition/asa.hpp"
#include "attrition/likelihood.hpp"
#include "attrition/model.hpp"
#include "attrition/numeric.hpp"
#include "attrition/trajectory.hpp"

namespace attrition {

struct FitOptions {
  LikelihoodOptions likelihood;
  AsaConfig asa;
};

struct FitReport {
  CoefficientSet coefficients;
  double final_cost = 0.0;
  long generated = 0;
  long accepted = 0;
  std::vector<bool> bounds_hit;  // per flat parameter, either side
  long clamp_events = 0;
  double wall_seconds = 0.0;  // console diagnostic; never serialized
  std::vector<AsaTracePoint> trace;
};

namespace detail {

// Flattened transition data for the annealing inner loop. Every epoch
// cost is assembled from the same expressions as epoch_cost, except that
// ln sigma is split into the state part (theta-independent, precomputed)
// and the z part (one log per unit per evaluation).
class FitCache {
 public:
  FitCache(const Ensemble& ensemble, const ModelSpec& spec,
           const LikelihoodOptions& opts)
      : spec_(spec), opts_(opts), n_(spec.n_units()) {
    check_uniform_dt(ensemble, spec);
    for (const auto& run : ensemble) {
      for (std::size_t e = 0; e + 1 < run.states.size(); ++e) {
        const auto tr = transition_at(run, e);
        const auto rate = transition_rate(tr, opts);
        for (std::size_t u = 0; u < n_; ++u) {
          m_from_.push_back(tr.from.m[u]);
          rate_.push_back(rate[u]);
          if (opts.coords == FitCoordinates::counts) {
            const double meff =
                tr.from.m[u] <= opts.count_floor ? opts.count_floor : tr.from.m[u];
            inv_meff2_.push_back(1.0 / (meff * meff));
            state_log_sigma_.push_back(std::log(meff * meff));
          } else {
            inv_meff2_.push_back(1.0);
            state_log_sigma_.push_back(0.0);
          }
          inv_m_.push_back(opts.coords == FitCoordinates::counts ? 0.0
                                                                 : 1.0 / tr.from.m[u]);
        }
        ++k_;
      }
    }
    dt_ = spec.dt();
    norm_const_ = 0.5 * static_cast<double>(n_) * std::log(2.0 * M_PI * dt_);
  }

  std::size_t n_transitions() const { return k_; }

  // Negative log likelihood of the whole ensemble at the flat parameter
  // vector [drift terms..., z...]. Deterministic pairwise reduction.
  double operator()(std::span<const double> flat) const {
    const std::size_t nt = spec_.n_drift_terms();
    const auto& slots = spec_.noise_units();
    double z_log_sigma = 0.0;
    thread_local std::vector<double> inv_z2;
    inv_z2.assign(n_, 0.0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const double z = flat[nt + i];
      z_log_sigma += std::log(z * z);
      inv_z2[slots[i]] = 1.0 / (z * z);
    }
    const double base = norm_const_ + 0.5 * z_log_sigma;

    thread_local std::vector<double> costs;
    thread_local std::vector<double> g;
    costs.assign(k_, 0.0);
    g.assign(n_, 0.0);
    const auto& terms = spec_.drift_terms();
    for (std::size_t k = 0; k < k_; ++k) {
      const double* m = &m_from_[k * n_];
      const double* rate = &rate_[k * n_];
      const double* invm2 = &inv_meff2_[k * n_];
      const double* slnsig = &state_log_sigma_[k * n_];
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t t = 0; t < nt; ++t) {
        const DriftTerm& term = terms[t];
        g[term.target] += term.kind == FireKind::point
                              ? flat[t] * m[term.source]
                              : flat[t] * m[term.source] * m[term.target];
      }
      double lagr = 0.0;
      double state_lnsig = 0.0;
      if (opts_.coords == FitCoordinates::counts) {
        for (std::size_t u = 0; u < n_; ++u) {
          const double r = rate[u] - g[u];
          lagr += 0.5 * r * r * inv_z2[u] * invm2[u];
          state_lnsig += slnsig[u];
        }
      } else {
        const double* invm = &inv_m_[k * n_];
        for (std::size_t u = 0; u < n_; ++u) {
          const double r = rate[u] - g[u] * invm[u];
          lagr += 0.5 * r * r * inv_z2[u];
        }
      }
      costs[k] = lagr * dt_ + base + 0.5 * state_lnsig;
    }
    return pairwise_sum(costs);
  }

 private:
  const ModelSpec& spec_;
  LikelihoodOptions opts_;
  std::size_t n_;
  std::size_t k_ = 0;
  double dt_ = 0.0;
  double norm_const_ = 0.0;
  std::vector<double> m_from_;
  std::vector<double> rate_;
  std::vector<double> inv_meff2_;
  std::vector<double> state_log_sigma_;
  std::vector<double> inv_m_;
};

}  // namespace detail

inline AsaBounds fit_bounds(const ModelSpec& spec) {
  AsaBounds b;
  for (std::size_t t = 0; t < spec.n_drift_terms(); ++t) {
    const Interval iv = spec.drift_term_bounds(t);
    b.lower.push_back(iv.lower);
    b.upper.push_back(iv.upper);
  }
  for (std::size_t i = 0; i < spec.noise_units().size(); ++i) {
    const Interval iv = spec.noise_bounds(i);
    b.lower.push_back(iv.lower);
    b.upper.push_back(iv.upper);
  }
  return b;
}

// Maximum-likelihood fit of the coefficient set by annealing on the
// summed epoch costs. z parameters are searched as magnitudes (only z^2
// enters the density).
inline FitReport fit_coefficients(const Ensemble& ensemble, const ModelSpec& spec,
                                  const FitOptions& options = {}) {
  if (ensemble.empty()) throw UsageError("fit: empty ensemble");

  double spread = 0.0;
  for (const auto& run : ensemble)
    for (std::size_t e = 0; e + 1 < run.states.size(); ++e)
      for (std::size_t u = 0; u < spec.n_units(); ++u)
        spread = std::max(spread,
                          std::abs(run.states[e + 1].m[u] - run.states[e].m[u]));
  if (spread == 0.0)
    throw NumericError(
        "fit: degenerate data, every trajectory is constant; nothing to fit");

  const auto start = std::chrono::steady_clock::now();
  detail::FitCache cache(ensemble, spec, options.likelihood);
  const AsaBounds bounds = fit_bounds(spec);
  AsaResult asa = minimize([&cache](std::span<const double> p) { return cache(p); },
                           bounds, options.asa);

  FitReport report;
  report.coefficients = CoefficientSet::from_flat(spec, asa.best);
  report.generated = asa.generated;
  report.accepted = asa.accepted;
  report.trace = std::move(asa.trace);
  report.clamp_events = 0;
  report.final_cost = total_cost(ensemble, report.coefficients, spec,
                                 options.likelihood, 1, &report.clamp_events);
  report.bounds_hit.resize(asa.best.size());
  for (std::size_t i = 0; i < asa.best.size(); ++i) {
    const double range = bounds.upper[i] - bounds.lower[i];
    report.bounds_hit[i] = std::abs(asa.best[i] - bounds.lower[i]) <= 1e-9 * range ||
                           std::abs(asa.best[i] - bounds.upper[i]) <= 1e-9 * range;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace attrition
