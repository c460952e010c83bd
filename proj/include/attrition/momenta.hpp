#pragma once

#include <span>
#include <string>
#include <vector>

#include "attrition/errors.hpp"
#include "attrition/likelihood.hpp"
#include "attrition/model.hpp"
#include "attrition/trajectory.hpp"

namespace attrition {

namespace detail {

// Covariance diagonal at the prepoint with the likelihood's count floor.
inline std::vector<double> floored_variance(std::span<const double> m,
                                            const CoefficientSet& theta,
                                            const ModelSpec& spec,
                                            const LikelihoodOptions& opts) {
  std::vector<double> var(spec.n_units(), 0.0);
  const auto& slots = spec.noise_units();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::size_t u = slots[i];
    const double meff = m[u] <= opts.count_floor ? opts.count_floor : m[u];
    const double a = theta.noise_coeff(i) * meff;
    var[u] = a * a;
    if (!(var[u] > 0.0)) throw DegenerateMetricError(spec.unit_name(u));
  }
  return var;
}

}  // namespace detail

// Canonical momenta Pi^G = dL/dMdot^G = (Mdot^G - g^G) / (z^G m^G)^2.
inline std::vector<double> momenta(const EpochTransition& tr, const CoefficientSet& theta,
                                   const ModelSpec& spec,
                                   const LikelihoodOptions& opts = {}) {
  check_conformance(tr.from, theta, spec);
  LikelihoodOptions count_opts = opts;
  count_opts.coords = FitCoordinates::counts;
  const auto rate = detail::transition_rate(tr, count_opts);
  const auto g = drift(tr.from, theta, spec);
  const auto var = detail::floored_variance(tr.from.m, theta, spec, count_opts);
  std::vector<double> pi(spec.n_units());
  for (std::size_t u = 0; u < pi.size(); ++u) pi[u] = (rate[u] - g[u]) / var[u];
  return pi;
}

// Metric diagonal g_{GG'}: inverse of the covariance at `state`.
inline std::vector<double> mass(const StateVector& state, const CoefficientSet& theta,
                                const ModelSpec& spec,
                                const LikelihoodOptions& opts = {}) {
  check_conformance(state, theta, spec);
  auto var = detail::floored_variance(state.m, theta, spec, opts);
  for (double& v : var) v = 1.0 / v;
  return var;
}

// dL/dM^G at the prepoint, Mdot held fixed. Two contributions: the drift
// moving with the state (via the jacobian) and the multiplicative noise
// amplitude moving with the state (diagonal, -(Mdot-g)^2 / (z^2 m^3)).
inline std::vector<double> force(const EpochTransition& tr, const CoefficientSet& theta,
                                 const ModelSpec& spec,
                                 const LikelihoodOptions& opts = {}) {
  check_conformance(tr.from, theta, spec);
  LikelihoodOptions count_opts = opts;
  count_opts.coords = FitCoordinates::counts;
  const auto rate = detail::transition_rate(tr, count_opts);
  const auto g = drift(tr.from, theta, spec);
  const auto var = detail::floored_variance(tr.from.m, theta, spec, count_opts);
  const auto jac = drift_jacobian(tr.from, theta, spec);
  const std::size_t n = spec.n_units();

  std::vector<double> out(n, 0.0);
  for (std::size_t gp = 0; gp < n; ++gp) {
    double acc = 0.0;
    for (std::size_t gu = 0; gu < n; ++gu) {
      const double pi_g = (rate[gu] - g[gu]) / var[gu];
      acc -= pi_g * jac[gu * n + gp];
    }
    // Clamped counts freeze the noise amplitude, so the covariance term
    // only applies above the floor.
    if (tr.from.m[gp] > count_opts.count_floor) {
      const double r = rate[gp] - g[gp];
      acc -= r * r / (var[gp] * tr.from.m[gp]);
    }
    out[gp] = acc;
  }
  return out;
}

// (1/2) Pi^T Cov Pi; algebraically identical to the Lagrangian.
inline double energy_density(const EpochTransition& tr, const CoefficientSet& theta,
                             const ModelSpec& spec, const LikelihoodOptions& opts = {}) {
  const auto pi = momenta(tr, theta, spec, opts);
  const auto var = detail::floored_variance(tr.from.m, theta, spec, opts);
  double e = 0.0;
  for (std::size_t u = 0; u < pi.size(); ++u) e += 0.5 * pi[u] * var[u] * pi[u];
  return e;
}

// Discrete Euler-Lagrange residual F - ma: force at epoch k minus the
// forward difference of the momenta. Diagnostic only; data need not
// satisfy it. Returns one vector per interior epoch (k = 0 .. K-2).
inline std::vector<std::vector<double>> el_residual(
    std::span<const EpochTransition> transitions, const CoefficientSet& theta,
    const ModelSpec& spec, const LikelihoodOptions& opts = {}) {
  if (transitions.size() < 2)
    throw UsageError("el_residual needs at least 2 consecutive transitions");
  std::vector<std::vector<double>> out;
  out.reserve(transitions.size() - 1);
  auto pi_prev = momenta(transitions[0], theta, spec, opts);
  for (std::size_t k = 0; k + 1 < transitions.size(); ++k) {
    const auto f = force(transitions[k], theta, spec, opts);
    const auto pi_next = momenta(transitions[k + 1], theta, spec, opts);
    std::vector<double> r(f.size());
    for (std::size_t u = 0; u < r.size(); ++u)
      r[u] = f[u] - (pi_next[u] - pi_prev[u]) / transitions[k].dt;
    out.push_back(std::move(r));
    pi_prev = pi_next;
  }
  return out;
}

// Per-epoch momenta and companion mechanical quantities for one run (or
// the run average when label == "mean"). el_residual has one row fewer
// than the epochs.
struct CmiSeries {
  std::string label;
  std::vector<double> t;                          // prepoint minutes per epoch
  std::vector<std::vector<double>> pi;            // [epoch][unit]
  std::vector<double> energy;                     // Lagrangian at each epoch
  std::vector<std::vector<double>> mass_diag;     // [epoch][unit]
  std::vector<std::vector<double>> force_series;  // [epoch][unit]
  std::vector<std::vector<double>> el_res;        // [epoch-1][unit]
};

// One series per run plus the per-epoch arithmetic mean series.
inline std::vector<CmiSeries> ensemble_cmi(const Ensemble& ensemble,
                                           const CoefficientSet& theta,
                                           const ModelSpec& spec,
                                           const LikelihoodOptions& opts = {}) {
  if (ensemble.empty()) throw UsageError("ensemble_cmi of an empty ensemble");
  detail::check_uniform_dt(ensemble, spec);
  const std::size_t epochs = ensemble.front().n_epochs();
  for (const auto& run : ensemble)
    if (run.n_epochs() != epochs)
      throw FormatError("run " + std::to_string(run.run_id) +
                        " has a different epoch count than the first run");

  std::vector<CmiSeries> out;
  for (const auto& run : ensemble) {
    CmiSeries s;
    s.label = "run_" + std::to_string(run.run_id);
    std::vector<EpochTransition> trs;
    for (std::size_t e = 0; e < epochs; ++e) trs.push_back(transition_at(run, e));
    for (const auto& tr : trs) {
      s.t.push_back(tr.from.t);
      s.pi.push_back(momenta(tr, theta, spec, opts));
      s.energy.push_back(lagrangian(tr, theta, spec, opts).lagrangian);
      s.mass_diag.push_back(mass(tr.from, theta, spec, opts));
      s.force_series.push_back(force(tr, theta, spec, opts));
    }
    if (trs.size() >= 2) s.el_res = el_residual(trs, theta, spec, opts);
    out.push_back(std::move(s));
  }

  CmiSeries mean;
  mean.label = "mean";
  const double nr = static_cast<double>(out.size());
  const std::size_t n = spec.n_units();
  auto avg_rows = [&](auto getter, std::size_t rows) {
    std::vector<std::vector<double>> acc(rows, std::vector<double>(n, 0.0));
    for (const auto& s : out)
      for (std::size_t e = 0; e < rows; ++e)
        for (std::size_t u = 0; u < n; ++u) acc[e][u] += getter(s)[e][u] / nr;
    return acc;
  };
  mean.t = out.front().t;
  mean.pi = avg_rows([](const CmiSeries& s) -> const auto& { return s.pi; }, epochs);
  mean.mass_diag =
      avg_rows([](const CmiSeries& s) -> const auto& { return s.mass_diag; }, epochs);
  mean.force_series =
      avg_rows([](const CmiSeries& s) -> const auto& { return s.force_series; }, epochs);
  if (epochs >= 2)
    mean.el_res =
        avg_rows([](const CmiSeries& s) -> const auto& { return s.el_res; }, epochs - 1);
  mean.energy.assign(epochs, 0.0);
  for (const auto& s : out)
    for (std::size_t e = 0; e < epochs; ++e) mean.energy[e] += s.energy[e] / nr;
  out.push_back(std::move(mean));
  return out;
}

}  // namespace attrition
