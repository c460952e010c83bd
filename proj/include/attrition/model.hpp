#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attrition/errors.hpp"

namespace attrition {

enum class Side { red, blue };
enum class FireKind { point, area };

struct Unit {
  std::string name;
  Side side;
};

// One drift term of the rate equations: target's attrition sourced by
// `source`. Point fire contributes x*m[source]; area fire y*m[source]*m[target].
struct DriftTerm {
  std::size_t target;
  std::size_t source;
  FireKind kind;
};

// Same, by unit name; the form used at construction and in JSON.
struct DriftTermSpec {
  std::string target;
  std::string source;
  FireKind kind = FireKind::point;
};

struct Interval {
  double lower;
  double upper;
};

// Fit bounds per coefficient kind, expanded per-parameter on demand.
struct ModelBounds {
  Interval point{-0.1, 0.1};
  Interval area{-0.1, 0.1};
  Interval noise{1e-5, 0.1};
};

// State space plus the structure of the coupled attrition equations:
// which drift terms exist (the dash mask), one diagonal noise
// coefficient per unit, fit bounds, and the epoch length in minutes.
class ModelSpec {
 public:
  ModelSpec(std::vector<Unit> units, const std::vector<DriftTermSpec>& terms,
            const std::vector<std::string>& noise_units, ModelBounds bounds,
            double dt)
      : units_(std::move(units)), bounds_(bounds), dt_(dt) {
    if (units_.empty()) throw UsageError("model spec: no units declared");
    for (std::size_t i = 0; i < units_.size(); ++i)
      for (std::size_t j = i + 1; j < units_.size(); ++j)
        if (units_[i].name == units_[j].name)
          throw UsageError("model spec: duplicate unit name " + units_[i].name);
    for (const auto& t : terms) {
      DriftTerm resolved{require_index(t.target), require_index(t.source), t.kind};
      if (resolved.target == resolved.source)
        throw UsageError("model spec: self-fire term on unit " + t.target);
      for (const auto& prev : terms_)
        if (prev.target == resolved.target && prev.source == resolved.source &&
            prev.kind == resolved.kind)
          throw UsageError("model spec: duplicate term " + t.target + "<-" + t.source);
      terms_.push_back(resolved);
    }
    if (noise_units.size() != units_.size())
      throw UsageError("model spec: noise list must name every unit exactly once");
    std::vector<bool> seen(units_.size(), false);
    for (const auto& name : noise_units) {
      const std::size_t i = require_index(name);
      if (seen[i]) throw UsageError("model spec: unit " + name + " listed twice in noise");
      seen[i] = true;
      noise_units_.push_back(i);
    }
    for (Interval b : {bounds_.point, bounds_.area, bounds_.noise})
      if (!(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper))
        throw UsageError("model spec: bounds must be finite with lower < upper");
    if (!(dt_ > 0.0) || !std::isfinite(dt_))
      throw UsageError("model spec: dt must be a positive number of minutes");
  }

  std::size_t n_units() const { return units_.size(); }
  const std::vector<Unit>& units() const { return units_; }
  const std::string& unit_name(std::size_t i) const { return units_[i].name; }
  Side unit_side(std::size_t i) const { return units_[i].side; }

  std::optional<std::size_t> unit_index(std::string_view name) const {
    for (std::size_t i = 0; i < units_.size(); ++i)
      if (units_[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t require_index(std::string_view name) const {
    if (auto i = unit_index(name)) return *i;
    throw UsageError("model spec: unknown unit " + std::string(name));
  }

  const std::vector<DriftTerm>& drift_terms() const { return terms_; }
  std::size_t n_drift_terms() const { return terms_.size(); }
  const std::vector<std::size_t>& noise_units() const { return noise_units_; }

  std::optional<std::size_t> find_term(std::size_t target, std::size_t source) const {
    for (std::size_t k = 0; k < terms_.size(); ++k)
      if (terms_[k].target == target && terms_[k].source == source) return k;
    return std::nullopt;
  }

  double dt() const { return dt_; }
  const ModelBounds& bounds() const { return bounds_; }

  Interval drift_term_bounds(std::size_t term) const {
    return terms_[term].kind == FireKind::point ? bounds_.point : bounds_.area;
  }
  Interval noise_bounds(std::size_t) const { return bounds_.noise; }

  // Fit parameter order: drift terms first, then one z per noise slot.
  std::size_t n_params() const { return terms_.size() + noise_units_.size(); }

 private:
  std::vector<Unit> units_;
  std::vector<DriftTerm> terms_;
  std::vector<std::size_t> noise_units_;
  ModelBounds bounds_;
  double dt_;
};

// Unit counts at a point in time, in ModelSpec unit order.
struct StateVector {
  double t = 0.0;
  std::vector<double> m;
};

// The fit parameters theta: one value per drift term (x or y by the
// term's kind) and one diagonal noise coefficient z per noise slot.
class CoefficientSet {
 public:
  CoefficientSet() = default;
  CoefficientSet(std::vector<double> drift, std::vector<double> noise)
      : drift_(std::move(drift)), noise_(std::move(noise)) {}

  static CoefficientSet zeros(const ModelSpec& spec) {
    return CoefficientSet(std::vector<double>(spec.n_drift_terms(), 0.0),
                          std::vector<double>(spec.noise_units().size(), 0.0));
  }

  static CoefficientSet from_flat(const ModelSpec& spec, std::span<const double> flat) {
    if (flat.size() != spec.n_params())
      throw UsageError("coefficient set: flat vector size mismatch");
    const std::size_t nt = spec.n_drift_terms();
    return CoefficientSet(std::vector<double>(flat.begin(), flat.begin() + nt),
                          std::vector<double>(flat.begin() + nt, flat.end()));
  }

  std::vector<double> to_flat() const {
    std::vector<double> flat(drift_);
    flat.insert(flat.end(), noise_.begin(), noise_.end());
    return flat;
  }

  bool conforms_to(const ModelSpec& spec) const {
    return drift_.size() == spec.n_drift_terms() &&
           noise_.size() == spec.noise_units().size();
  }

  double term_coeff(std::size_t term) const { return drift_[term]; }
  double& term_coeff(std::size_t term) { return drift_[term]; }
  double noise_coeff(std::size_t slot) const { return noise_[slot]; }
  double& noise_coeff(std::size_t slot) { return noise_[slot]; }
  const std::vector<double>& term_coeffs() const { return drift_; }
  const std::vector<double>& noise_coeffs() const { return noise_; }

  // Named lookups (slow path; report/JSON code).
  double fire_coeff(const ModelSpec& spec, std::string_view target,
                    std::string_view source) const {
    const auto t = spec.require_index(target);
    const auto s = spec.require_index(source);
    if (auto k = spec.find_term(t, s)) return drift_[*k];
    throw UsageError("coefficient set: no term " + std::string(target) + "<-" +
                     std::string(source));
  }

  double noise_for(const ModelSpec& spec, std::string_view unit) const {
    const auto u = spec.require_index(unit);
    const auto& slots = spec.noise_units();
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i] == u) return noise_[i];
    throw UsageError("coefficient set: no noise slot for " + std::string(unit));
  }

 private:
  std::vector<double> drift_;
  std::vector<double> noise_;
};

inline void check_conformance(const StateVector& state, const CoefficientSet& theta,
                              const ModelSpec& spec) {
  if (state.m.size() != spec.n_units())
    throw UsageError("state dimension does not match model spec");
  if (!theta.conforms_to(spec))
    throw UsageError("coefficient set does not match model spec");
}

// Drift rates g^G in units per minute. Point terms are linear in the
// source count; area terms carry the source*target product.
inline void drift_into(std::span<double> out, std::span<const double> m,
                       const CoefficientSet& theta, const ModelSpec& spec) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto& terms = spec.drift_terms();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const DriftTerm& t = terms[k];
    const double c = theta.term_coeff(k);
    out[t.target] += t.kind == FireKind::point ? c * m[t.source]
                                               : c * m[t.source] * m[t.target];
  }
}

inline std::vector<double> drift(const StateVector& state, const CoefficientSet& theta,
                                 const ModelSpec& spec) {
  check_conformance(state, theta, spec);
  std::vector<double> g(spec.n_units());
  drift_into(g, state.m, theta, spec);
  return g;
}

// Diagonal diffusion: amplitude z^G * m^G per noise slot's unit, and the
// per-unit covariance diagonal (z^G * m^G)^2.
struct Diffusion {
  std::vector<double> amplitude;
  std::vector<double> variance;
};

inline Diffusion diffusion(const StateVector& state, const CoefficientSet& theta,
                           const ModelSpec& spec) {
  check_conformance(state, theta, spec);
  Diffusion d{std::vector<double>(spec.n_units(), 0.0),
              std::vector<double>(spec.n_units(), 0.0)};
  const auto& slots = spec.noise_units();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::size_t u = slots[i];
    const double a = theta.noise_coeff(i) * state.m[u];
    d.amplitude[u] = a;
    d.variance[u] = a * a;
  }
  return d;
}

// dg^G/dm^G', row-major n x n.
inline std::vector<double> drift_jacobian(const StateVector& state,
                                          const CoefficientSet& theta,
                                          const ModelSpec& spec) {
  check_conformance(state, theta, spec);
  const std::size_t n = spec.n_units();
  std::vector<double> jac(n * n, 0.0);
  const auto& terms = spec.drift_terms();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const DriftTerm& t = terms[k];
    const double c = theta.term_coeff(k);
    if (t.kind == FireKind::point) {
      jac[t.target * n + t.source] += c;
    } else {
      jac[t.target * n + t.source] += c * state.m[t.target];
      jac[t.target * n + t.target] += c * state.m[t.source];
    }
  }
  return jac;
}

// X^G = ln m^G (Eq.-3 coordinates). Requires strictly positive counts.
inline StateVector log_transform(const StateVector& state) {
  StateVector x{state.t, std::vector<double>(state.m.size())};
  for (std::size_t i = 0; i < state.m.size(); ++i) {
    if (!(state.m[i] > 0.0))
      throw std::domain_error("log transform requires all counts > 0");
    x.m[i] = std::log(state.m[i]);
  }
  return x;
}

inline StateVector exp_transform(const StateVector& x) {
  StateVector state{x.t, std::vector<double>(x.m.size())};
  for (std::size_t i = 0; i < x.m.size(); ++i) state.m[i] = std::exp(x.m[i]);
  return state;
}

// The built-in five-unit Red/Blue scenario: two Red systems attrited by
// the three Blue systems and vice versa, all point fire, 5-minute epochs.
inline ModelSpec janus5() {
  std::vector<Unit> units{{"RT", Side::red},
                          {"RBMP", Side::red},
                          {"BT", Side::blue},
                          {"BAPC", Side::blue},
                          {"BTOW", Side::blue}};
  std::vector<DriftTermSpec> terms;
  for (const char* red : {"RT", "RBMP"})
    for (const char* blue : {"BT", "BAPC", "BTOW"})
      terms.push_back({red, blue, FireKind::point});
  for (const char* blue : {"BT", "BAPC", "BTOW"})
    for (const char* red : {"RT", "RBMP"})
      terms.push_back({blue, red, FireKind::point});
  return ModelSpec(std::move(units), terms, {"RT", "RBMP", "BT", "BAPC", "BTOW"},
                   ModelBounds{}, 5.0);
}

// Published fit for the janus5 scenario (the report-table default).
// Blue noise values carry the printed negative sign; only z^2 enters the
// dynamics, so the sign is cosmetic.
inline CoefficientSet janus5_coefficients() {
  return CoefficientSet(
      {// RT row: sourced by BT, BAPC, BTOW
       -8.6e-5, -5.9e-3, -3.6e-2,
       // RBMP row
       -2.7e-3, -2.2e-2, -3.1e-2,
       // BT row: sourced by RT, RBMP
       -6.7e-4, -4.7e-3,
       // BAPC row
       -1.0e-4, -4.0e-3,
       // BTOW row
       -2.1e-3, -1.2e-6},
      {3.7e-3, 4.3e-3, -7.9e-3, -6.7e-3, -1.3e-2});
}

}  // namespace attrition
