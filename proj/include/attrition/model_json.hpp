#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "attrition/errors.hpp"
#include "attrition/model.hpp"

namespace attrition {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) throw FormatError(where + ": unknown key \"" + it.key() + "\"");
  }
}

inline Interval interval_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError(where + ": expected [lower, upper]");
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline std::string side_name(Side s) { return s == Side::red ? "Red" : "Blue"; }
inline std::string kind_name(FireKind k) { return k == FireKind::point ? "Point" : "Area"; }

inline nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  for (const auto& u : spec.units())
    j["units"].push_back({{"name", u.name}, {"side", side_name(u.side)}});
  j["terms"] = nlohmann::json::array();
  for (const auto& t : spec.drift_terms())
    j["terms"].push_back({{"target", spec.unit_name(t.target)},
                          {"source", spec.unit_name(t.source)},
                          {"kind", kind_name(t.kind)}});
  j["noise"] = nlohmann::json::array();
  for (std::size_t u : spec.noise_units()) j["noise"].push_back(spec.unit_name(u));
  const auto& b = spec.bounds();
  j["bounds"] = {{"x", {b.point.lower, b.point.upper}},
                 {"y", {b.area.lower, b.area.upper}},
                 {"z", {b.noise.lower, b.noise.upper}}};
  j["dt"] = spec.dt();
  return j;
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("model spec: expected a JSON object");
  detail::reject_unknown_keys(j, {"units", "terms", "noise", "bounds", "dt"},
                              "model spec");
  for (const char* key : {"units", "terms", "noise", "dt"})
    if (!j.contains(key))
      throw FormatError(std::string("model spec: missing key \"") + key + "\"");

  std::vector<Unit> units;
  for (const auto& ju : j.at("units")) {
    detail::reject_unknown_keys(ju, {"name", "side"}, "model spec unit");
    const std::string side = ju.at("side").get<std::string>();
    if (side != "Red" && side != "Blue")
      throw FormatError("model spec: side must be Red or Blue, got " + side);
    units.push_back({ju.at("name").get<std::string>(),
                     side == "Red" ? Side::red : Side::blue});
  }
  std::vector<DriftTermSpec> terms;
  for (const auto& jt : j.at("terms")) {
    detail::reject_unknown_keys(jt, {"target", "source", "kind"}, "model spec term");
    const std::string kind = jt.at("kind").get<std::string>();
    if (kind != "Point" && kind != "Area")
      throw FormatError("model spec: kind must be Point or Area, got " + kind);
    terms.push_back({jt.at("target").get<std::string>(),
                     jt.at("source").get<std::string>(),
                     kind == "Point" ? FireKind::point : FireKind::area});
  }
  std::vector<std::string> noise;
  for (const auto& jn : j.at("noise")) noise.push_back(jn.get<std::string>());

  ModelBounds bounds;
  if (j.contains("bounds")) {
    const auto& jb = j.at("bounds");
    detail::reject_unknown_keys(jb, {"x", "y", "z"}, "model spec bounds");
    if (jb.contains("x")) bounds.point = detail::interval_from_json(jb["x"], "bounds.x");
    if (jb.contains("y")) bounds.area = detail::interval_from_json(jb["y"], "bounds.y");
    if (jb.contains("z")) bounds.noise = detail::interval_from_json(jb["z"], "bounds.z");
  }
  try {
    return ModelSpec(std::move(units), terms, noise, bounds, j.at("dt").get<double>());
  } catch (const UsageError& e) {
    throw FormatError(e.what());  // invalid document, not invalid usage
  }
}

// Coefficients keyed by names: {"x": {target: {source: v}}, "y": {...},
// "z": {unit: v}}. Must cover the spec's terms exactly.
inline nlohmann::json theta_to_json(const CoefficientSet& theta, const ModelSpec& spec) {
  nlohmann::json j;
  j["x"] = nlohmann::json::object();
  j["y"] = nlohmann::json::object();
  const auto& terms = spec.drift_terms();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const char* bucket = terms[k].kind == FireKind::point ? "x" : "y";
    j[bucket][spec.unit_name(terms[k].target)][spec.unit_name(terms[k].source)] =
        theta.term_coeff(k);
  }
  j["z"] = nlohmann::json::object();
  const auto& slots = spec.noise_units();
  for (std::size_t i = 0; i < slots.size(); ++i)
    j["z"][spec.unit_name(slots[i])] = theta.noise_coeff(i);
  return j;
}

inline CoefficientSet theta_from_json(const nlohmann::json& j, const ModelSpec& spec) {
  if (!j.is_object()) throw FormatError("coefficients: expected a JSON object");
  detail::reject_unknown_keys(j, {"x", "y", "z"}, "coefficients");
  CoefficientSet theta = CoefficientSet::zeros(spec);
  std::size_t seen = 0;
  for (const char* bucket : {"x", "y"}) {
    if (!j.contains(bucket)) continue;
    const FireKind kind = bucket[0] == 'x' ? FireKind::point : FireKind::area;
    for (auto t = j.at(bucket).begin(); t != j.at(bucket).end(); ++t) {
      for (auto s = t.value().begin(); s != t.value().end(); ++s) {
        const auto ti = spec.unit_index(t.key());
        const auto si = ti ? spec.unit_index(s.key()) : std::nullopt;
        const auto term = (ti && si) ? spec.find_term(*ti, *si) : std::nullopt;
        if (!term || spec.drift_terms()[*term].kind != kind)
          throw FormatError("coefficients: no " + std::string(bucket) + " term " +
                            t.key() + "<-" + s.key() + " in the model spec");
        theta.term_coeff(*term) = s.value().get<double>();
        ++seen;
      }
    }
  }
  if (seen != spec.n_drift_terms())
    throw FormatError("coefficients: expected " + std::to_string(spec.n_drift_terms()) +
                      " drift entries, got " + std::to_string(seen));
  if (!j.contains("z")) throw FormatError("coefficients: missing \"z\"");
  const auto& jz = j.at("z");
  const auto& slots = spec.noise_units();
  if (jz.size() != slots.size())
    throw FormatError("coefficients: z must name every noise unit exactly once");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string& name = spec.unit_name(slots[i]);
    if (!jz.contains(name))
      throw FormatError("coefficients: missing z entry for " + name);
    theta.noise_coeff(i) = jz.at(name).get<double>();
  }
  return theta;
}

}  // namespace attrition
