#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "attrition/fit.hpp"
#include "attrition/model.hpp"
#include "attrition/model_json.hpp"
#include "attrition/numeric.hpp"

namespace attrition {

// Coefficient matrix in the classic report shape: one row per equation,
// one column per source unit plus the noise column, a dash where the
// model has no term. Human-facing values use 2-digit scientific notation.
inline std::string render_fit_table(const CoefficientSet& theta, const ModelSpec& spec) {
  const std::size_t n = spec.n_units();
  const int w = 10;
  std::ostringstream out;
  auto cell = [&](const std::string& s) {
    out << std::string(s.size() >= w ? 1 : w - s.size(), ' ') << s;
  };
  cell("");
  for (const auto& u : spec.units()) cell(u.name);
  cell("eta");
  out << "\n";
  for (std::size_t t = 0; t < n; ++t) {
    cell(spec.unit_name(t));
    for (std::size_t s = 0; s < n; ++s) {
      const auto term = spec.find_term(t, s);
      cell(term ? format_sci2(theta.term_coeff(*term)) : "-");
    }
    const auto& slots = spec.noise_units();
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i] == t) cell(format_sci2(theta.noise_coeff(i)));
    out << "\n";
  }
  return out.str();
}

inline std::string render_fit_report(const FitReport& report, const ModelSpec& spec) {
  std::ostringstream out;
  out << "fitted coefficients (rows: equations, columns: firing units, eta: noise)\n";
  out << render_fit_table(report.coefficients, spec);
  out << "final cost        " << format_full(report.final_cost) << "\n";
  out << "generated points  " << report.generated << "\n";
  out << "accepted points   " << report.accepted << "\n";
  out << "clamp events      " << report.clamp_events << "\n";
  std::string hits;
  for (std::size_t i = 0; i < report.bounds_hit.size(); ++i)
    if (report.bounds_hit[i]) hits += (hits.empty() ? "" : ", ") + std::to_string(i);
  out << "bounds hit        " << (hits.empty() ? "none" : hits) << "\n";
  return out.str();
}

inline nlohmann::json fit_report_to_json(const FitReport& report, const ModelSpec& spec) {
  nlohmann::json j;
  j["coefficients"] = theta_to_json(report.coefficients, spec);
  j["final_cost"] = report.final_cost;
  j["generated"] = report.generated;
  j["accepted"] = report.accepted;
  j["clamp_events"] = report.clamp_events;
  j["bounds_hit"] = report.bounds_hit;
  return j;
}

// Machine-facing coefficient listing, one row per parameter.
inline void write_coefficients_csv(const CoefficientSet& theta, const ModelSpec& spec,
                                   std::ostream& out) {
  out << "target,source,kind,value\n";
  const auto& terms = spec.drift_terms();
  for (std::size_t k = 0; k < terms.size(); ++k)
    out << spec.unit_name(terms[k].target) << "," << spec.unit_name(terms[k].source)
        << "," << (terms[k].kind == FireKind::point ? "point" : "area") << ","
        << format_full(theta.term_coeff(k)) << "\n";
  const auto& slots = spec.noise_units();
  for (std::size_t i = 0; i < slots.size(); ++i)
    out << spec.unit_name(slots[i]) << ",,noise," << format_full(theta.noise_coeff(i))
        << "\n";
}

inline void write_coefficients_csv(const CoefficientSet& theta, const ModelSpec& spec,
                                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_coefficients_csv(theta, spec, out);
}

}  // namespace attrition
