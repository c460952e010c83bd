#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "attrition/errors.hpp"
#include "attrition/momenta.hpp"
#include "attrition/numeric.hpp"
#include "attrition/trajectory.hpp"

namespace attrition {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string ensemble_header(const ModelSpec& spec) {
  std::string h = "run,t";
  for (const auto& u : spec.units()) h += "," + u.name;
  return h;
}

}  // namespace detail

// Trajectory CSV: header `run,t,<unit...>`, rows sorted by (run, t),
// values at 17 significant digits (lossless round trip), LF endings.
inline void write_ensemble_csv(const Ensemble& ensemble, const ModelSpec& spec,
                               std::ostream& out) {
  out << detail::ensemble_header(spec) << "\n";
  for (const auto& run : ensemble)
    for (const auto& state : run.states) {
      out << run.run_id << "," << format_full(state.t);
      for (double m : state.m) out << "," << format_full(m);
      out << "\n";
    }
}

inline void write_ensemble_csv(const Ensemble& ensemble, const ModelSpec& spec,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_ensemble_csv(ensemble, spec, out);
}

inline Ensemble read_ensemble_csv(std::istream& in, const ModelSpec& spec) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("line 1: empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string expect = detail::ensemble_header(spec);
  if (line != expect)
    throw FormatError("line 1: header mismatch, expected \"" + expect + "\"");

  Ensemble ensemble;
  long line_no = 1;
  const std::size_t n = spec.n_units();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != n + 2)
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(n + 2) + " fields, got " +
                        std::to_string(fields.size()));
    bool ok = false;
    const double run_field = parse_double(fields[0], ok);
    const auto run_id = static_cast<std::size_t>(run_field);
    if (!ok || run_field < 0 || run_field != static_cast<double>(run_id))
      throw FormatError("line " + std::to_string(line_no) + ": bad run id \"" +
                        fields[0] + "\"");
    StateVector state;
    state.t = parse_double(fields[1], ok);
    if (!ok) throw FormatError("line " + std::to_string(line_no) + ": bad time");
    state.m.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      state.m[u] = parse_double(fields[u + 2], ok);
      if (!ok)
        throw FormatError("line " + std::to_string(line_no) + ": bad count for " +
                          spec.unit_name(u));
      if (state.m[u] < 0.0)
        throw FormatError("line " + std::to_string(line_no) + ": negative count for " +
                          spec.unit_name(u));
    }
    if (ensemble.empty() || ensemble.back().run_id != run_id) {
      if (!ensemble.empty() && run_id < ensemble.back().run_id)
        throw FormatError("line " + std::to_string(line_no) +
                          ": rows not sorted by run");
      for (const auto& prev : ensemble)
        if (prev.run_id == run_id)
          throw FormatError("line " + std::to_string(line_no) + ": run " +
                            std::to_string(run_id) + " appears twice");
      ensemble.push_back(Trajectory{run_id, {}});
    }
    auto& run = ensemble.back();
    if (!run.states.empty() && state.t <= run.states.back().t)
      throw FormatError("line " + std::to_string(line_no) +
                        ": time not increasing within run " + std::to_string(run_id));
    run.states.push_back(std::move(state));
  }
  if (ensemble.empty()) throw FormatError("trajectory file has no data rows");

  for (const auto& run : ensemble) {
    if (run.states.size() < 2)
      throw FormatError("run " + std::to_string(run.run_id) +
                        " has fewer than 2 states");
    const double dt0 = run.states[1].t - run.states[0].t;
    for (std::size_t e = 0; e + 1 < run.states.size(); ++e) {
      const double dt = run.states[e + 1].t - run.states[e].t;
      if (std::abs(dt - dt0) > 1e-9 * std::abs(dt0))
        throw FormatError("run " + std::to_string(run.run_id) +
                          ": non-uniform epoch spacing");
    }
  }
  return ensemble;
}

inline Ensemble read_ensemble_csv(const std::filesystem::path& path,
                                  const ModelSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_ensemble_csv(in, spec);
}

// CMI CSV: header `series,t,<unit...>`; one row per epoch per series,
// run series first, then the mean.
inline void write_cmi_csv(const std::vector<CmiSeries>& series, const ModelSpec& spec,
                          std::ostream& out) {
  out << "series,t";
  for (const auto& u : spec.units()) out << "," << u.name;
  out << "\n";
  for (const auto& s : series)
    for (std::size_t e = 0; e < s.pi.size(); ++e) {
      out << s.label << "," << format_full(s.t[e]);
      for (double v : s.pi[e]) out << "," << format_full(v);
      out << "\n";
    }
}

inline void write_cmi_csv(const std::vector<CmiSeries>& series, const ModelSpec& spec,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_cmi_csv(series, spec, out);
}

}  // namespace attrition
