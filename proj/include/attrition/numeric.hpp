#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace attrition {

// Fixed-tree pairwise summation. The reduction tree depends only on the
// element count, so the result is bit-identical however the leaves were
// produced (serially or by worker threads).
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// Locale-independent full-precision rendering (17 significant digits,
// enough for exact double round trips).
inline std::string format_full(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                 std::chars_format::general, 17);
  return std::string(buf, ptr);
}

// Table-style scientific notation with two significant digits and a
// compact exponent: -8.6E-5, 3.7E-3, 0.0E0.
inline std::string format_sci2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1E", value);
  std::string s(buf);
  const auto e = s.find('E');
  std::string mant = s.substr(0, e);
  std::string exp = s.substr(e + 1);
  bool neg_exp = false;
  std::size_t i = 0;
  if (exp[0] == '+' || exp[0] == '-') {
    neg_exp = exp[0] == '-';
    i = 1;
  }
  while (i + 1 < exp.size() && exp[i] == '0') ++i;
  return mant + "E" + (neg_exp ? "-" : "") + exp.substr(i);
}

inline double parse_double(std::string_view text, bool& ok) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  ok = ec == std::errc() && ptr == text.data() + text.size();
  return value;
}

}  // namespace attrition
