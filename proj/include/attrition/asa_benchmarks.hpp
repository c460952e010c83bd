#pragma once

#include <cmath>
#include <string>

#include "attrition/asa.hpp"
#include "attrition/errors.hpp"

namespace attrition {

struct Benchmark {
  CostFunction fn;
  double lower;
  double upper;
};

// Named objective functions for optimizer validation.
inline Benchmark make_benchmark(const std::string& name) {
  if (name == "quadratic")
    return {[](std::span<const double> x) {
              double s = 0.0;
              for (double v : x) s += (v - 0.3) * (v - 0.3);
              return s;
            },
            -1.0, 1.0};
  if (name == "sphere")
    return {[](std::span<const double> x) {
              double s = 0.0;
              for (double v : x) s += v * v;
              return s;
            },
            -1.0, 1.0};
  if (name == "rastrigin")
    return {[](std::span<const double> x) {
              double s = 0.0;
              for (double v : x)
                s += v * v - 10.0 * std::cos(2.0 * M_PI * v) + 10.0;
              return s;
            },
            -5.12, 5.12};
  throw UsageError("unknown benchmark function: " + name);
}

inline AsaBounds benchmark_bounds(const Benchmark& b, std::size_t dims) {
  return AsaBounds{std::vector<double>(dims, b.lower),
                   std::vector<double>(dims, b.upper)};
}

}  // namespace attrition
