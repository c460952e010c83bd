#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "attrition/errors.hpp"
#include "attrition/rng.hpp"

namespace attrition {

// Adaptive simulated annealing (very-fast-reannealing family): bounded
// global minimizer with per-parameter generation temperatures
//   T_i(k) = t0_i * exp(-c_i * k^(1/D)),
// fat-tailed candidate steps with full-box support, Metropolis
// acceptance on cost differences, and periodic sensitivity reannealing.

using CostFunction = std::function<double(std::span<const double>)>;

struct AsaBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct AsaConfig {
  std::vector<double> t0_gen;    // empty -> 1.0 per parameter
  std::vector<double> c;         // empty -> 20.0 per parameter
  double t0_accept = 0.0;        // 0 = auto: largest |dC| observed so far
  long reanneal_every = 100;     // accepted points between reanneals
  long max_generated = 200000;
  double cost_repeat_eps = 1e-8;
  int cost_repeat_count = 0;     // 0 disables the small-improvement stop rule
  std::uint64_t seed = 1;
};

struct AsaTracePoint {
  long generated;
  long accepted;
  double best_cost;
};

struct AsaResult {
  std::vector<double> best;
  double best_cost = std::numeric_limits<double>::infinity();
  long generated = 0;
  long accepted = 0;
  long rejected = 0;
  std::vector<AsaTracePoint> trace;  // best-cost improvements, non-increasing
};

class AsaChain {
 public:
  // Infeasible candidates may signal by returning NaN/inf; they are
  // treated as this penalty and never accepted from a feasible point.
  static constexpr double kInfeasiblePenalty = 1e30;

  AsaChain(CostFunction cost_fn, AsaBounds bounds, AsaConfig config)
      : f_(std::move(cost_fn)),
        bounds_(std::move(bounds)),
        cfg_(std::move(config)),
        rng_(cfg_.seed) {
    dim_ = bounds_.lower.size();
    if (dim_ < 1 || bounds_.upper.size() != dim_)
      throw UsageError("asa: bounds must cover at least one parameter");
    for (std::size_t i = 0; i < dim_; ++i)
      if (!(std::isfinite(bounds_.lower[i]) && std::isfinite(bounds_.upper[i]) &&
            bounds_.lower[i] < bounds_.upper[i]))
        throw UsageError("asa: bounds must be finite with lower < upper");
    if (cfg_.t0_gen.empty()) cfg_.t0_gen.assign(dim_, 1.0);
    if (cfg_.c.empty()) cfg_.c.assign(dim_, 20.0);
    if (cfg_.t0_gen.size() != dim_ || cfg_.c.size() != dim_)
      throw UsageError("asa: per-parameter config vectors must match the dimension");
    for (std::size_t i = 0; i < dim_; ++i)
      if (!(cfg_.t0_gen[i] > 0.0) || !(cfg_.c[i] > 0.0))
        throw UsageError("asa: temperatures and annealing scales must be > 0");
    if (cfg_.max_generated < 1 || cfg_.reanneal_every < 1)
      throw UsageError("asa: budgets must be >= 1");
    if (!(cfg_.cost_repeat_eps > 0.0))
      throw UsageError("asa: cost_repeat_eps must be > 0");
    if (cfg_.t0_accept < 0.0) throw UsageError("asa: t0_accept must be >= 0");

    k_gen_.assign(dim_, 0.0);
    current_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      current_[i] = bounds_.lower[i] +
                    rng_.uniform01() * (bounds_.upper[i] - bounds_.lower[i]);
    current_cost_ = f_(current_);
    if (!std::isfinite(current_cost_))
      throw UsageError("asa: cost is not finite at the initial point");
    best_ = current_;
    best_cost_ = current_cost_;
    accept_scale_ = cfg_.t0_accept;  // 0 keeps the auto (max |dC|) rule
  }

  std::size_t dimension() const { return dim_; }
  const std::vector<double>& current() const { return current_; }
  double current_cost() const { return current_cost_; }
  const std::vector<double>& best() const { return best_; }
  double best_cost() const { return best_cost_; }
  long generated() const { return generated_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

  // The annealing step shape: maps u ~ U(0,1) to y in [-1, 1] with
  // density concentrated near 0 at low temperature but never losing the
  // tails.
  static double step_shape(double u, double temperature) {
    const double centered = u - 0.5;
    const double sign = centered > 0.0 ? 1.0 : (centered < 0.0 ? -1.0 : 0.0);
    return sign * temperature *
           (std::pow(1.0 + 1.0 / temperature, std::abs(2.0 * u - 1.0)) - 1.0);
  }

  double generation_temperature(std::size_t i) const {
    const double t =
        cfg_.t0_gen[i] *
        std::exp(-cfg_.c[i] * std::pow(k_gen_[i], 1.0 / static_cast<double>(dim_)));
    return t > kMinTemp ? t : kMinTemp;
  }

  double acceptance_temperature() const {
    const double scale = accept_scale_ > 0.0 ? accept_scale_ : kMinTemp;
    const double t =
        scale *
        std::exp(-cfg_.c[0] * std::pow(k_accept_, 1.0 / static_cast<double>(dim_)));
    return t > kMinTemp ? t : kMinTemp;
  }

  // Draws each coordinate from the step distribution at its current
  // temperature, redrawing out-of-box coordinates (up to 1000 tries,
  // then clamping the last draw into the box).
  std::vector<double> generate_candidate() {
    std::vector<double> cand(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      const double range = bounds_.upper[i] - bounds_.lower[i];
      const double t = generation_temperature(i);
      double value = current_[i];
      bool inside = false;
      for (int tries = 0; tries < 1000 && !inside; ++tries) {
        value = current_[i] + step_shape(rng_.uniform01(), t) * range;
        inside = value >= bounds_.lower[i] && value <= bounds_.upper[i];
      }
      if (!inside)
        value = std::min(std::max(value, bounds_.lower[i]), bounds_.upper[i]);
      cand[i] = value;
    }
    return cand;
  }

  // Metropolis rule on the cost difference. Acceptance moves the chain
  // and advances both the acceptance index and every generation index.
  bool accept(std::span<const double> candidate, double candidate_cost) {
    double cc = candidate_cost;
    if (!std::isfinite(cc)) cc = kInfeasiblePenalty;
    const double d_cost = cc - current_cost_;
    if (cfg_.t0_accept == 0.0 && std::abs(d_cost) > accept_scale_)
      accept_scale_ = std::abs(d_cost);
    bool take = d_cost <= 0.0;
    if (!take)
      take = rng_.uniform01() < std::exp(-d_cost / acceptance_temperature());
    if (take) {
      current_.assign(candidate.begin(), candidate.end());
      current_cost_ = cc;
      ++accepted_;
      k_accept_ += 1.0;
      for (double& k : k_gen_) k += 1.0;
    } else {
      ++rejected_;
    }
    return take;
  }

  // Rescales the generation temperatures by cost sensitivities at the
  // best point (insensitive directions get reheated, capped at t0) and
  // rewinds the acceptance index to the scale of the last improvement.
  void reanneal() {
    std::vector<double> s(dim_, 0.0);
    double s_max = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double h = 1e-6 * (bounds_.upper[i] - bounds_.lower[i]);
      std::vector<double> probe = best_;
      probe[i] = best_[i] + h;
      const double fp = f_(probe);
      probe[i] = best_[i] - h;
      const double fm = f_(probe);
      s[i] = std::isfinite(fp) && std::isfinite(fm) ? std::abs(fp - fm) / (2.0 * h)
                                                    : 0.0;
      if (s[i] < kSensitivityFloor) s[i] = kSensitivityFloor;
      if (s[i] > s_max) s_max = s[i];
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      double t = generation_temperature(i) * (s_max / s[i]);
      if (t > cfg_.t0_gen[i]) t = cfg_.t0_gen[i];
      if (t < kMinTemp) t = kMinTemp;
      k_gen_[i] = std::pow(std::log(cfg_.t0_gen[i] / t) / cfg_.c[i],
                           static_cast<double>(dim_));
    }
    const double scale = accept_scale_ > 0.0 ? accept_scale_ : kMinTemp;
    double target = last_improvement_;
    if (target < 1e-12) target = 1e-12;
    if (target > scale) target = scale;
    k_accept_ = std::pow(std::log(scale / target) / cfg_.c[0],
                         static_cast<double>(dim_));
  }

  AsaResult run() {
    AsaResult result;
    result.trace.push_back({0, 0, best_cost_});
    int small_improvements = 0;
    while (generated_ < cfg_.max_generated) {
      const auto cand = generate_candidate();
      double cc = f_(cand);
      ++generated_;
      if (accept(cand, cc)) {
        if (current_cost_ < best_cost_) {
          last_improvement_ = best_cost_ - current_cost_;
          best_ = current_;
          best_cost_ = current_cost_;
          result.trace.push_back({generated_, accepted_, best_cost_});
          if (cfg_.cost_repeat_count > 0) {
            if (last_improvement_ < cfg_.cost_repeat_eps) {
              if (++small_improvements >= cfg_.cost_repeat_count) break;
            } else {
              small_improvements = 0;
            }
          }
        }
        if (accepted_ % cfg_.reanneal_every == 0) reanneal();
      }
    }
    result.best = best_;
    result.best_cost = best_cost_;
    result.generated = generated_;
    result.accepted = accepted_;
    result.rejected = rejected_;
    return result;
  }

 private:
  static constexpr double kMinTemp = 1e-300;
  static constexpr double kSensitivityFloor = 1e-12;

  CostFunction f_;
  AsaBounds bounds_;
  AsaConfig cfg_;
  Xoshiro256pp rng_;
  std::size_t dim_ = 0;

  std::vector<double> k_gen_;
  double k_accept_ = 0.0;
  double accept_scale_ = 0.0;
  double last_improvement_ = 0.0;

  std::vector<double> current_;
  double current_cost_ = 0.0;
  std::vector<double> best_;
  double best_cost_ = 0.0;

  long generated_ = 0;
  long accepted_ = 0;
  long rejected_ = 0;
};

inline AsaResult minimize(CostFunction cost_fn, AsaBounds bounds, AsaConfig config) {
  AsaChain chain(std::move(cost_fn), std::move(bounds), std::move(config));
  return chain.run();
}

}  // namespace attrition
