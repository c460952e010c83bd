#pragma once

#include <cstddef>
#include <vector>

#include "attrition/model.hpp"

namespace attrition {

// One run: uniformly sampled states, epoch length implied by the spec.
struct Trajectory {
  std::size_t run_id = 0;
  std::vector<StateVector> states;

  std::size_t n_epochs() const {
    return states.empty() ? 0 : states.size() - 1;
  }
};

using Ensemble = std::vector<Trajectory>;

// One (m_t, m_{t+dt}, dt) triple; the unit of likelihood evaluation.
struct EpochTransition {
  StateVector from;
  StateVector to;
  double dt;
};

inline EpochTransition transition_at(const Trajectory& run, std::size_t epoch) {
  const StateVector& a = run.states[epoch];
  const StateVector& b = run.states[epoch + 1];
  return EpochTransition{a, b, b.t - a.t};
}

}  // namespace attrition
