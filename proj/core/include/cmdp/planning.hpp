#pragma once

#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp {

/// Result of backward induction over a T-step problem.
struct FiniteHorizonPlan {
  /// Expectation of V_0(x_0) over the initial distribution.
  double optimal_value = 0.0;
  /// Step x state argmax table, ties to the lowest action index.
  Policy policy;
  /// V_0 for every start state; counts rewards at t = 0..T.
  std::vector<double> start_values;
};

FiniteHorizonPlan optimal_finite_horizon(const Mdp& mdp, int horizon);

/// Exact expected reward sum over t = 0..T by forward propagation of the state
/// distribution from the model's initial distribution.
double policy_value(const Mdp& mdp, const Policy& policy, int horizon);

/// Same, from a fixed start state.
double policy_value_from(const Mdp& mdp, const Policy& policy, int horizon, int start_state);

}  // namespace cmdp
