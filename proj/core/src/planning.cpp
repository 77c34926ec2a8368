#include "cmdp/planning.hpp"

#include <algorithm>

#include "cmdp/errors.hpp"

namespace cmdp {

FiniteHorizonPlan optimal_finite_horizon(const Mdp& mdp, int horizon) {
  detail::require(horizon >= 0, "horizon must be nonnegative");
  const int num_states = mdp.num_states();
  const int num_actions = mdp.num_actions();

  std::vector<double> value(mdp.rewards);
  std::vector<double> next_value(static_cast<std::size_t>(num_states));
  std::vector<int> table(static_cast<std::size_t>(horizon) * num_states);

  for (int t = horizon - 1; t >= 0; --t) {
    for (int x = 0; x < num_states; ++x) {
      double best = 0.0;
      int best_action = 0;
      for (int a = 0; a < num_actions; ++a) {
        const auto row = mdp.kernel.row(x, a);
        double q = 0.0;
        for (int y = 0; y < num_states; ++y) q += row[y] * value[y];
        if (a == 0 || q > best) {
          best = q;
          best_action = a;
        }
      }
      next_value[x] = mdp.rewards[x] + best;
      table[static_cast<std::size_t>(t) * num_states + x] = best_action;
    }
    value.swap(next_value);
  }

  FiniteHorizonPlan plan;
  for (int x = 0; x < num_states; ++x) plan.optimal_value += mdp.initial_dist[x] * value[x];
  plan.policy = Policy::time_varying(num_states, num_actions, std::move(table));
  plan.start_values = std::move(value);
  return plan;
}

namespace {

double propagate(const Mdp& mdp, const Policy& policy, int horizon, std::vector<double> dist) {
  const int num_states = mdp.num_states();
  const int num_actions = mdp.num_actions();
  std::vector<double> next(static_cast<std::size_t>(num_states));
  double total = 0.0;
  for (int t = 0;; ++t) {
    for (int x = 0; x < num_states; ++x) total += dist[x] * mdp.rewards[x];
    if (t == horizon) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int x = 0; x < num_states; ++x) {
      if (dist[x] == 0.0) continue;
      for (int a = 0; a < num_actions; ++a) {
        const double weight = dist[x] * policy.probability(t, x, a);
        if (weight == 0.0) continue;
        const auto row = mdp.kernel.row(x, a);
        for (int y = 0; y < num_states; ++y) next[y] += weight * row[y];
      }
    }
    dist.swap(next);
  }
  return total;
}

}  // namespace

double policy_value(const Mdp& mdp, const Policy& policy, int horizon) {
  detail::require(horizon >= 0, "horizon must be nonnegative");
  policy.validate_for(mdp.num_states(), mdp.num_actions());
  return propagate(mdp, policy, horizon, mdp.initial_dist);
}

double policy_value_from(const Mdp& mdp, const Policy& policy, int horizon, int start_state) {
  detail::require(horizon >= 0, "horizon must be nonnegative");
  detail::require(start_state >= 0 && start_state < mdp.num_states(), "start state out of range");
  policy.validate_for(mdp.num_states(), mdp.num_actions());
  std::vector<double> dist(static_cast<std::size_t>(mdp.num_states()), 0.0);
  dist[start_state] = 1.0;
  return propagate(mdp, policy, horizon, std::move(dist));
}

}  // namespace cmdp
