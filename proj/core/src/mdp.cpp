#include "cmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmdp/errors.hpp"

namespace cmdp {

namespace {

void check_distribution(std::span<const double> probs, const std::string& what) {
  double total = 0.0;
  for (double p : probs) {
    detail::require(p >= 0.0 && p <= 1.0, what + " has an entry outside [0, 1]");
    total += p;
  }
  detail::require(std::abs(total - 1.0) <= kProbabilityTolerance, what + " does not sum to 1");
}

}  // namespace

TransitionKernel::TransitionKernel(int num_states, int num_actions, std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probs)) {
  detail::require(num_states >= 1 && num_actions >= 1, "kernel needs at least one state and action");
  detail::require(probs_.size() == static_cast<std::size_t>(num_states) * num_actions * num_states,
                  "kernel size does not match S*A*S");
  for (int s = 0; s < num_states_; ++s)
    for (int a = 0; a < num_actions_; ++a)
      check_distribution(row(s, a), "kernel row (" + std::to_string(s) + "," + std::to_string(a) + ")");
}

TransitionKernel TransitionKernel::uniform(int num_states, int num_actions) {
  detail::require(num_states >= 1 && num_actions >= 1, "kernel needs at least one state and action");
  std::vector<double> probs(static_cast<std::size_t>(num_states) * num_actions * num_states,
                            1.0 / num_states);
  return TransitionKernel(num_states, num_actions, std::move(probs));
}

void Mdp::validate() const {
  const int s = num_states();
  detail::require(s >= 1, "MDP has no states");
  detail::require(rewards.size() == static_cast<std::size_t>(s), "reward vector size mismatch");
  for (double r : rewards) detail::require(r >= 0.0 && r <= 1.0, "rewards must lie in [0, 1]");
  detail::require(initial_dist.size() == static_cast<std::size_t>(s), "initial distribution size mismatch");
  check_distribution(initial_dist, "initial distribution");
}

void ContextualMdp::validate() const {
  detail::require(!contexts.empty(), "CMDP needs at least one context");
  detail::require(context_dist.size() == contexts.size(), "context distribution size mismatch");
  check_distribution(context_dist, "context distribution");
  const Mdp& first = contexts.front();
  first.validate();
  for (const Mdp& m : contexts) {
    m.validate();
    detail::require(m.num_states() == first.num_states() && m.num_actions() == first.num_actions(),
                    "contexts must share state and action spaces");
    detail::require(m.rewards == first.rewards, "contexts must share rewards");
    detail::require(m.initial_dist == first.initial_dist, "contexts must share the initial distribution");
  }
}

Policy Policy::uniform(int num_actions) {
  detail::require(num_actions >= 1, "policy needs at least one action");
  Policy p;
  p.kind_ = Kind::kUniform;
  p.num_actions_ = num_actions;
  return p;
}

Policy Policy::deterministic(int num_actions, std::vector<int> action_by_state) {
  detail::require(num_actions >= 1, "policy needs at least one action");
  for (int a : action_by_state) detail::require(a >= 0 && a < num_actions, "policy action out of range");
  Policy p;
  p.kind_ = Kind::kDeterministic;
  p.num_actions_ = num_actions;
  p.num_states_ = static_cast<int>(action_by_state.size());
  p.actions_ = std::move(action_by_state);
  return p;
}

Policy Policy::stochastic(int num_actions, std::vector<double> probs) {
  detail::require(num_actions >= 1, "policy needs at least one action");
  detail::require(probs.size() % num_actions == 0, "stochastic policy table is not S x A");
  Policy p;
  p.kind_ = Kind::kStochastic;
  p.num_actions_ = num_actions;
  p.num_states_ = static_cast<int>(probs.size() / num_actions);
  for (int s = 0; s < p.num_states_; ++s)
    check_distribution(std::span<const double>(probs).subspan(static_cast<std::size_t>(s) * num_actions, num_actions),
                       "policy row " + std::to_string(s));
  p.probs_ = std::move(probs);
  return p;
}

Policy Policy::time_varying(int num_states, int num_actions, std::vector<int> actions) {
  detail::require(num_states >= 1 && num_actions >= 1, "policy needs states and actions");
  detail::require(actions.size() % num_states == 0, "time-varying table is not T x S");
  // An empty table is the plan for a zero-step horizon.
  for (int a : actions) detail::require(a >= 0 && a < num_actions, "policy action out of range");
  Policy p;
  p.kind_ = Kind::kTimeVarying;
  p.num_actions_ = num_actions;
  p.num_states_ = num_states;
  p.actions_ = std::move(actions);
  return p;
}

int Policy::table_horizon() const {
  return kind_ == Kind::kTimeVarying ? static_cast<int>(actions_.size()) / num_states_ : 0;
}

int Policy::action_at(int t, int s) const {
  switch (kind_) {
    case Kind::kDeterministic:
      return actions_[s];
    case Kind::kTimeVarying: {
      if (actions_.empty()) throw InvalidParameter("time-varying policy has no steps");
      const int step = std::min(t, table_horizon() - 1);
      return actions_[static_cast<std::size_t>(step) * num_states_ + s];
    }
    default:
      throw InvalidParameter("policy has no deterministic action table");
  }
}

double Policy::probability(int t, int s, int a) const {
  switch (kind_) {
    case Kind::kUniform:
      return 1.0 / num_actions_;
    case Kind::kStochastic:
      return probs_[static_cast<std::size_t>(s) * num_actions_ + a];
    default:
      return action_at(t, s) == a ? 1.0 : 0.0;
  }
}

int Policy::sample(int t, int s, Rng& rng) const {
  switch (kind_) {
    case Kind::kUniform:
      return rng.below(num_actions_);
    case Kind::kStochastic:
      return rng.categorical(
          std::span<const double>(probs_).subspan(static_cast<std::size_t>(s) * num_actions_, num_actions_));
    default:
      return action_at(t, s);
  }
}

void Policy::validate_for(int num_states, int num_actions) const {
  detail::require(num_actions_ == num_actions, "policy action count does not match the model");
  if (kind_ == Kind::kUniform) return;
  detail::require(num_states_ == num_states, "policy state count does not match the model");
}

double Trajectory::total_reward() const { return std::accumulate(rewards.begin(), rewards.end(), 0.0); }

void Trajectory::validate(std::span<const double> rewards_by_state) const {
  detail::require(states.size() == actions.size() + 1, "trajectory must have horizon+1 states");
  detail::require(rewards.size() == states.size(), "trajectory must have horizon+1 rewards");
  for (std::size_t t = 0; t < states.size(); ++t) {
    const int x = states[t];
    detail::require(x >= 0 && static_cast<std::size_t>(x) < rewards_by_state.size(), "state index out of range");
    detail::require(rewards[t] == rewards_by_state[x], "recorded reward differs from the state reward");
  }
}

}  // namespace cmdp
