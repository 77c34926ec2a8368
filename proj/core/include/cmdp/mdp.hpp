#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cmdp/random.hpp"

namespace cmdp {

inline constexpr double kProbabilityTolerance = 1e-9;

/// Tabular transition probabilities p(s' | s, a), stored row-major in
/// (s, a, s') order.
class TransitionKernel {
 public:
  TransitionKernel() = default;

  /// Validates shape, range and row normalization.
  TransitionKernel(int num_states, int num_actions, std::vector<double> probs);

  /// Every row set to the uniform distribution.
  static TransitionKernel uniform(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  std::span<const double> row(int s, int a) const {
    return {probs_.data() + row_offset(s, a), static_cast<std::size_t>(num_states_)};
  }
  double operator()(int s, int a, int next) const { return probs_[row_offset(s, a) + next]; }

  const std::vector<double>& flat() const { return probs_; }

  friend bool operator==(const TransitionKernel&, const TransitionKernel&) = default;

 private:
  std::size_t row_offset(int s, int a) const {
    return (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_;
  }

  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> probs_;
};

/// A tabular MDP with state rewards in [0, 1].
struct Mdp {
  TransitionKernel kernel;
  std::vector<double> rewards;
  std::vector<double> initial_dist;

  int num_states() const { return kernel.num_states(); }
  int num_actions() const { return kernel.num_actions(); }

  /// Throws InvalidParameter when sizes or probability vectors are inconsistent.
  void validate() const;
};

/// K MDPs sharing state/action spaces, rewards and initial distribution.
struct ContextualMdp {
  std::vector<Mdp> contexts;
  std::vector<double> context_dist;

  int num_contexts() const { return static_cast<int>(contexts.size()); }
  int num_states() const { return contexts.front().num_states(); }
  int num_actions() const { return contexts.front().num_actions(); }
  const std::vector<double>& rewards() const { return contexts.front().rewards; }
  const std::vector<double>& initial_dist() const { return contexts.front().initial_dist; }

  void validate() const;
};

/// Action-selection rule. Time-varying tables are indexed by step; steps past
/// the end of the table reuse its last row.
class Policy {
 public:
  enum class Kind { kUniform, kDeterministic, kStochastic, kTimeVarying };

  static Policy uniform(int num_actions);
  static Policy deterministic(int num_actions, std::vector<int> action_by_state);
  /// `probs` is num_states x num_actions, row-major.
  static Policy stochastic(int num_actions, std::vector<double> probs);
  /// `actions` is horizon x num_states, row-major.
  static Policy time_varying(int num_states, int num_actions, std::vector<int> actions);

  Kind kind() const { return kind_; }
  int num_actions() const { return num_actions_; }

  double probability(int t, int s, int a) const;
  int sample(int t, int s, Rng& rng) const;

  /// Number of steps covered by a time-varying table, 0 otherwise.
  int table_horizon() const;
  int action_at(int t, int s) const;

  /// Throws InvalidParameter when the policy cannot act on `num_states` states.
  void validate_for(int num_states, int num_actions) const;

 private:
  Kind kind_ = Kind::kUniform;
  int num_actions_ = 1;
  int num_states_ = 0;
  std::vector<int> actions_;
  std::vector<double> probs_;
};

/// One episode. Rewards are recorded at every visited state, x_0 through x_T.
struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::optional<int> true_context;

  int horizon() const { return static_cast<int>(actions.size()); }
  double total_reward() const;

  /// Checks the length contract and reward consistency against `rewards_by_state`.
  void validate(std::span<const double> rewards_by_state) const;
};

}  // namespace cmdp
