#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cmdp/mdp.hpp"
#include "cmdp/random.hpp"

namespace cmdp {

/// How transition rows are drawn.
enum class RowDistribution {
  /// Uniform on the probability simplex (flat Dirichlet).
  kSimplex,
  /// Independent U[0, 1) entries divided by their sum.
  kNormalizedUniform,
};

RowDistribution parse_row_distribution(const std::string& name);
std::string to_string(RowDistribution rows);

/// Random transition rows, rewards uniform on [0, 1] and shared, uniform
/// initial and context distributions.
ContextualMdp generate_random_cmdp(int num_states, int num_actions, int num_contexts, std::uint64_t seed,
                                   RowDistribution rows = RowDistribution::kSimplex);

/// An episode in progress on a fixed MDP. Learners drive it one action at a
/// time; the generating context stays hidden until `finish`.
class LiveEpisode {
 public:
  LiveEpisode(const Mdp& mdp, int start_state, std::uint64_t seed, std::optional<int> hidden_context = {});

  int state() const { return trajectory_.states.back(); }
  int steps_taken() const { return trajectory_.horizon(); }
  int num_states() const { return mdp_->num_states(); }
  int num_actions() const { return mdp_->num_actions(); }
  double reward(int s) const { return mdp_->rewards[s]; }

  /// Executes one action and returns the new state.
  int step(int action);

  /// Observed history so far, without the hidden context label.
  const Trajectory& observed() const { return trajectory_; }

  Rng& rng() { return rng_; }

  /// Ends the episode and attaches the hidden context for evaluation.
  Trajectory finish() &&;

 private:
  const Mdp* mdp_;
  Rng rng_;
  Trajectory trajectory_;
  std::optional<int> hidden_context_;
};

/// Samples a context, then runs `policy` for `horizon` steps in it.
Trajectory simulate_episode(const ContextualMdp& cmdp, const Policy& policy, int horizon, std::uint64_t seed);

/// Runs `policy` on a known MDP from `start_state`, or from an initial-distribution
/// draw when no start is given. The result has no context label.
Trajectory simulate_on_mdp(const Mdp& mdp, const Policy& policy, std::optional<int> start_state, int horizon,
                           std::uint64_t seed);

}  // namespace cmdp
