#include "cmdp/simulate.hpp"

#include "cmdp/errors.hpp"

namespace cmdp {

namespace {

std::vector<double> normalized_uniform(int n, Rng& rng) {
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& v : p) total += (v = rng.uniform());
  if (total <= 0.0) return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

RowDistribution parse_row_distribution(const std::string& name) {
  if (name == "simplex") return RowDistribution::kSimplex;
  if (name == "normalized-uniform") return RowDistribution::kNormalizedUniform;
  throw InvalidParameter("unknown row distribution '" + name + "'");
}

std::string to_string(RowDistribution rows) {
  return rows == RowDistribution::kSimplex ? "simplex" : "normalized-uniform";
}

ContextualMdp generate_random_cmdp(int num_states, int num_actions, int num_contexts, std::uint64_t seed,
                                  RowDistribution rows) {
  detail::require(num_states >= 1 && num_actions >= 1 && num_contexts >= 1,
                  "state, action and context counts must be positive");
  Rng rng(seed);
  std::vector<double> rewards(static_cast<std::size_t>(num_states));
  for (auto& r : rewards) r = rng.uniform();
  const std::vector<double> initial(static_cast<std::size_t>(num_states), 1.0 / num_states);

  ContextualMdp cmdp;
  cmdp.context_dist.assign(static_cast<std::size_t>(num_contexts), 1.0 / num_contexts);
  cmdp.contexts.reserve(static_cast<std::size_t>(num_contexts));
  for (int c = 0; c < num_contexts; ++c) {
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(num_states) * num_actions * num_states);
    for (int row = 0; row < num_states * num_actions; ++row) {
      auto p = rows == RowDistribution::kSimplex ? sample_simplex(num_states, rng) : normalized_uniform(num_states, rng);
      probs.insert(probs.end(), p.begin(), p.end());
    }
    cmdp.contexts.push_back(Mdp{TransitionKernel(num_states, num_actions, std::move(probs)), rewards, initial});
  }
  return cmdp;
}

LiveEpisode::LiveEpisode(const Mdp& mdp, int start_state, std::uint64_t seed, std::optional<int> hidden_context)
    : mdp_(&mdp), rng_(seed), hidden_context_(hidden_context) {
  detail::require(start_state >= 0 && start_state < mdp.num_states(), "start state out of range");
  trajectory_.states.push_back(start_state);
  trajectory_.rewards.push_back(mdp.rewards[start_state]);
}

int LiveEpisode::step(int action) {
  detail::require(action >= 0 && action < mdp_->num_actions(), "action out of range");
  const int next = rng_.categorical(mdp_->kernel.row(state(), action));
  trajectory_.actions.push_back(action);
  trajectory_.states.push_back(next);
  trajectory_.rewards.push_back(mdp_->rewards[next]);
  return next;
}

Trajectory LiveEpisode::finish() && {
  trajectory_.true_context = hidden_context_;
  return std::move(trajectory_);
}

namespace {

Trajectory run_policy(LiveEpisode episode, const Policy& policy, int horizon) {
  for (int t = 0; t < horizon; ++t) episode.step(policy.sample(t, episode.state(), episode.rng()));
  return std::move(episode).finish();
}

}  // namespace

Trajectory simulate_episode(const ContextualMdp& cmdp, const Policy& policy, int horizon, std::uint64_t seed) {
  detail::require(horizon >= 1, "horizon must be at least 1");
  policy.validate_for(cmdp.num_states(), cmdp.num_actions());
  Rng rng(seed);
  const int context = rng.categorical(cmdp.context_dist);
  const Mdp& mdp = cmdp.contexts[context];
  const int start = rng.categorical(mdp.initial_dist);
  return run_policy(LiveEpisode(mdp, start, rng.next_u64(), context), policy, horizon);
}

Trajectory simulate_on_mdp(const Mdp& mdp, const Policy& policy, std::optional<int> start_state, int horizon,
                           std::uint64_t seed) {
  detail::require(horizon >= 0, "horizon must be nonnegative");
  policy.validate_for(mdp.num_states(), mdp.num_actions());
  Rng rng(seed);
  const int start = start_state ? *start_state : rng.categorical(mdp.initial_dist);
  detail::require(start >= 0 && start < mdp.num_states(), "start state out of range");
  return run_policy(LiveEpisode(mdp, start, rng.next_u64()), policy, horizon);
}

}  // namespace cmdp
