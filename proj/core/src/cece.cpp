#include "cmdp/cece.hpp"

#include <cmath>
#include <numeric>

#include "cmdp/errors.hpp"
#include "cmdp/planning.hpp"

namespace cmdp {

int CeceConfig::resolved_exploration_steps() const {
  if (exploration_steps) return *exploration_steps;
  if (exploration_fraction) return static_cast<int>(std::llround(*exploration_fraction * horizon));
  throw InvalidParameter("either exploration_steps or exploration_fraction must be set");
}

int CeceConfig::total_episodes() const { return std::accumulate(minibatch_sizes.begin(), minibatch_sizes.end(), 0); }

void CeceConfig::validate() const {
  detail::require(num_contexts >= 1, "num_contexts must be positive");
  detail::require(horizon >= 1, "horizon must be positive");
  detail::require(exploration_steps.has_value() != exploration_fraction.has_value(),
                  "set exactly one of exploration_steps and exploration_fraction");
  if (exploration_fraction)
    detail::require(*exploration_fraction >= 0.0 && *exploration_fraction < 1.0,
                    "exploration_fraction must lie in [0, 1)");
  const int steps = resolved_exploration_steps();
  // T_EC = 0 is accepted so that classification failure can be observed.
  detail::require(steps >= 0 && steps < horizon, "exploration steps must satisfy 0 <= T_EC < T");
  detail::require(!minibatch_sizes.empty(), "at least one mini-batch is required");
  for (int h : minibatch_sizes) detail::require(h >= 1, "mini-batch sizes must be positive");
  exploit.qlearning.validate();
  make_clusterer(cluster);
  make_explorer(explore);
  make_classifier(classify);
}

double CeceRun::average_reward() const {
  // Each episode of horizon T yields T + 1 reward terms.
  const double terms = static_cast<double>(ledger.total_steps()) + static_cast<double>(ledger.records().size());
  return terms > 0.0 ? ledger.realized_total() / terms : 0.0;
}

namespace {

struct ModelSet {
  std::vector<TransitionKernel> kernels;
  std::vector<Mdp> planning_models;
  /// truth_to_cluster[c]: cluster matched to true context c (evaluation only).
  std::vector<int> truth_to_cluster;

  bool empty() const { return kernels.empty(); }
};

// State rewards are context independent and revealed on visit; states never
// seen are estimated at 0.
std::vector<double> observed_rewards(std::span<const Trajectory> trajectories, int num_states) {
  std::vector<double> rewards(static_cast<std::size_t>(num_states), 0.0);
  for (const auto& t : trajectories)
    for (std::size_t i = 0; i < t.states.size(); ++i) rewards[t.states[i]] = t.rewards[i];
  return rewards;
}

ModelSet oracle_models(const ContextualMdp& cmdp) {
  ModelSet set;
  for (int c = 0; c < cmdp.num_contexts(); ++c) {
    set.kernels.push_back(cmdp.contexts[c].kernel);
    set.planning_models.push_back(cmdp.contexts[c]);
    set.truth_to_cluster.push_back(c);
  }
  return set;
}

ModelSet learned_models(const ContextualMdp& cmdp, const ClusterAssignment& assignment,
                        std::span<const Trajectory> completed, const ModelSet& previous) {
  ModelSet set;
  std::vector<TransitionKernel> kernels = assignment.kernels();

  // Keep labels stable across re-clusterings: new cluster matched to previous
  // label i takes label i.
  if (!previous.empty()) {
    const CmdpMatchReport alignment = match_kernels(previous.kernels, kernels);
    std::vector<TransitionKernel> reordered;
    reordered.reserve(kernels.size());
    for (int i = 0; i < static_cast<int>(kernels.size()); ++i) reordered.push_back(kernels[alignment.matching[i]]);
    kernels = std::move(reordered);
  }

  const int num_states = cmdp.num_states();
  const std::vector<double> rewards = observed_rewards(completed, num_states);
  const std::vector<double> initial(static_cast<std::size_t>(num_states), 1.0 / num_states);
  for (const auto& k : kernels) set.planning_models.push_back(Mdp{k, rewards, initial});
  set.truth_to_cluster = cmdp_match(cmdp, kernels).matching;
  set.kernels = std::move(kernels);
  return set;
}

void run_uniform(LiveEpisode& episode, int steps, Rng& agent_rng) {
  for (int t = 0; t < steps; ++t) episode.step(agent_rng.below(episode.num_actions()));
}

}  // namespace

CeceRun run_cece(const ContextualMdp& cmdp, const CeceConfig& config, std::uint64_t seed) {
  config.validate();
  cmdp.validate();
  detail::require(config.num_contexts == cmdp.num_contexts(), "config K must match the CMDP's context count");

  const ModelSpace space{cmdp.num_states(), cmdp.num_actions()};
  const int horizon = config.horizon;
  const int exploration = config.resolved_exploration_steps();
  const bool oracle = config.cluster.name == "oracle";

  const auto clusterer = make_clusterer(config.cluster);
  const auto explorer = make_explorer(config.explore);
  const auto classifier = make_classifier(config.classify);
  const auto exploiter = make_exploiter(config.exploit, space);

  std::vector<std::optional<double>> optimal_values(static_cast<std::size_t>(cmdp.num_contexts()));
  auto optimal_value = [&](int context) {
    auto& slot = optimal_values[context];
    if (!slot) slot = optimal_finite_horizon(cmdp.contexts[context], horizon).optimal_value;
    return *slot;
  };

  CeceRun run;
  std::vector<Trajectory> completed;
  std::vector<EpisodeOutcome> outcomes;
  ModelSet models;
  int episode_index = 0;

  for (std::size_t batch = 0; batch < config.minibatch_sizes.size(); ++batch) {
    if (oracle) {
      models = oracle_models(cmdp);
    } else if (batch > 0 && completed.size() >= clusterer->min_trajectories(config.num_contexts)) {
      const ClusterAssignment assignment = clusterer->cluster(
          completed, config.num_contexts, space, derive_seed(seed, {1, static_cast<std::uint64_t>(batch)}));
      models = learned_models(cmdp, assignment, completed, models);
    }

    std::vector<Trajectory> fresh;
    for (int i = 0; i < config.minibatch_sizes[batch]; ++i, ++episode_index) {
      const std::uint64_t episode_seed = derive_seed(seed, {0, static_cast<std::uint64_t>(episode_index)});
      Rng env_rng(episode_seed);
      const int context = env_rng.categorical(cmdp.context_dist);
      const Mdp& truth = cmdp.contexts[context];
      const int start = env_rng.categorical(truth.initial_dist);
      LiveEpisode episode(truth, start, env_rng.next_u64(), context);
      Rng agent_rng(derive_seed(episode_seed, {2}));

      EpisodeRecord record;
      record.episode = episode_index;
      record.batch = static_cast<int>(batch);
      record.true_context = context;
      record.horizon = horizon;

      // The uniform bootstrap charges the whole episode to exploration.
      int boundary = horizon;
      if (!models.empty()) {
        boundary = exploration;
        const Trajectory partial = explorer->explore(episode, exploration, agent_rng);
        std::optional<int> label;
        if (models.kernels.size() == 1) {
          label = 0;
        } else {
          try {
            label = classifier->classify(partial, models.kernels);
          } catch (const ClassificationImpossible&) {
            record.classification_failed = true;
            ++run.classification_failures;
          }
        }
        if (label) {
          record.classified_context = label;
          record.correct_classification = models.truth_to_cluster[context] == *label;
          exploiter->exploit(episode, *label, models.planning_models[*label], horizon - exploration, agent_rng);
        } else {
          run_uniform(episode, horizon - exploration, agent_rng);
        }
      } else {
        run_uniform(episode, horizon, agent_rng);
      }

      Trajectory trajectory = std::move(episode).finish();
      for (int t = 0; t <= horizon; ++t)
        (t <= boundary ? record.exploration_reward : record.exploitation_reward) += trajectory.rewards[t];
      record.realized_reward = record.exploration_reward + record.exploitation_reward;
      record.exploration_steps = boundary;
      record.optimal_value = optimal_value(context);

      outcomes.push_back(EpisodeOutcome{{}, record.classified_context, record.exploration_reward,
                                        record.exploitation_reward, record.correct_classification});
      run.ledger.append(record);
      fresh.push_back(std::move(trajectory));
    }
    for (auto& t : fresh) completed.push_back(std::move(t));
  }

  for (std::size_t i = 0; i < outcomes.size(); ++i) outcomes[i].trajectory = std::move(completed[i]);
  run.outcomes = std::move(outcomes);
  return run;
}

}  // namespace cmdp
