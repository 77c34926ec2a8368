#include <limits>
#include <map>

#include "cmdp/cece.hpp"
#include "cmdp/empirical.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/planning.hpp"

namespace cmdp {

Trajectory uniform_explore(LiveEpisode& episode, int steps, Rng& agent_rng) {
  detail::require(steps >= 0, "exploration steps must be nonnegative");
  const int num_actions = episode.num_actions();
  for (int t = 0; t < steps; ++t) episode.step(agent_rng.below(num_actions));
  return episode.observed();
}

int min_l1_classify(const Trajectory& partial, std::span<const TransitionKernel> models) {
  detail::require(!models.empty(), "need at least one model to classify against");
  if (partial.actions.empty()) throw ClassificationImpossible("partial trajectory has no transitions");
  const int num_states = models.front().num_states();
  const int num_actions = models.front().num_actions();
  const EmpiricalModel observed = empirical_model(partial, num_states, num_actions);

  std::vector<std::pair<int, int>> visited;
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a)
      if (observed.visits(s, a) > 0) visited.emplace_back(s, a);

  std::vector<double> row(static_cast<std::size_t>(num_states));
  int best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < models.size(); ++k) {
    detail::require(models[k].num_states() == num_states && models[k].num_actions() == num_actions,
                    "models differ in dimensions");
    double worst = 0.0;
    for (const auto& [s, a] : visited) {
      observed.estimate_row(s, a, row);
      const auto model_row = models[k].row(s, a);
      double d = 0.0;
      for (int y = 0; y < num_states; ++y) d += std::abs(row[y] - model_row[y]);
      worst = std::max(worst, d);
    }
    if (worst < best_distance) {
      best_distance = worst;
      best = static_cast<int>(k);
    }
  }
  return best;
}

std::vector<double> dp_exploit(LiveEpisode& episode, const Mdp& model, int remaining) {
  detail::require(remaining >= 0, "remaining steps must be nonnegative");
  detail::require(model.num_states() == episode.num_states() && model.num_actions() == episode.num_actions(),
                  "model does not match the episode's spaces");
  std::vector<double> rewards;
  if (remaining == 0) return rewards;
  const FiniteHorizonPlan plan = optimal_finite_horizon(model, remaining);
  rewards.reserve(static_cast<std::size_t>(remaining));
  for (int k = 0; k < remaining; ++k) {
    const int next = episode.step(plan.policy.action_at(k, episode.state()));
    rewards.push_back(episode.reward(next));
  }
  return rewards;
}

void QLearningParams::validate() const {
  detail::require(learn_rate > 0.0 && learn_rate <= 1.0, "learn_rate must lie in (0, 1]");
  detail::require(explore_rate >= 0.0 && explore_rate <= 1.0, "explore_rate must lie in [0, 1]");
  detail::require(discount >= 0.0 && discount <= 1.0, "discount must lie in [0, 1]");
}

int QTable::greedy(int s) const {
  int best = 0;
  for (int a = 1; a < num_actions; ++a)
    if (at(s, a) > at(s, best)) best = a;
  return best;
}

std::vector<double> qlearning_exploit(LiveEpisode& episode, QTable& table, int remaining,
                                      const QLearningParams& params, Rng& agent_rng) {
  params.validate();
  detail::require(remaining >= 0, "remaining steps must be nonnegative");
  detail::require(table.num_states == episode.num_states() && table.num_actions == episode.num_actions(),
                  "Q-table does not match the episode's spaces");
  std::vector<double> rewards;
  rewards.reserve(static_cast<std::size_t>(remaining));
  for (int k = 0; k < remaining; ++k) {
    const int s = episode.state();
    // The uniform draw is consumed every step so explore_rate = 1 reduces to
    // the uniform policy's action stream up to this extra draw.
    const bool explore = agent_rng.uniform() < params.explore_rate;
    const int a = explore ? agent_rng.below(table.num_actions) : table.greedy(s);
    const int next = episode.step(a);
    const double r = episode.reward(next);
    const double target = r + params.discount * table.at(next, table.greedy(next));
    table.at(s, a) += params.learn_rate * (target - table.at(s, a));
    rewards.push_back(r);
  }
  return rewards;
}

namespace {

class KMeansClusterer final : public Clusterer {
 public:
  explicit KMeansClusterer(KMeansOptions options) : options_(options) {}
  std::size_t min_trajectories(int num_contexts) const override { return static_cast<std::size_t>(num_contexts); }
  ClusterAssignment cluster(std::span<const Trajectory> trajectories, int num_contexts, ModelSpace space,
                            std::uint64_t seed) const override {
    return kmeans_cluster(trajectories, num_contexts, space, options_, seed);
  }

 private:
  KMeansOptions options_;
};

class ExhaustiveClusterer final : public Clusterer {
 public:
  std::size_t min_trajectories(int num_contexts) const override { return static_cast<std::size_t>(num_contexts); }
  ClusterAssignment cluster(std::span<const Trajectory> trajectories, int num_contexts, ModelSpace space,
                            std::uint64_t) const override {
    return exhaustive_cluster(trajectories, num_contexts, space);
  }
};

// The orchestrator substitutes the true models for this slot; it never clusters.
class OracleClusterer final : public Clusterer {
 public:
  std::size_t min_trajectories(int) const override { return 0; }
  ClusterAssignment cluster(std::span<const Trajectory>, int, ModelSpace, std::uint64_t) const override {
    throw InvalidParameter("the oracle slot injects true models and does not cluster");
  }
};

class UniformExplorer final : public Explorer {
 public:
  Trajectory explore(LiveEpisode& episode, int steps, Rng& agent_rng) const override {
    return uniform_explore(episode, steps, agent_rng);
  }
};

class MinL1Classifier final : public Classifier {
 public:
  int classify(const Trajectory& partial, std::span<const TransitionKernel> models) const override {
    return min_l1_classify(partial, models);
  }
};

class DpExploiter final : public Exploiter {
 public:
  std::vector<double> exploit(LiveEpisode& episode, int, const Mdp& model, int remaining, Rng&) override {
    return dp_exploit(episode, model, remaining);
  }
};

// Q-tables persist per classified label for the whole run.
class QLearningExploiter final : public Exploiter {
 public:
  QLearningExploiter(QLearningParams params, ModelSpace space) : params_(params), space_(space) { params_.validate(); }

  std::vector<double> exploit(LiveEpisode& episode, int context, const Mdp&, int remaining, Rng& agent_rng) override {
    auto it = tables_.find(context);
    if (it == tables_.end())
      it = tables_.emplace(context, QTable(space_.num_states, space_.num_actions, params_.q_init)).first;
    return qlearning_exploit(episode, it->second, remaining, params_, agent_rng);
  }

 private:
  QLearningParams params_;
  ModelSpace space_;
  std::map<int, QTable> tables_;
};

}  // namespace

std::unique_ptr<Clusterer> make_clusterer(const ClusterSlot& slot) {
  if (slot.name == "kmeans") return std::make_unique<KMeansClusterer>(slot.kmeans);
  if (slot.name == "exhaustive") return std::make_unique<ExhaustiveClusterer>();
  if (slot.name == "oracle") return std::make_unique<OracleClusterer>();
  throw InvalidParameter("unknown cluster slot '" + slot.name + "'");
}

std::unique_ptr<Explorer> make_explorer(const std::string& name) {
  if (name == "uniform") return std::make_unique<UniformExplorer>();
  throw InvalidParameter("unknown explore slot '" + name + "'");
}

std::unique_ptr<Classifier> make_classifier(const std::string& name) {
  if (name == "min-l1") return std::make_unique<MinL1Classifier>();
  throw InvalidParameter("unknown classify slot '" + name + "'");
}

std::unique_ptr<Exploiter> make_exploiter(const ExploitSlot& slot, ModelSpace space) {
  if (slot.name == "dp") return std::make_unique<DpExploiter>();
  if (slot.name == "qlearning") return std::make_unique<QLearningExploiter>(slot.qlearning, space);
  throw InvalidParameter("unknown exploit slot '" + slot.name + "'");
}

}  // namespace cmdp
