#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmdp/cluster.hpp"
#include "cmdp/eval.hpp"
#include "cmdp/mdp.hpp"
#include "cmdp/simulate.hpp"

namespace cmdp {

// ---------------------------------------------------------------------------
// Concrete slot algorithms

/// Takes `steps` uniformly random actions; returns the observed partial
/// trajectory with the episode left at x_{steps}.
Trajectory uniform_explore(LiveEpisode& episode, int steps, Rng& agent_rng);

/// Index of the model closest to the partial trajectory's empirical kernel in
/// max-row L1 distance, over the (s, a) pairs the partial trajectory visited.
/// Ties go to the lowest index. Throws ClassificationImpossible when the
/// partial trajectory has no transitions.
int min_l1_classify(const Trajectory& partial, std::span<const TransitionKernel> models);

/// Plans on `model` for `remaining` steps from the episode's current state and
/// executes the plan. Returns the rewards of the states reached.
std::vector<double> dp_exploit(LiveEpisode& episode, const Mdp& model, int remaining);

struct QLearningParams {
  double learn_rate = 0.1;
  double explore_rate = 0.1;
  double q_init = 0.0;
  double discount = 0.95;

  void validate() const;
};

/// Action values for one context, num_states x num_actions.
struct QTable {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;

  QTable(int s, int a, double init) : num_states(s), num_actions(a), values(static_cast<std::size_t>(s) * a, init) {}
  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * num_actions + a]; }
  double at(int s, int a) const { return values[static_cast<std::size_t>(s) * num_actions + a]; }
  /// Greedy action, ties to the lowest index.
  int greedy(int s) const;
};

/// One-step Q-learning with epsilon-greedy selection for `remaining` steps,
/// updating `table` in place.
std::vector<double> qlearning_exploit(LiveEpisode& episode, QTable& table, int remaining,
                                      const QLearningParams& params, Rng& agent_rng);

// ---------------------------------------------------------------------------
// Slot interfaces

class Clusterer {
 public:
  virtual ~Clusterer() = default;
  /// Smallest number of completed trajectories the clusterer can work with.
  virtual std::size_t min_trajectories(int num_contexts) const = 0;
  virtual ClusterAssignment cluster(std::span<const Trajectory> trajectories, int num_contexts, ModelSpace space,
                                    std::uint64_t seed) const = 0;
};

class Explorer {
 public:
  virtual ~Explorer() = default;
  virtual Trajectory explore(LiveEpisode& episode, int steps, Rng& agent_rng) const = 0;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int classify(const Trajectory& partial, std::span<const TransitionKernel> models) const = 0;
};

/// Exploiters may keep state across episodes of one run (Q-tables).
class Exploiter {
 public:
  virtual ~Exploiter() = default;
  /// `context` is the classified cluster label; labels persist across
  /// re-clusterings within a run.
  virtual std::vector<double> exploit(LiveEpisode& episode, int context, const Mdp& model, int remaining,
                                      Rng& agent_rng) = 0;
};

// ---------------------------------------------------------------------------
// Configuration

struct ClusterSlot {
  /// "kmeans", "exhaustive", or "oracle" (injects the true models; evaluation only).
  std::string name = "kmeans";
  KMeansOptions kmeans;
};

struct ExploitSlot {
  /// "dp" or "qlearning".
  std::string name = "dp";
  QLearningParams qlearning;
};

struct CeceConfig {
  int num_contexts = 1;
  int horizon = 1;
  /// Exactly one of these fixes T_EC; a fraction is rounded to the nearest step.
  std::optional<int> exploration_steps;
  std::optional<double> exploration_fraction;
  /// Mini-batch sizes H_1, H_2, ...
  std::vector<int> minibatch_sizes;

  ClusterSlot cluster;
  std::string explore = "uniform";
  std::string classify = "min-l1";
  ExploitSlot exploit;

  int resolved_exploration_steps() const;
  int total_episodes() const;
  void validate() const;
};

std::unique_ptr<Clusterer> make_clusterer(const ClusterSlot& slot);
std::unique_ptr<Explorer> make_explorer(const std::string& name);
std::unique_ptr<Classifier> make_classifier(const std::string& name);
std::unique_ptr<Exploiter> make_exploiter(const ExploitSlot& slot, ModelSpace space);

// ---------------------------------------------------------------------------
// Orchestration

struct EpisodeOutcome {
  Trajectory trajectory;
  std::optional<int> classified_context;
  double exploration_reward = 0.0;
  double exploitation_reward = 0.0;
  bool correct_classification = false;
};

struct CeceRun {
  RegretLedger ledger;
  std::vector<EpisodeOutcome> outcomes;
  int classification_failures = 0;

  /// Realized reward per step over the whole run.
  double average_reward() const;
};

/// Runs CECE over all mini-batches. Each batch re-clusters every completed
/// trajectory, then explores, classifies and exploits each new episode. The
/// first batch, and any batch before enough data exists to cluster, runs the
/// uniform policy end to end.
CeceRun run_cece(const ContextualMdp& cmdp, const CeceConfig& config, std::uint64_t seed);

}  // namespace cmdp
