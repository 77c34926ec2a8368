#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp {

double l1_distance(std::span<const double> p, std::span<const double> q);

struct ModelDistanceReport {
  /// max over (s, a) of the L1 row distance, in [0, 2].
  double epsilon = 0.0;
  int worst_state = 0;
  int worst_action = 0;
};

/// Max-row L1 distance between two kernels over the same spaces.
ModelDistanceReport model_distance(const TransitionKernel& k1, const TransitionKernel& k2);

struct CmdpMatchReport {
  /// matching[c] is the estimate paired with reference context c.
  std::vector<int> matching;
  /// Largest distance over matched pairs.
  double epsilon = 0.0;
  /// Distance of each matched pair, indexed by reference context.
  std::vector<double> per_pair;
};

/// Contexts up to this count are matched by enumerating all bijections.
inline constexpr int kBruteForceMatchLimit = 8;

/// Bijection minimizing the largest matched distance; ties go to the smaller
/// distance sum. Uses enumeration for K <= 8, bottleneck assignment above.
CmdpMatchReport match_kernels(std::span<const TransitionKernel> reference, std::span<const TransitionKernel> estimates);
CmdpMatchReport cmdp_match(const ContextualMdp& reference, std::span<const TransitionKernel> estimates);

// Solvers over a row-major n x n cost matrix. Both minimize (max, sum)
// lexicographically and return the column assigned to each row.
std::vector<int> brute_force_bottleneck(std::span<const double> cost, int n);
std::vector<int> threshold_bottleneck(std::span<const double> cost, int n);

/// Sample-weighted mean over true contexts of the label entropy, in nats.
double entropy_score(std::span<const int> labels, std::span<const int> true_contexts, int num_contexts);

struct EpisodeRecord {
  int episode = 0;
  int batch = 0;
  int true_context = 0;
  /// Unset when the episode ran uniformly without a model.
  std::optional<int> classified_context;
  /// Evaluation-only: the classified cluster matched to this true context.
  bool correct_classification = false;
  bool classification_failed = false;
  double optimal_value = 0.0;
  double realized_reward = 0.0;
  double exploration_reward = 0.0;
  double exploitation_reward = 0.0;
  int exploration_steps = 0;
  int horizon = 0;
};

struct BatchSummary {
  int batch = 0;
  int episodes = 0;
  int classified = 0;
  int correct = 0;
  double optimal_total = 0.0;
  double realized_total = 0.0;
  double regret = 0.0;
};

/// Append-only per-episode accounting in episode order.
class RegretLedger {
 public:
  void append(EpisodeRecord record);

  std::span<const EpisodeRecord> records() const { return records_; }
  std::vector<BatchSummary> batches() const;

  double optimal_total() const;
  double realized_total() const;
  int total_steps() const;

 private:
  std::vector<EpisodeRecord> records_;
};

/// Sum of optimal values minus sum of realized rewards.
double compute_regret(const RegretLedger& ledger);

struct RegularityTargets {
  double alpha = 0.0;
  double beta = 0.0;
  double separation = 0.0;
};

struct RegularityReport {
  double alpha_observed = 0.0;
  double beta_observed = 0.0;
  double separation_D = 0.0;
  bool each_model_sampled = false;       // beta_observed >= beta
  bool models_separated = false;         // separation_D >= D
  bool pairs_visited = false;            // alpha_observed >= alpha
  /// (S / (alpha D^2)) * |log(D / (K S A))|, order-of-magnitude only.
  double length_threshold = 0.0;
  bool length_advisory = false;          // shortest horizon >= length_threshold
};

RegularityReport check_regularity(const ContextualMdp& cmdp, std::span<const Trajectory> trajectories,
                                  const RegularityTargets& targets);

}  // namespace cmdp
