#include "cmdp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cmdp/empirical.hpp"
#include "cmdp/errors.hpp"

namespace cmdp {

double l1_distance(std::span<const double> p, std::span<const double> q) {
  detail::require(p.size() == q.size(), "distributions differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return total;
}

ModelDistanceReport model_distance(const TransitionKernel& k1, const TransitionKernel& k2) {
  detail::require(k1.num_states() == k2.num_states() && k1.num_actions() == k2.num_actions(),
                  "kernels differ in dimensions");
  ModelDistanceReport report;
  for (int s = 0; s < k1.num_states(); ++s) {
    for (int a = 0; a < k1.num_actions(); ++a) {
      const double d = l1_distance(k1.row(s, a), k2.row(s, a));
      if (d > report.epsilon) report = {d, s, a};
    }
  }
  return report;
}

namespace {

struct MatchKey {
  double max = 0.0;
  double sum = 0.0;
};

MatchKey evaluate(std::span<const double> cost, int n, const std::vector<int>& assignment) {
  MatchKey key;
  for (int i = 0; i < n; ++i) {
    const double c = cost[static_cast<std::size_t>(i) * n + assignment[i]];
    key.max = std::max(key.max, c);
    key.sum += c;
  }
  return key;
}

bool better(const MatchKey& a, const MatchKey& b) { return a.max < b.max || (a.max == b.max && a.sum < b.sum); }

// Kuhn's augmenting paths restricted to edges with cost <= threshold.
bool has_perfect_matching(std::span<const double> cost, int n, double threshold) {
  std::vector<int> match_col(static_cast<std::size_t>(n), -1);
  std::vector<char> seen;
  auto augment = [&](auto&& self, int row) -> bool {
    for (int col = 0; col < n; ++col) {
      if (cost[static_cast<std::size_t>(row) * n + col] > threshold || seen[col]) continue;
      seen[col] = 1;
      if (match_col[col] < 0 || self(self, match_col[col])) {
        match_col[col] = row;
        return true;
      }
    }
    return false;
  };
  for (int row = 0; row < n; ++row) {
    seen.assign(static_cast<std::size_t>(n), 0);
    if (!augment(augment, row)) return false;
  }
  return true;
}

// Min-sum assignment (Hungarian method with potentials), O(n^3).
std::vector<int> min_sum_assignment(std::span<const double> cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

std::vector<int> brute_force_bottleneck(std::span<const double> cost, int n) {
  detail::require(n >= 1 && cost.size() == static_cast<std::size_t>(n) * n, "cost matrix is not n x n");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  MatchKey best_key = evaluate(cost, n, perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    const MatchKey key = evaluate(cost, n, perm);
    if (better(key, best_key)) {
      best_key = key;
      best = perm;
    }
  }
  return best;
}

std::vector<int> threshold_bottleneck(std::span<const double> cost, int n) {
  detail::require(n >= 1 && cost.size() == static_cast<std::size_t>(n) * n, "cost matrix is not n x n");
  std::vector<double> levels(cost.begin(), cost.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (has_perfect_matching(cost, n, levels[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  const double threshold = levels[lo];

  // Among bottleneck-optimal matchings, take the one with the smallest sum.
  const double forbidden = 4.0 * n * (std::abs(levels.back()) + 1.0);
  std::vector<double> restricted(cost.begin(), cost.end());
  for (auto& c : restricted)
    if (c > threshold) c = forbidden;
  return min_sum_assignment(restricted, n);
}

CmdpMatchReport match_kernels(std::span<const TransitionKernel> reference, std::span<const TransitionKernel> estimates) {
  detail::require(!reference.empty(), "no contexts to match");
  detail::require(reference.size() == estimates.size(), "context counts differ");
  const int n = static_cast<int>(reference.size());
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost[static_cast<std::size_t>(i) * n + j] = model_distance(reference[i], estimates[j]).epsilon;

  CmdpMatchReport report;
  report.matching = n <= kBruteForceMatchLimit ? brute_force_bottleneck(cost, n) : threshold_bottleneck(cost, n);
  report.per_pair.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    report.per_pair[i] = cost[static_cast<std::size_t>(i) * n + report.matching[i]];
    report.epsilon = std::max(report.epsilon, report.per_pair[i]);
  }
  return report;
}

CmdpMatchReport cmdp_match(const ContextualMdp& reference, std::span<const TransitionKernel> estimates) {
  detail::require(static_cast<std::size_t>(reference.num_contexts()) == estimates.size(), "context counts differ");
  std::vector<TransitionKernel> kernels;
  kernels.reserve(reference.contexts.size());
  for (const Mdp& m : reference.contexts) kernels.push_back(m.kernel);
  return match_kernels(kernels, estimates);
}

double entropy_score(std::span<const int> labels, std::span<const int> true_contexts, int num_contexts) {
  detail::require(!labels.empty(), "entropy score needs at least one sample");
  detail::require(labels.size() == true_contexts.size(), "label and context lists differ in length");
  detail::require(num_contexts >= 1, "need at least one context");
  const std::size_t k = static_cast<std::size_t>(num_contexts);
  std::vector<std::size_t> table(k * k, 0);
  std::vector<std::size_t> per_context(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    detail::require(labels[i] >= 0 && labels[i] < num_contexts, "cluster label out of range");
    detail::require(true_contexts[i] >= 0 && true_contexts[i] < num_contexts, "true context out of range");
    ++table[true_contexts[i] * k + labels[i]];
    ++per_context[true_contexts[i]];
  }
  const double total = static_cast<double>(labels.size());
  double score = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (per_context[c] == 0) continue;
    const double n_c = static_cast<double>(per_context[c]);
    double entropy = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t m = table[c * k + j];
      if (m == 0) continue;
      const double p = static_cast<double>(m) / n_c;
      entropy -= p * std::log(p);
    }
    score += (n_c / total) * entropy;
  }
  return score;
}

void RegretLedger::append(EpisodeRecord record) {
  detail::require(records_.empty() || record.episode > records_.back().episode,
                  "ledger records must arrive in episode order");
  records_.push_back(record);
}

std::vector<BatchSummary> RegretLedger::batches() const {
  std::vector<BatchSummary> out;
  for (const EpisodeRecord& r : records_) {
    if (out.empty() || out.back().batch != r.batch) out.push_back(BatchSummary{.batch = r.batch});
    BatchSummary& b = out.back();
    ++b.episodes;
    if (r.classified_context) ++b.classified;
    if (r.correct_classification) ++b.correct;
    b.optimal_total += r.optimal_value;
    b.realized_total += r.realized_reward;
  }
  for (auto& b : out) b.regret = b.optimal_total - b.realized_total;
  return out;
}

double RegretLedger::optimal_total() const {
  double total = 0.0;
  for (const auto& r : records_) total += r.optimal_value;
  return total;
}

double RegretLedger::realized_total() const {
  double total = 0.0;
  for (const auto& r : records_) total += r.realized_reward;
  return total;
}

int RegretLedger::total_steps() const {
  int total = 0;
  for (const auto& r : records_) total += r.horizon;
  return total;
}

double compute_regret(const RegretLedger& ledger) { return ledger.optimal_total() - ledger.realized_total(); }

RegularityReport check_regularity(const ContextualMdp& cmdp, std::span<const Trajectory> trajectories,
                                  const RegularityTargets& targets) {
  detail::require(!trajectories.empty(), "need at least one trajectory");
  const int num_states = cmdp.num_states();
  const int num_actions = cmdp.num_actions();
  const int num_contexts = cmdp.num_contexts();

  RegularityReport report;
  report.alpha_observed = 1.0;
  std::vector<int> per_context(static_cast<std::size_t>(num_contexts), 0);
  int shortest = std::numeric_limits<int>::max();
  for (const Trajectory& t : trajectories) {
    detail::require(t.true_context.has_value(), "trajectories must carry their true context");
    detail::require(*t.true_context >= 0 && *t.true_context < num_contexts, "true context out of range");
    ++per_context[*t.true_context];
    shortest = std::min(shortest, t.horizon());
    if (t.horizon() == 0) {
      report.alpha_observed = 0.0;
      continue;
    }
    const EmpiricalModel model = empirical_model(t, num_states, num_actions);
    const auto min_visits = *std::min_element(model.total_visits().begin(), model.total_visits().end());
    report.alpha_observed =
        std::min(report.alpha_observed, static_cast<double>(min_visits) / static_cast<double>(t.horizon()));
  }
  const int rarest = *std::min_element(per_context.begin(), per_context.end());
  report.beta_observed = static_cast<double>(rarest) / static_cast<double>(trajectories.size());

  // With a single context the pairwise condition holds vacuously.
  report.separation_D = 2.0;
  for (int c1 = 0; c1 < num_contexts; ++c1)
    for (int c2 = c1 + 1; c2 < num_contexts; ++c2)
      report.separation_D = std::min(report.separation_D,
                                     model_distance(cmdp.contexts[c1].kernel, cmdp.contexts[c2].kernel).epsilon);

  report.each_model_sampled = report.beta_observed >= targets.beta;
  report.models_separated = report.separation_D >= targets.separation;
  report.pairs_visited = report.alpha_observed >= targets.alpha;
  if (targets.alpha > 0.0 && targets.separation > 0.0) {
    const double ksa = static_cast<double>(num_contexts) * num_states * num_actions;
    report.length_threshold = num_states / (targets.alpha * targets.separation * targets.separation) *
                              std::abs(std::log(targets.separation / ksa));
    report.length_advisory = shortest >= report.length_threshold;
  }
  return report;
}

}  // namespace cmdp
