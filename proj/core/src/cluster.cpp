#include "cmdp/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmdp/errors.hpp"
#include "cmdp/eval.hpp"
#include "cmdp/random.hpp"

namespace cmdp {

std::vector<TransitionKernel> ClusterAssignment::kernels() const {
  std::vector<TransitionKernel> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(m.kernel_estimate());
  return out;
}

namespace {

void check_labels(std::span<const Trajectory> trajectories, std::span<const int> labels, int num_clusters) {
  detail::require(labels.size() == trajectories.size(), "one label per trajectory is required");
  for (int l : labels) detail::require(l >= 0 && l < num_clusters, "cluster label out of range");
}

std::vector<EmpiricalModel> per_trajectory_models(std::span<const Trajectory> trajectories, ModelSpace space) {
  std::vector<EmpiricalModel> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) out.push_back(empirical_model(t, space.num_states, space.num_actions));
  return out;
}

// Max-row L1 distance between two count-based estimates.
double count_distance(const EmpiricalModel& a, const EmpiricalModel& b, std::vector<double>& row_a,
                      std::vector<double>& row_b) {
  double worst = 0.0;
  for (int s = 0; s < a.num_states(); ++s) {
    for (int act = 0; act < a.num_actions(); ++act) {
      a.estimate_row(s, act, row_a);
      b.estimate_row(s, act, row_b);
      worst = std::max(worst, l1_distance(row_a, row_b));
    }
  }
  return worst;
}

double score_from_models(const std::vector<EmpiricalModel>& singles, std::span<const int> labels,
                         const std::vector<EmpiricalModel>& pooled, ModelSpace space) {
  std::vector<double> row_a(static_cast<std::size_t>(space.num_states));
  std::vector<double> row_b(static_cast<std::size_t>(space.num_states));
  double score = 0.0;
  for (std::size_t h = 0; h < singles.size(); ++h) score += count_distance(singles[h], pooled[labels[h]], row_a, row_b);
  return score;
}

std::vector<EmpiricalModel> pool(const std::vector<EmpiricalModel>& singles, std::span<const int> labels,
                                 int num_clusters, ModelSpace space) {
  std::vector<EmpiricalModel> models(static_cast<std::size_t>(num_clusters),
                                     EmpiricalModel(space.num_states, space.num_actions));
  for (std::size_t h = 0; h < singles.size(); ++h) models[labels[h]].merge(singles[h]);
  return models;
}

}  // namespace

std::vector<EmpiricalModel> pooled_models(std::span<const Trajectory> trajectories, std::span<const int> labels,
                                          int num_clusters, ModelSpace space) {
  check_labels(trajectories, labels, num_clusters);
  std::vector<EmpiricalModel> models(static_cast<std::size_t>(num_clusters),
                                     EmpiricalModel(space.num_states, space.num_actions));
  for (std::size_t h = 0; h < trajectories.size(); ++h) models[labels[h]].add(trajectories[h]);
  return models;
}

double partition_score(std::span<const Trajectory> trajectories, std::span<const int> labels, int num_clusters,
                       ModelSpace space) {
  check_labels(trajectories, labels, num_clusters);
  const auto singles = per_trajectory_models(trajectories, space);
  return score_from_models(singles, labels, pool(singles, labels, num_clusters, space), space);
}

ClusterAssignment exhaustive_cluster(std::span<const Trajectory> trajectories, int num_clusters, ModelSpace space) {
  const int n = static_cast<int>(trajectories.size());
  if (n > kExhaustiveLimit)
    throw ExhaustiveLimitExceeded("exhaustive clustering is limited to " + std::to_string(kExhaustiveLimit) +
                                  " trajectories (got " + std::to_string(n) + "); use kmeans_cluster instead");
  detail::require(num_clusters >= 1 && num_clusters <= n, "need 1 <= K <= number of trajectories");

  const auto singles = per_trajectory_models(trajectories, space);

  // Restricted growth strings enumerate each set partition exactly once.
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
  ClusterAssignment best;
  best.score = std::numeric_limits<double>::infinity();
  while (true) {
    const auto models = pool(singles, labels, num_clusters, space);
    const double score = score_from_models(singles, labels, models, space);
    if (score < best.score) {
      best.score = score;
      best.labels = labels;
      best.models = models;
    }
    int i = n - 1;
    while (i > 0 && (labels[i] > prefix_max[i - 1] || labels[i] + 1 >= num_clusters)) --i;
    if (i == 0) break;
    ++labels[i];
    prefix_max[i] = std::max(prefix_max[i - 1], labels[i]);
    for (int j = i + 1; j < n; ++j) {
      labels[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  return best;
}

namespace {

// Flattened empirical kernel of one trajectory. Visited rows are stored
// sparsely; unvisited rows are implicitly uniform.
struct SparsePoint {
  std::vector<std::size_t> index;
  std::vector<double> value;
  std::vector<int> uniform_rows;
  double norm2 = 0.0;
};

class Embedding {
 public:
  Embedding(std::span<const Trajectory> trajectories, ModelSpace space)
      : num_states_(space.num_states), num_rows_(space.num_states * space.num_actions) {
    points_.reserve(trajectories.size());
    for (const auto& t : trajectories) {
      const EmpiricalModel m = empirical_model(t, space.num_states, space.num_actions);
      SparsePoint p;
      for (int row = 0; row < num_rows_; ++row) {
        const auto n = m.total_visits()[row];
        if (n == 0) {
          p.uniform_rows.push_back(row);
          continue;
        }
        for (int next = 0; next < num_states_; ++next) {
          const auto c = m.counts()[static_cast<std::size_t>(row) * num_states_ + next];
          if (c == 0) continue;
          const double v = static_cast<double>(c) / static_cast<double>(n);
          p.index.push_back(static_cast<std::size_t>(row) * num_states_ + next);
          p.value.push_back(v);
          p.norm2 += v * v;
        }
      }
      p.norm2 += static_cast<double>(p.uniform_rows.size()) / num_states_;
      points_.push_back(std::move(p));
    }
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(num_rows_) * num_states_; }

  void densify(std::size_t i, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const SparsePoint& p = points_[i];
    for (int row : p.uniform_rows)
      std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(row) * num_states_, num_states_, 1.0 / num_states_);
    for (std::size_t j = 0; j < p.index.size(); ++j) out[p.index[j]] = p.value[j];
  }

  // Squared distance to a dense center with precomputed norm and row sums.
  double distance2(std::size_t i, std::span<const double> center, double center_norm2,
                   std::span<const double> row_sums) const {
    const SparsePoint& p = points_[i];
    double dot = 0.0;
    for (std::size_t j = 0; j < p.index.size(); ++j) dot += p.value[j] * center[p.index[j]];
    double uniform_part = 0.0;
    for (int row : p.uniform_rows) uniform_part += row_sums[row];
    dot += uniform_part / num_states_;
    return std::max(0.0, p.norm2 - 2.0 * dot + center_norm2);
  }

  void accumulate(std::size_t i, std::span<double> sum, std::span<double> uniform_weight) const {
    const SparsePoint& p = points_[i];
    for (std::size_t j = 0; j < p.index.size(); ++j) sum[p.index[j]] += p.value[j];
    for (int row : p.uniform_rows) uniform_weight[row] += 1.0;
  }

  int num_states() const { return num_states_; }
  int num_rows() const { return num_rows_; }

 private:
  int num_states_;
  int num_rows_;
  std::vector<SparsePoint> points_;
};

struct Centers {
  int k;
  std::size_t dim;
  int num_rows;
  int num_states;
  std::vector<double> coords;
  std::vector<double> norm2;
  std::vector<double> row_sums;

  Centers(int k_, const Embedding& e)
      : k(k_), dim(e.dimension()), num_rows(e.num_rows()), num_states(e.num_states()),
        coords(static_cast<std::size_t>(k_) * e.dimension(), 0.0), norm2(k_, 0.0),
        row_sums(static_cast<std::size_t>(k_) * e.num_rows(), 0.0) {}

  std::span<double> center(int j) { return {coords.data() + j * dim, dim}; }
  std::span<const double> center(int j) const { return {coords.data() + j * dim, dim}; }
  std::span<const double> sums(int j) const {
    return {row_sums.data() + static_cast<std::size_t>(j) * num_rows, static_cast<std::size_t>(num_rows)};
  }

  void refresh(int j) {
    const auto c = center(j);
    double n2 = 0.0;
    for (double v : c) n2 += v * v;
    norm2[j] = n2;
    for (int row = 0; row < num_rows; ++row) {
      double s = 0.0;
      for (int next = 0; next < num_states; ++next) s += c[static_cast<std::size_t>(row) * num_states + next];
      row_sums[static_cast<std::size_t>(j) * num_rows + row] = s;
    }
  }

  double distance2(const Embedding& e, std::size_t i, int j) const {
    return e.distance2(i, center(j), norm2[j], sums(j));
  }
};

struct LloydRun {
  std::vector<int> labels;
  double wcss = 0.0;
};

// Greedy k-means++: each new center is the best of several D^2-weighted
// candidates by resulting potential.
void seed_centers(const Embedding& e, Centers& centers, Rng& rng) {
  const std::size_t n = e.size();
  const int candidates = 2 + static_cast<int>(std::log(static_cast<double>(centers.k)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<double> trial(n);
  std::vector<double> best_nearest(n);
  Centers scratch(1, e);

  auto draw = [&](double total) {
    if (total <= 0.0) return static_cast<std::size_t>(rng.below(static_cast<int>(n)));
    double u = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      u -= nearest[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    return pick;
  };

  std::size_t pick = static_cast<std::size_t>(rng.below(static_cast<int>(n)));
  double total = 0.0;
  for (int j = 0; j < centers.k; ++j) {
    if (j > 0) {
      double best_total = std::numeric_limits<double>::infinity();
      for (int c = 0; c < candidates; ++c) {
        const std::size_t candidate = draw(total);
        e.densify(candidate, scratch.center(0));
        scratch.refresh(0);
        double potential = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          trial[i] = std::min(nearest[i], scratch.distance2(e, i, 0));
          potential += trial[i];
        }
        if (potential < best_total) {
          best_total = potential;
          pick = candidate;
          best_nearest.swap(trial);
        }
      }
    }
    e.densify(pick, centers.center(j));
    centers.refresh(j);
    if (j == 0) {
      for (std::size_t i = 0; i < n; ++i) nearest[i] = centers.distance2(e, i, 0);
    } else {
      nearest.swap(best_nearest);
    }
    total = 0.0;
    for (double d : nearest) total += d;
  }
}

void assign(const Embedding& e, const Centers& centers, std::vector<int>& labels, std::vector<double>& dist) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    int best = 0;
    double best_d = centers.distance2(e, i, 0);
    for (int j = 1; j < centers.k; ++j) {
      const double d = centers.distance2(e, i, j);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    labels[i] = best;
    dist[i] = best_d;
  }
}

// Moves the point farthest from its center into each empty cluster.
void fill_empty(std::vector<int>& labels, std::vector<double>& dist, int k) {
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[l];
  for (int j = 0; j < k; ++j) {
    if (sizes[j] > 0) continue;
    std::size_t far = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (sizes[labels[i]] <= 1) continue;
      if (far == labels.size() || dist[i] > dist[far]) far = i;
    }
    if (far == labels.size()) break;
    --sizes[labels[far]];
    labels[far] = j;
    dist[far] = 0.0;
    sizes[j] = 1;
  }
}

void update_centers(const Embedding& e, const std::vector<int>& labels, Centers& centers) {
  std::fill(centers.coords.begin(), centers.coords.end(), 0.0);
  std::vector<double> uniform_weight(static_cast<std::size_t>(centers.k) * centers.num_rows, 0.0);
  std::vector<int> sizes(static_cast<std::size_t>(centers.k), 0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const int j = labels[i];
    ++sizes[j];
    e.accumulate(i, centers.center(j),
                 std::span<double>(uniform_weight).subspan(static_cast<std::size_t>(j) * centers.num_rows,
                                                           centers.num_rows));
  }
  for (int j = 0; j < centers.k; ++j) {
    auto c = centers.center(j);
    if (sizes[j] > 0) {
      const double inv = 1.0 / sizes[j];
      for (int row = 0; row < centers.num_rows; ++row) {
        const double w = uniform_weight[static_cast<std::size_t>(j) * centers.num_rows + row] / centers.num_states;
        auto block = c.subspan(static_cast<std::size_t>(row) * centers.num_states, centers.num_states);
        for (double& v : block) v = (v + w) * inv;
      }
    }
    centers.refresh(j);
  }
}

LloydRun lloyd(const Embedding& e, int k, int max_iterations, Rng& rng) {
  Centers centers(k, e);
  seed_centers(e, centers, rng);
  LloydRun run;
  run.labels.assign(e.size(), -1);
  std::vector<int> previous;
  std::vector<double> dist(e.size(), 0.0);
  assign(e, centers, run.labels, dist);
  fill_empty(run.labels, dist, k);
  for (int iter = 0; iter < max_iterations; ++iter) {
    update_centers(e, run.labels, centers);
    previous = run.labels;
    assign(e, centers, run.labels, dist);
    fill_empty(run.labels, dist, k);
    if (run.labels == previous) break;
  }
  update_centers(e, run.labels, centers);
  for (std::size_t i = 0; i < e.size(); ++i) run.wcss += centers.distance2(e, i, run.labels[i]);
  return run;
}

}  // namespace

ClusterAssignment kmeans_cluster(std::span<const Trajectory> trajectories, int num_clusters, ModelSpace space,
                                 const KMeansOptions& options, std::uint64_t seed) {
  detail::require(num_clusters >= 1, "K must be positive");
  detail::require(trajectories.size() >= static_cast<std::size_t>(num_clusters),
                  "k-means needs at least K trajectories");
  detail::require(options.restarts >= 1 && options.max_iterations >= 1, "k-means needs restarts and iterations");

  const Embedding embedding(trajectories, space);
  LloydRun best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    LloydRun run = lloyd(embedding, num_clusters, options.max_iterations, rng);
    if (run.wcss < best.wcss) best = std::move(run);
  }

  ClusterAssignment out;
  out.labels = std::move(best.labels);
  out.score = best.wcss;
  out.models = pooled_models(trajectories, out.labels, num_clusters, space);
  return out;
}

}  // namespace cmdp
