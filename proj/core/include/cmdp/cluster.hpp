#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmdp/empirical.hpp"
#include "cmdp/mdp.hpp"

namespace cmdp {

struct ModelSpace {
  int num_states = 1;
  int num_actions = 1;
};

/// A partition of trajectories into K groups with their pooled models.
struct ClusterAssignment {
  std::vector<int> labels;
  /// models[k] pools every trajectory labeled k; empty clusters are all-uniform.
  std::vector<EmpiricalModel> models;
  /// Objective of the clusterer that produced the partition.
  double score = 0.0;

  std::vector<TransitionKernel> kernels() const;
};

/// Pools the labeled trajectories into one model per cluster.
std::vector<EmpiricalModel> pooled_models(std::span<const Trajectory> trajectories, std::span<const int> labels,
                                          int num_clusters, ModelSpace space);

/// sum_k sum_{h in C_k} max_{s,a} || P_h(.|s,a) - P_k(.|s,a) ||_1 with pooled P_k.
double partition_score(std::span<const Trajectory> trajectories, std::span<const int> labels, int num_clusters,
                       ModelSpace space);

inline constexpr int kExhaustiveLimit = 12;

/// Global minimizer of partition_score over partitions into at most K blocks.
/// Throws ExhaustiveLimitExceeded above kExhaustiveLimit trajectories.
ClusterAssignment exhaustive_cluster(std::span<const Trajectory> trajectories, int num_clusters, ModelSpace space);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
};

/// Lloyd's algorithm on flattened empirical kernels (S*A*S coordinates,
/// unvisited rows uniform) with distance-weighted seeding. Keeps the restart
/// with the smallest within-cluster sum of squares, which becomes the score.
ClusterAssignment kmeans_cluster(std::span<const Trajectory> trajectories, int num_clusters, ModelSpace space,
                                 const KMeansOptions& options, std::uint64_t seed);

}  // namespace cmdp
