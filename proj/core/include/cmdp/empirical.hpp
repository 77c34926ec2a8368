#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmdp/mdp.hpp"

namespace cmdp {

/// Transition counts pooled over one or more trajectories and the kernel they
/// induce. Rows of unvisited (s, a) pairs are uniform.
class EmpiricalModel {
 public:
  EmpiricalModel(int num_states, int num_actions);

  void add(const Trajectory& trajectory);
  /// Pools the counts of another model over the same spaces.
  void merge(const EmpiricalModel& other);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  std::int64_t count(int s, int a, int next) const { return counts_[row_index(s, a) * num_states_ + next]; }
  std::int64_t visits(int s, int a) const { return visits_[row_index(s, a)]; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<std::int64_t>& total_visits() const { return visits_; }

  /// Row estimate without materializing the full kernel.
  void estimate_row(int s, int a, std::span<double> out) const;

  TransitionKernel kernel_estimate() const;

 private:
  std::size_t row_index(int s, int a) const { return static_cast<std::size_t>(s) * num_actions_ + a; }

  int num_states_;
  int num_actions_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> visits_;
};

EmpiricalModel empirical_model(std::span<const Trajectory> trajectories, int num_states, int num_actions);
EmpiricalModel empirical_model(const Trajectory& trajectory, int num_states, int num_actions);

}  // namespace cmdp
