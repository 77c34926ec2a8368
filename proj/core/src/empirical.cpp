#include "cmdp/empirical.hpp"

#include <algorithm>

#include "cmdp/errors.hpp"

namespace cmdp {

EmpiricalModel::EmpiricalModel(int num_states, int num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
  detail::require(num_states >= 1 && num_actions >= 1, "model needs at least one state and action");
  counts_.assign(static_cast<std::size_t>(num_states) * num_actions * num_states, 0);
  visits_.assign(static_cast<std::size_t>(num_states) * num_actions, 0);
}

void EmpiricalModel::add(const Trajectory& trajectory) {
  detail::require(trajectory.states.size() == trajectory.actions.size() + 1, "malformed trajectory");
  for (std::size_t t = 0; t < trajectory.actions.size(); ++t) {
    const int s = trajectory.states[t];
    const int a = trajectory.actions[t];
    const int next = trajectory.states[t + 1];
    detail::require(s >= 0 && s < num_states_ && next >= 0 && next < num_states_, "state index out of range");
    detail::require(a >= 0 && a < num_actions_, "action index out of range");
    ++counts_[row_index(s, a) * num_states_ + next];
    ++visits_[row_index(s, a)];
  }
}

void EmpiricalModel::merge(const EmpiricalModel& other) {
  detail::require(other.num_states_ == num_states_ && other.num_actions_ == num_actions_,
                  "cannot pool models over different spaces");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (std::size_t i = 0; i < visits_.size(); ++i) visits_[i] += other.visits_[i];
}

void EmpiricalModel::estimate_row(int s, int a, std::span<double> out) const {
  const std::int64_t n = visits_[row_index(s, a)];
  if (n == 0) {
    std::fill(out.begin(), out.end(), 1.0 / num_states_);
    return;
  }
  const std::int64_t* row = counts_.data() + row_index(s, a) * num_states_;
  for (int next = 0; next < num_states_; ++next) out[next] = static_cast<double>(row[next]) / static_cast<double>(n);
}

TransitionKernel EmpiricalModel::kernel_estimate() const {
  std::vector<double> probs(counts_.size());
  for (int s = 0; s < num_states_; ++s)
    for (int a = 0; a < num_actions_; ++a)
      estimate_row(s, a, std::span<double>(probs).subspan(row_index(s, a) * num_states_, num_states_));
  return TransitionKernel(num_states_, num_actions_, std::move(probs));
}

EmpiricalModel empirical_model(std::span<const Trajectory> trajectories, int num_states, int num_actions) {
  detail::require(!trajectories.empty(), "need at least one trajectory");
  EmpiricalModel model(num_states, num_actions);
  for (const Trajectory& t : trajectories) model.add(t);
  return model;
}

EmpiricalModel empirical_model(const Trajectory& trajectory, int num_states, int num_actions) {
  return empirical_model(std::span<const Trajectory>(&trajectory, 1), num_states, num_actions);
}

}  // namespace cmdp
