#include <algorithm>
#include <cmath>

#include "cmdp/bounds.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/eval.hpp"
#include "cmdp/planning.hpp"
#include "cmdp/random.hpp"

namespace cmdp {

namespace {

Mdp random_mdp(int num_states, int num_actions, Rng& rng) {
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(num_states) * num_actions * num_states);
  for (int row = 0; row < num_states * num_actions; ++row) {
    const auto p = sample_simplex(num_states, rng);
    probs.insert(probs.end(), p.begin(), p.end());
  }
  std::vector<double> rewards(static_cast<std::size_t>(num_states));
  for (double& r : rewards) r = rng.uniform();
  return Mdp{TransitionKernel(num_states, num_actions, std::move(probs)), std::move(rewards),
             sample_simplex(num_states, rng)};
}

// Each row moves toward a random simplex point by an L1 amount of at most eps.
Mdp perturb(const Mdp& mdp, double eps, Rng& rng) {
  const int num_states = mdp.num_states();
  std::vector<double> probs = mdp.kernel.flat();
  for (int row = 0; row < num_states * mdp.num_actions(); ++row) {
    const auto target = sample_simplex(num_states, rng);
    double* p = probs.data() + static_cast<std::size_t>(row) * num_states;
    double distance = 0.0;
    for (int y = 0; y < num_states; ++y) distance += std::abs(target[y] - p[y]);
    if (distance <= 0.0) continue;
    const double lambda = std::min(1.0, eps * rng.uniform() / distance);
    for (int y = 0; y < num_states; ++y) p[y] = (1.0 - lambda) * p[y] + lambda * target[y];
  }
  return Mdp{TransitionKernel(num_states, mdp.num_actions(), std::move(probs)), mdp.rewards, mdp.initial_dist};
}

Policy random_policy(int num_states, int num_actions, int horizon, int index, Rng& rng) {
  if (index % 2 == 0) {
    std::vector<double> probs;
    for (int s = 0; s < num_states; ++s) {
      const auto p = sample_simplex(num_actions, rng);
      probs.insert(probs.end(), p.begin(), p.end());
    }
    return Policy::stochastic(num_actions, std::move(probs));
  }
  std::vector<int> actions(static_cast<std::size_t>(std::max(horizon, 1)) * num_states);
  for (int& a : actions) a = rng.below(num_actions);
  return Policy::time_varying(num_states, num_actions, std::move(actions));
}

}  // namespace

SimulationLemmaCheck verify_simulation_lemma(const SimulationLemmaOptions& options, std::uint64_t seed) {
  detail::require(options.pairs >= 1 && options.policies_per_pair >= 1, "need at least one pair and policy");
  detail::require(options.max_states >= 1 && options.max_actions >= 1 && options.max_horizon >= 1,
                  "maximum sizes must be positive");
  detail::require(options.max_eps >= 0.0, "max_eps must be nonnegative");

  SimulationLemmaCheck check;
  for (int pair = 0; pair < options.pairs; ++pair) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(pair)}));
    const int num_states = 1 + rng.below(options.max_states);
    const int num_actions = 1 + rng.below(options.max_actions);
    const int horizon = 1 + rng.below(options.max_horizon);
    const double eps_target = options.max_eps * rng.uniform();

    const Mdp model = random_mdp(num_states, num_actions, rng);
    const Mdp approx = perturb(model, eps_target, rng);
    const double eps = model_distance(model.kernel, approx.kernel).epsilon;

    const double bound = simulation_lemma_bound(num_states, horizon, eps, false);
    for (int i = 0; i < options.policies_per_pair; ++i) {
      const Policy policy = random_policy(num_states, num_actions, horizon, i, rng);
      const double gap = std::abs(policy_value(model, policy, horizon) - policy_value(approx, policy, horizon));
      ++check.cases;
      if (gap > bound + 1e-12) ++check.violations;
      if (bound > 0.0) check.worst_ratio = std::max(check.worst_ratio, gap / bound);
    }
    const double optimal_bound = simulation_lemma_bound(num_states, horizon, eps, true);
    const double optimal_gap = std::abs(optimal_finite_horizon(model, horizon).optimal_value -
                                        optimal_finite_horizon(approx, horizon).optimal_value);
    if (optimal_gap > optimal_bound + 1e-12) ++check.violations;
    if (optimal_bound > 0.0) check.worst_optimal_ratio = std::max(check.worst_optimal_ratio, optimal_gap / optimal_bound);
  }
  return check;
}

}  // namespace cmdp
