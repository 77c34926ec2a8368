#include "cmdp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cmdp/errors.hpp"
#include "cmdp/random.hpp"

namespace cmdp {

ProbabilityBound clip_probability(double raw) {
  if (std::isnan(raw)) raw = 1.0;
  return ProbabilityBound{raw > 1.0 ? 1.0 : raw, raw, raw > 1.0};
}

ProbabilityBound weissman_bound(int num_points, std::int64_t samples, double eps) {
  detail::require(eps > 0.0, "eps must be positive");
  detail::require(num_points >= 1 && samples >= 0, "need S >= 1 and m >= 0");
  return clip_probability(std::exp(num_points - static_cast<double>(samples) * eps * eps / 2.0));
}

WeissmanCheck verify_weissman_mc(int num_points, std::int64_t samples, double eps, int trials, std::uint64_t seed) {
  detail::require(trials >= 1, "need at least one trial");
  WeissmanCheck check;
  check.trials = trials;
  check.bound = weissman_bound(num_points, samples, eps);
  const double b = check.bound.value;
  check.standard_error = std::sqrt(b * (1.0 - b) / trials);

  Rng rng(seed);
  const std::vector<double> p = sample_simplex(num_points, rng);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_points));
  for (int trial = 0; trial < trials; ++trial) {
    double deviation = 0.0;
    if (samples == 0) {
      for (int i = 0; i < num_points; ++i) deviation += std::abs(p[i] - 1.0 / num_points);
    } else {
      std::fill(counts.begin(), counts.end(), 0);
      for (std::int64_t j = 0; j < samples; ++j) ++counts[rng.categorical(p)];
      for (int i = 0; i < num_points; ++i)
        deviation += std::abs(p[i] - static_cast<double>(counts[i]) / static_cast<double>(samples));
    }
    if (deviation >= eps) ++check.exceedances;
  }
  check.frequency = static_cast<double>(check.exceedances) / trials;
  return check;
}

double simulation_lemma_bound(int num_states, int horizon, double eps, bool optimal) {
  detail::require(eps >= 0.0, "eps must be nonnegative");
  const double s = num_states;
  const double t = horizon;
  return (optimal ? 3.0 : 1.0) * s * s * t * t * eps;
}

RateBundle lemma1_rates(const RateInputs& in) {
  detail::require(in.separation > 0.0, "separation D must be positive");
  const double c = in.constant_scale;
  const double s = in.num_states;
  const double ksa = static_cast<double>(in.num_contexts) * in.num_states * in.num_actions;
  const double d2 = in.separation * in.separation;

  RateBundle out;
  out.constant_scale = c;
  out.epsilon_H = c * ksa * std::exp(s - in.alpha * in.horizon * d2);
  out.delta1_H = clip_probability(c * ksa * std::exp(s - in.alpha * in.horizon * in.beta * in.trajectories * d2));
  out.zeta_eps = c * s * s * static_cast<double>(in.horizon) * in.horizon * out.epsilon_H;

  out.delta2_defined = in.separation > 2.0 * out.epsilon_H;
  if (out.delta2_defined) {
    const double gap = in.separation / 2.0 - out.epsilon_H;
    const double far = 1.5 * in.separation + out.epsilon_H;
    out.delta2_eps = clip_probability(c * in.num_contexts * std::exp(s - in.exploration_steps * gap * gap));
    out.delta2_two_term = clip_probability(std::exp(s - in.exploration_steps * gap * gap / 2.0) +
                                           in.num_contexts * std::exp(s - in.exploration_steps * far * far / 2.0));
  }
  return out;
}

double theorem1_regret_bound(double batch_size, double expected_horizon, double expected_exploration, double delta1,
                             double delta2, double zeta) {
  detail::require(delta1 >= 0.0 && delta1 <= 1.0 && delta2 >= 0.0 && delta2 <= 1.0,
                  "probabilities must lie in [0, 1]");
  return (1.0 - delta1) * batch_size * (delta2 * expected_horizon + (1.0 - delta2) * (zeta + expected_exploration)) +
         delta1 * batch_size * expected_horizon;
}

double theorem1_regret_bound(double batch_size, double expected_horizon, double expected_exploration,
                             const RateBundle& rates) {
  // An undefined misclassification rate is charged as certain failure.
  const double delta2 = rates.delta2_defined ? rates.delta2_eps.value : 1.0;
  return theorem1_regret_bound(batch_size, expected_horizon, expected_exploration, rates.delta1_H.value, delta2,
                               rates.zeta_eps);
}

CorollaryTerms corollary_bound(const CorollaryInputs& in) {
  const RateInputs& r = in.rates;
  const double c = r.constant_scale;
  const double s = r.num_states;
  const double a = r.num_actions;
  const double k = r.num_contexts;
  const double t = r.horizon;
  const double d2 = r.separation * r.separation;
  const double hl = in.batch_size;

  CorollaryTerms out;
  out.misclassification = c * hl * t * k * std::exp(s - r.exploration_steps * d2 / 4.0);
  out.model_error = c * (hl * t * t * k * s * s * s * a * std::exp(s - r.alpha * t * d2) + hl * r.exploration_steps);
  out.misclustering = c * hl * t * k * s * a * std::exp(s - r.alpha * t * r.beta * in.previous_trajectories * d2);
  out.total = out.misclassification + out.model_error + out.misclustering;
  return out;
}

}  // namespace cmdp
