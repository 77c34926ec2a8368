#pragma once

#include <cstdint>

namespace cmdp {

/// A probability expression clipped to [0, 1]; `vacuous` marks raw values above 1.
struct ProbabilityBound {
  double value = 1.0;
  double raw = 1.0;
  bool vacuous = true;
};

ProbabilityBound clip_probability(double raw);

/// e^{S - m eps^2 / 2}: tail bound on the L1 deviation of an m-sample
/// empirical distribution over S points.
ProbabilityBound weissman_bound(int num_points, std::int64_t samples, double eps);

struct WeissmanCheck {
  int trials = 0;
  int exceedances = 0;
  double frequency = 0.0;
  ProbabilityBound bound;
  /// Binomial standard error sqrt(b (1 - b) / trials) at the clipped bound b.
  double standard_error = 0.0;
  bool holds() const { return frequency <= bound.value + 3.0 * standard_error; }
};

/// Draws one distribution uniformly from the simplex, then counts trials whose
/// m-sample empirical distribution deviates by at least eps in L1. With m = 0
/// the empirical distribution is taken to be uniform.
WeissmanCheck verify_weissman_mc(int num_points, std::int64_t samples, double eps, int trials, std::uint64_t seed);

/// S^2 T^2 eps for a fixed policy, 3 S^2 T^2 eps between optimal values.
double simulation_lemma_bound(int num_states, int horizon, double eps, bool optimal);

struct SimulationLemmaOptions {
  int pairs = 200;
  int policies_per_pair = 20;
  int max_states = 5;
  int max_actions = 3;
  int max_horizon = 10;
  double max_eps = 0.2;
};

struct SimulationLemmaCheck {
  int cases = 0;
  int violations = 0;
  /// Largest |J_M - J_Mhat| / bound over cases with a positive bound.
  double worst_ratio = 0.0;
  /// Largest |V*_M - V*_Mhat| / (3 S^2 T^2 eps) across pairs.
  double worst_optimal_ratio = 0.0;
  bool holds() const { return violations == 0; }
};

/// Random MDP pairs whose kernels differ by at most max_eps in max-row L1;
/// each pair is checked against random stationary and time-varying policies
/// with exact policy evaluation.
SimulationLemmaCheck verify_simulation_lemma(const SimulationLemmaOptions& options, std::uint64_t seed);

struct RateInputs {
  int num_states = 1;
  int num_actions = 1;
  int num_contexts = 1;
  int horizon = 1;
  int exploration_steps = 0;
  double trajectories = 0.0;  // H
  double separation = 1.0;    // D
  double alpha = 1.0;
  double beta = 1.0;
  double constant_scale = 1.0;
};

/// The four order-of-magnitude rates, each multiplied by constant_scale.
struct RateBundle {
  double epsilon_H = 0.0;
  ProbabilityBound delta1_H;
  /// Unset when D <= 2 eps(H), where the expression is undefined.
  bool delta2_defined = false;
  ProbabilityBound delta2_eps;
  /// Two-term misclassification probability with the explicit /2 constants,
  /// evaluated without constant_scale.
  ProbabilityBound delta2_two_term;
  double zeta_eps = 0.0;
  double constant_scale = 1.0;
};

RateBundle lemma1_rates(const RateInputs& in);

/// (1 - d1) H_L (d2 E[T] + (1 - d2)(zeta + E[T_EC])) + d1 H_L E[T].
double theorem1_regret_bound(double batch_size, double expected_horizon, double expected_exploration, double delta1,
                             double delta2, double zeta);
double theorem1_regret_bound(double batch_size, double expected_horizon, double expected_exploration,
                             const RateBundle& rates);

struct CorollaryInputs {
  RateInputs rates;
  double previous_trajectories = 0.0;  // sum of earlier mini-batch sizes
  double batch_size = 1.0;             // H_L
};

struct CorollaryTerms {
  double misclassification = 0.0;  // H_L T K e^{S - T_EC D^2 / 4}
  double model_error = 0.0;        // H_L T^2 K S^3 A e^{S - alpha T D^2} + H_L T_EC
  double misclustering = 0.0;      // H_L T K S A e^{S - alpha T beta Hbar D^2}
  double total = 0.0;
};

CorollaryTerms corollary_bound(const CorollaryInputs& in);

}  // namespace cmdp
