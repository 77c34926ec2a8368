#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "cmdp/cece.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/planning.hpp"
#include "cmdp/serialize.hpp"
#include "oracles.hpp"

using namespace cmdp;

namespace {

std::vector<Trajectory> sample(const ContextualMdp& c, int count, int horizon, std::uint64_t seed) {
  std::vector<Trajectory> out;
  for (int i = 0; i < count; ++i)
    out.push_back(simulate_episode(c, Policy::uniform(c.num_actions()), horizon,
                                   derive_seed(seed, {static_cast<std::uint64_t>(i)})));
  return out;
}

std::vector<int> truth_of(const std::vector<Trajectory>& ts) {
  std::vector<int> out;
  for (const auto& t : ts) out.push_back(*t.true_context);
  return out;
}

// Context 0 stays or swaps per action; context 1 does the opposite.
ContextualMdp stay_swap_pair() {
  const TransitionKernel a(2, 2, {1, 0, 0, 1, 0, 1, 1, 0});
  const TransitionKernel b(2, 2, {0, 1, 1, 0, 1, 0, 0, 1});
  return oracle::two_context(a, b, {0.0, 1.0});
}

}  // namespace

TEST_SUITE("exhaustive clustering") {
  TEST_CASE("two identical trajectories with K=1 score zero") {
    const auto c = generate_random_cmdp(3, 2, 1, 1);
    const auto t = simulate_episode(c, Policy::uniform(2), 20, 4);
    const std::vector<Trajectory> data{t, t};
    const auto r = exhaustive_cluster(data, 1, {3, 2});
    CHECK(r.score == doctest::Approx(0.0));
    CHECK(r.labels == std::vector<int>{0, 0});
  }

  TEST_CASE("identity and swap trajectories separate, beating every mixed partition") {
    const auto c = oracle::two_context(oracle::identity_kernel(2, 1), oracle::shift_kernel(2, 1), {0.0, 1.0});
    std::vector<Trajectory> data;
    for (int ctx : {0, 0, 1, 1}) {
      auto t = simulate_on_mdp(c.contexts[ctx], Policy::uniform(1), ctx == 0 ? 0 : 1, 50, 3);
      t.true_context = ctx;
      data.push_back(t);
    }
    // The identity trajectories start in different states so they disagree on no visited row.
    data[1] = simulate_on_mdp(c.contexts[0], Policy::uniform(1), 1, 50, 5);
    data[1].true_context = 0;
    const auto r = exhaustive_cluster(data, 2, {2, 1});
    CHECK(r.labels[0] == r.labels[1]);
    CHECK(r.labels[2] == r.labels[3]);
    CHECK(r.labels[0] != r.labels[2]);
    // All 7 two-block partitions, as label vectors with labels[0] = 0.
    for (int mask = 1; mask < 8; ++mask) {
      std::vector<int> labels{0, mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
      if (labels == std::vector<int>{0, 0, 1, 1}) continue;
      CHECK(r.score < partition_score(data, labels, 2, {2, 1}));
    }
  }

  TEST_CASE("matches an independent K^H enumeration on random short trajectories") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto c = generate_random_cmdp(3, 2, 2, seed);
      const auto data = sample(c, 8, 6, seed * 10);
      const auto r = exhaustive_cluster(data, 2, {3, 2});
      CHECK(std::abs(r.score - oracle::enumerate_min_partition(data, 2, 3, 2)) <= 1e-12);
      CHECK(std::abs(r.score - oracle::partition_objective(data, r.labels, 2, 3, 2)) <= 1e-12);
    }
  }

  TEST_CASE("limit and argument errors") {
    const auto c = generate_random_cmdp(2, 1, 1, 1);
    CHECK_THROWS_AS(exhaustive_cluster(sample(c, kExhaustiveLimit + 1, 3, 1), 2, {2, 1}), ExhaustiveLimitExceeded);
    CHECK_THROWS_AS(exhaustive_cluster(sample(c, 2, 3, 1), 3, {2, 1}), InvalidParameter);
  }

  TEST_CASE("pooled models match the assignment") {
    const auto c = generate_random_cmdp(3, 2, 2, 9);
    const auto data = sample(c, 6, 10, 2);
    const auto r = exhaustive_cluster(data, 2, {3, 2});
    const auto pooled = pooled_models(data, r.labels, 2, {3, 2});
    for (int k = 0; k < 2; ++k) CHECK(pooled[k].counts() == r.models[k].counts());
  }
}

TEST_SUITE("k-means clustering") {
  TEST_CASE("K=1 puts everything in one cluster") {
    const auto c = generate_random_cmdp(4, 2, 2, 3);
    const auto data = sample(c, 10, 30, 1);
    const auto r = kmeans_cluster(data, 1, {4, 2}, {}, 5);
    CHECK(std::all_of(r.labels.begin(), r.labels.end(), [](int l) { return l == 0; }));
    CHECK(r.models[0].counts() == empirical_model(data, 4, 2).counts());
  }

  TEST_CASE("two well-separated S=2 kernels separate perfectly") {
    // Max-row L1 separation 1: p(stay) of 0.75 versus 0.25.
    const TransitionKernel a(2, 1, {0.75, 0.25, 0.25, 0.75});
    const TransitionKernel b(2, 1, {0.25, 0.75, 0.75, 0.25});
    CHECK(model_distance(a, b).epsilon == doctest::Approx(1.0));
    const auto c = oracle::two_context(a, b, {0.0, 1.0});
    std::vector<Trajectory> data;
    for (int ctx = 0; ctx < 2; ++ctx)
      for (int i = 0; i < 20; ++i) {
        auto t = simulate_on_mdp(c.contexts[ctx], Policy::uniform(1), std::nullopt, 5000,
                                 derive_seed(3, {static_cast<std::uint64_t>(ctx), static_cast<std::uint64_t>(i)}));
        t.true_context = ctx;
        data.push_back(t);
      }
    const auto r = kmeans_cluster(data, 2, {2, 1}, {}, 8);
    CHECK(entropy_score(r.labels, truth_of(data), 2) == 0.0);
  }

  TEST_CASE("experiment-1 instance at T=8000 clusters almost perfectly") {
    const auto c = generate_random_cmdp(100, 2, 5, 21);
    const auto data = sample(c, 100, 8000, 22);
    const auto r = kmeans_cluster(data, 5, {100, 2}, {}, 23);
    CHECK(entropy_score(r.labels, truth_of(data), 5) <= 0.1);
  }

  TEST_CASE("reproducible and never worse than exhaustive on the exhaustive objective") {
    const auto c = generate_random_cmdp(3, 2, 2, 4);
    const auto data = sample(c, 8, 15, 6);
    const auto a = kmeans_cluster(data, 2, {3, 2}, {}, 77);
    const auto b = kmeans_cluster(data, 2, {3, 2}, {}, 77);
    CHECK(a.labels == b.labels);
    CHECK(a.score == b.score);
    const auto best = exhaustive_cluster(data, 2, {3, 2});
    CHECK(best.score <= partition_score(data, a.labels, 2, {3, 2}) + 1e-12);
  }

  TEST_CASE("fewer trajectories than clusters is an error") {
    const auto c = generate_random_cmdp(3, 2, 2, 4);
    CHECK_THROWS_AS(kmeans_cluster(sample(c, 2, 5, 1), 3, {3, 2}, {}, 1), InvalidParameter);
  }
}

TEST_SUITE("explore and classify") {
  TEST_CASE("uniform_explore takes exactly the requested steps") {
    const auto c = generate_random_cmdp(4, 3, 1, 2);
    LiveEpisode ep(c.contexts[0], 0, 5);
    Rng agent(6);
    const auto partial = uniform_explore(ep, 1, agent);
    CHECK(partial.actions.size() == 1);
    CHECK(partial.states.size() == 2);
    CHECK(ep.state() == partial.states.back());
  }

  TEST_CASE("a single action forces zeros") {
    const auto c = generate_random_cmdp(3, 1, 1, 2);
    LiveEpisode ep(c.contexts[0], 0, 5);
    Rng agent(6);
    const auto partial = uniform_explore(ep, 30, agent);
    CHECK(std::all_of(partial.actions.begin(), partial.actions.end(), [](int a) { return a == 0; }));
  }

  TEST_CASE("action frequencies approach 1/A") {
    const Mdp m{TransitionKernel::uniform(4, 3), std::vector<double>(4, 0.0), std::vector<double>(4, 0.25)};
    LiveEpisode ep(m, 0, 5);
    Rng agent(6);
    const auto partial = uniform_explore(ep, 10000, agent);
    std::vector<int> freq(3, 0);
    for (int a : partial.actions) ++freq[a];
    for (int f : freq) CHECK(std::abs(f / 10000.0 - 1.0 / 3) <= 0.02);
  }

  TEST_CASE("deterministic models are identified exactly") {
    const auto k0 = oracle::identity_kernel(3, 1);
    const auto k1 = oracle::shift_kernel(3, 1);
    const TransitionKernel k2(3, 1, {0, 0, 1, 1, 0, 0, 0, 1, 0});  // x -> x - 1
    const std::vector<TransitionKernel> models{k0, k1, k2};
    const Mdp m{k2, {0.0, 0.5, 1.0}, {1.0, 0.0, 0.0}};
    const auto t = simulate_on_mdp(m, Policy::uniform(1), 0, 10, 1);
    CHECK(min_l1_classify(t, models) == 2);
  }

  TEST_CASE("identical models tie to index 0") {
    const auto k = generate_random_cmdp(3, 2, 1, 1).contexts[0].kernel;
    const std::vector<TransitionKernel> models{k, k};
    const Mdp m{k, {0.0, 0.5, 1.0}, {1.0, 0.0, 0.0}};
    CHECK(min_l1_classify(simulate_on_mdp(m, Policy::uniform(2), 0, 50, 3), models) == 0);
  }

  TEST_CASE("no transitions means classification is impossible") {
    const auto k = oracle::identity_kernel(2, 1);
    const std::vector<TransitionKernel> models{k};
    Trajectory t{{0}, {}, {0.0}, {}};
    CHECK_THROWS_AS(min_l1_classify(t, models), ClassificationImpossible);
  }

  TEST_CASE("separation 1 with 500 exploration steps is at least 99% accurate") {
    const TransitionKernel a(2, 1, {0.75, 0.25, 0.25, 0.75});
    const TransitionKernel b(2, 1, {0.25, 0.75, 0.75, 0.25});
    const std::vector<TransitionKernel> models{a, b};
    const auto c = oracle::two_context(a, b, {0.0, 1.0});
    int correct = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto t = simulate_episode(c, Policy::uniform(1), 500, derive_seed(50, {static_cast<std::uint64_t>(i)}));
      correct += min_l1_classify(t, models) == *t.true_context;
    }
    CHECK(correct >= 990);
  }

  TEST_CASE("permuting the models permutes the answer") {
    const auto c = generate_random_cmdp(4, 2, 4, 12);
    std::vector<TransitionKernel> models;
    for (const auto& m : c.contexts) models.push_back(m.kernel);
    const std::vector<int> perm{2, 0, 3, 1};
    std::vector<TransitionKernel> permuted;
    for (int p : perm) permuted.push_back(models[p]);
    for (int i = 0; i < 30; ++i) {
      const auto t = simulate_episode(c, Policy::uniform(2), 40, derive_seed(13, {static_cast<std::uint64_t>(i)}));
      const int original = min_l1_classify(t, models);
      const int moved = min_l1_classify(t, permuted);
      CHECK(perm[moved] == original);
    }
  }
}

TEST_SUITE("exploitation") {
  TEST_CASE("zero remaining steps") {
    const auto c = generate_random_cmdp(3, 2, 1, 1);
    LiveEpisode ep(c.contexts[0], 0, 1);
    CHECK(dp_exploit(ep, c.contexts[0], 0).empty());
    QTable q(3, 2, 0.25);
    Rng agent(1);
    CHECK(qlearning_exploit(ep, q, 0, {}, agent).empty());
    CHECK(q.values == std::vector<double>(6, 0.25));
  }

  TEST_CASE("dp_exploit with the true model attains the optimal remaining value") {
    const auto m = oracle::make_mdp(2, 2, {1, 0, 0, 1, 0, 1, 1, 0}, {0.0, 1.0}, {1.0, 0.0});
    const int remaining = 4;
    const double target = optimal_finite_horizon(m, remaining).start_values[0] - m.rewards[0];
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      LiveEpisode ep(m, 0, derive_seed(1, {static_cast<std::uint64_t>(i)}));
      const auto r = dp_exploit(ep, m, remaining);
      sum += std::accumulate(r.begin(), r.end(), 0.0);
    }
    CHECK(sum / n == doctest::Approx(target).epsilon(1e-9));
  }

  TEST_CASE("value loss of planning on an eps-close model is within 3 S^2 T^2 eps") {
    Rng rng(44);
    for (int i = 0; i < 30; ++i) {
      const int s = 2 + rng.below(4), a = 1 + rng.below(2), t = 1 + rng.below(10);
      const auto truth = oracle::random_mdp(s, a, rng);
      std::vector<double> p = truth.kernel.flat();
      for (int r = 0; r < s * a; ++r) {
        const auto q = oracle::random_row(s, rng);
        for (int y = 0; y < s; ++y) p[r * s + y] = 0.95 * p[r * s + y] + 0.05 * q[y];
      }
      const Mdp estimate{TransitionKernel(s, a, p), truth.rewards, truth.initial_dist};
      const double eps = model_distance(truth.kernel, estimate.kernel).epsilon;
      const auto plan = optimal_finite_horizon(estimate, t);
      const double loss = optimal_finite_horizon(truth, t).optimal_value - policy_value(truth, plan.policy, t);
      CHECK(loss >= -1e-12);
      CHECK(loss <= 3.0 * s * s * t * t * eps + 1e-12);
    }
  }

  TEST_CASE("Q-learning finds 'move to state 1 and stay' on a deterministic chain") {
    const auto m = oracle::make_mdp(2, 2, {1, 0, 0, 1, 0, 1, 1, 0}, {0.0, 1.0}, {1.0, 0.0});
    QTable q(2, 2, 0.0);
    QLearningParams params;
    Rng agent(3);
    int steps = 0;
    for (int e = 0; steps < 10000; ++e) {
      LiveEpisode ep(m, 0, derive_seed(5, {static_cast<std::uint64_t>(e)}));
      qlearning_exploit(ep, q, 50, params, agent);
      steps += 50;
    }
    CHECK(q.greedy(0) == 1);
    CHECK(q.greedy(1) == 0);
  }

  TEST_CASE("explore_rate 1 acts uniformly") {
    const Mdp m{TransitionKernel::uniform(3, 4), std::vector<double>(3, 0.5), std::vector<double>(3, 1.0 / 3)};
    QTable q(3, 4, 0.0);
    QLearningParams params;
    params.explore_rate = 1.0;
    Rng agent(2);
    LiveEpisode ep(m, 0, 9);
    qlearning_exploit(ep, q, 20000, params, agent);
    std::vector<int> freq(4, 0);
    for (int a : ep.observed().actions) ++freq[a];
    for (int f : freq) CHECK(std::abs(f / 20000.0 - 0.25) <= 0.02);
  }

  TEST_CASE("hyperparameter validation") {
    QLearningParams p;
    p.learn_rate = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p.learn_rate = 1.0;
    p.explore_rate = 1.5;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
  }
}

TEST_SUITE("run_cece") {
  CeceConfig basic(int k, int horizon, int exploration, std::vector<int> batches) {
    CeceConfig c;
    c.num_contexts = k;
    c.horizon = horizon;
    c.exploration_steps = exploration;
    c.minibatch_sizes = std::move(batches);
    return c;
  }

  TEST_CASE("config validation") {
    auto c = basic(2, 10, 3, {2});
    CHECK_NOTHROW(c.validate());
    c.exploration_steps = 10;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c.exploration_steps.reset();
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c.exploration_fraction = 0.3;
    CHECK(c.resolved_exploration_steps() == 3);
    c.minibatch_sizes = {};
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c.minibatch_sizes = {1};
    c.cluster.name = "spectral";
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
  }

  TEST_CASE("K=1 with injected truth: regret is exploration loss only") {
    const auto cmdp = generate_random_cmdp(4, 2, 1, 3);
    auto config = basic(1, 12, 4, {50});
    config.cluster.name = "oracle";
    const auto run = run_cece(cmdp, config, 8);
    // Expected per-episode regret: J*(T) minus (uniform for T_EC steps, then optimal for the rest).
    const Mdp& m = cmdp.contexts[0];
    const auto rest = optimal_finite_horizon(m, 12 - 4);
    std::vector<double> dist = m.initial_dist;
    double explore_value = 0.0;
    for (int t = 0; t < 4; ++t) {
      for (int s = 0; s < 4; ++s) explore_value += dist[s] * m.rewards[s];
      std::vector<double> next(4, 0.0);
      for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 2; ++a)
          for (int y = 0; y < 4; ++y) next[y] += dist[s] * 0.5 * m.kernel(s, a, y);
      dist = next;
    }
    double continuation = 0.0;
    for (int s = 0; s < 4; ++s) continuation += dist[s] * rest.start_values[s];
    const double expected = optimal_finite_horizon(m, 12).optimal_value - (explore_value + continuation);
    double sum = 0.0, sum2 = 0.0;
    for (const auto& r : run.ledger.records()) {
      const double regret = r.optimal_value - r.realized_reward;
      sum += regret;
      sum2 += regret * regret;
    }
    const double n = static_cast<double>(run.ledger.records().size());
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - expected) <= 4.0 * se + 1e-9);
    CHECK(run.classification_failures == 0);
  }

  TEST_CASE("ledger and outcome sums are consistent") {
    const auto cmdp = generate_random_cmdp(5, 2, 2, 4);
    auto config = basic(2, 30, 10, {6, 6, 6});
    const auto run = run_cece(cmdp, config, 1);
    REQUIRE(run.outcomes.size() == 18);
    double total = 0.0;
    for (std::size_t i = 0; i < run.outcomes.size(); ++i) {
      const auto& o = run.outcomes[i];
      const auto& r = run.ledger.records()[i];
      CHECK(std::abs(o.exploration_reward + o.exploitation_reward - o.trajectory.total_reward()) <= 1e-9);
      CHECK(r.realized_reward == doctest::Approx(o.trajectory.total_reward()));
      CHECK(o.trajectory.horizon() == 30);
      CHECK(o.trajectory.true_context == r.true_context);
      total += r.optimal_value - r.realized_reward;
    }
    CHECK(compute_regret(run.ledger) == doctest::Approx(total));
    // The first batch runs uniformly with no classification.
    for (int i = 0; i < 6; ++i) CHECK_FALSE(run.outcomes[i].classified_context.has_value());
    for (int i = 6; i < 18; ++i) CHECK(run.outcomes[i].classified_context.has_value());
  }

  TEST_CASE("identical seeds reproduce the ledger bit for bit") {
    const auto cmdp = generate_random_cmdp(6, 3, 3, 2);
    auto config = basic(3, 40, 12, {6, 6});
    config.exploit.name = "qlearning";
    const auto a = run_cece(cmdp, config, 99);
    const auto b = run_cece(cmdp, config, 99);
    REQUIRE(a.ledger.records().size() == b.ledger.records().size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
      CHECK(to_json(a.outcomes[i].trajectory) == to_json(b.outcomes[i].trajectory));
      CHECK(a.ledger.records()[i].classified_context == b.ledger.records()[i].classified_context);
    }
    CHECK(a.average_reward() == b.average_reward());
  }

  TEST_CASE("maximally separated S=2 contexts are classified after the first batch") {
    const auto cmdp = stay_swap_pair();
    auto config = basic(2, 60, 20, {10, 100});
    const auto run = run_cece(cmdp, config, 5);
    int wrong = 0, total = 0;
    for (const auto& r : run.ledger.records())
      if (r.batch >= 1) {
        ++total;
        wrong += !r.correct_classification;
      }
    CHECK(wrong <= 0.01 * total);
  }

  TEST_CASE("regret is nonnegative on average") {
    const auto cmdp = generate_random_cmdp(5, 2, 2, 8);
    auto config = basic(2, 20, 6, {20, 90, 90});
    const auto run = run_cece(cmdp, config, 3);
    double sum = 0.0, sum2 = 0.0;
    for (const auto& r : run.ledger.records()) {
      const double d = r.realized_reward - r.optimal_value;
      sum += d;
      sum2 += d * d;
    }
    const double n = static_cast<double>(run.ledger.records().size());
    const double mean = sum / n;
    CHECK(mean <= 3.0 * std::sqrt((sum2 / n - mean * mean) / n));
  }

  TEST_CASE("no exploration with K >= 2 records classification failures") {
    const auto cmdp = generate_random_cmdp(4, 2, 2, 8);
    auto config = basic(2, 20, 0, {10, 10});
    const auto run = run_cece(cmdp, config, 3);
    CHECK(run.classification_failures == 10);
    for (const auto& r : run.ledger.records())
      if (r.batch == 1) CHECK(r.classification_failed);
  }

  TEST_CASE("injected truth meets the misclassification bound when it is informative") {
    // Identity versus shift on S=2: D = 2 and the true models carry eps = 0.
    const auto cmdp = oracle::two_context(oracle::identity_kernel(2, 1), oracle::shift_kernel(2, 1), {0.2, 0.8});
    auto config = basic(2, 16, 8, {300});
    config.cluster.name = "oracle";
    const auto run = run_cece(cmdp, config, 4);
    const double bound = 1.0 - 2.0 * std::exp(2.0 - 8.0 * 1.0 / 2.0);
    int correct = 0;
    for (const auto& r : run.ledger.records()) correct += r.correct_classification;
    CHECK(correct / 300.0 >= bound);
  }

  TEST_CASE("config K must match the instance") {
    const auto cmdp = generate_random_cmdp(4, 2, 2, 8);
    CHECK_THROWS_AS(run_cece(cmdp, basic(3, 10, 2, {5}), 1), InvalidParameter);
  }
}
