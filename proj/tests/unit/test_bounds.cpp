#include <cmath>
#include <limits>

#include "doctest.h"

#include "cmdp/bounds.hpp"
#include "cmdp/errors.hpp"

using namespace cmdp;

TEST_SUITE("weissman") {
  TEST_CASE("closed form") {
    const auto none = weissman_bound(3, 0, 1.0);
    CHECK(none.vacuous);
    CHECK(none.value == 1.0);
    CHECK(none.raw == doctest::Approx(std::exp(3.0)));

    const auto b = weissman_bound(3, 100, 0.5);
    CHECK_FALSE(b.vacuous);
    CHECK(b.value == doctest::Approx(std::exp(-9.5)).epsilon(1e-13));
    CHECK(b.value == doctest::Approx(7.485e-5).epsilon(1e-3));

    CHECK_THROWS_AS(weissman_bound(3, 10, 0.0), InvalidParameter);
    CHECK_THROWS_AS(weissman_bound(3, 10, -0.1), InvalidParameter);
  }

  TEST_CASE("monotone in m, eps and S") {
    for (int m = 1; m < 2000; m += 37) {
      CHECK(weissman_bound(2, m + 1, 0.5).raw < weissman_bound(2, m, 0.5).raw);
      CHECK(weissman_bound(2, m, 0.6).raw < weissman_bound(2, m, 0.5).raw);
      CHECK(weissman_bound(3, m, 0.5).raw > weissman_bound(2, m, 0.5).raw);
    }
    CHECK(weissman_bound(2, 1000000, 0.5).value < 1e-300);
  }

  TEST_CASE("Monte Carlo frequency for a large sample is essentially zero") {
    const auto check = verify_weissman_mc(2, 1000, 0.5, 10000, 17);
    CHECK(check.exceedances == 0);
    CHECK(check.holds());
  }

  TEST_CASE("eps above the L1 range is never reached") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(verify_weissman_mc(3, 5, 2.0 + 1e-9, 2000, seed).exceedances == 0);
  }

  TEST_CASE("m = 0 is deterministic per distribution") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const double f = verify_weissman_mc(3, 0, 0.3, 50, seed).frequency;
      CHECK((f == 0.0 || f == 1.0));
    }
  }

  TEST_CASE("grid of small cases holds within three standard errors") {
    for (int s : {2, 3, 5})
      for (int m : {50, 200})
        for (double eps : {0.2, 0.5, 1.0}) {
          const auto check = verify_weissman_mc(s, m, eps, 1000, static_cast<std::uint64_t>(s * 1000 + m));
          CAPTURE(s);
          CAPTURE(m);
          CAPTURE(eps);
          CHECK(check.holds());
        }
  }
}

TEST_SUITE("simulation lemma") {
  TEST_CASE("closed form") {
    CHECK(simulation_lemma_bound(2, 3, 0.1, false) == doctest::Approx(3.6));
    CHECK(simulation_lemma_bound(2, 3, 0.1, true) == doctest::Approx(10.8));
    CHECK(simulation_lemma_bound(5, 10, 0.0, true) == 0.0);
    CHECK_THROWS_AS(simulation_lemma_bound(2, 3, -1.0, false), InvalidParameter);
  }

  TEST_CASE("random perturbations stay inside the bound") {
    SimulationLemmaOptions options;
    options.pairs = 40;
    options.policies_per_pair = 10;
    const auto check = verify_simulation_lemma(options, 99);
    CHECK(check.cases == 40 * 10);
    CHECK(check.holds());
    CHECK(check.worst_ratio <= 1.0);
    CHECK(check.worst_optimal_ratio <= 1.0);
  }
}

TEST_SUITE("lemma 1 rates") {
  RateInputs tiny() {
    RateInputs in;
    in.separation = 2.0;
    in.alpha = 1.0;
    in.horizon = 20;
    return in;
  }

  TEST_CASE("epsilon for the smallest instance") {
    const auto r = lemma1_rates(tiny());
    CHECK(r.epsilon_H == doctest::Approx(std::exp(-79.0)).epsilon(1e-12));
    CHECK(r.epsilon_H == doctest::Approx(4.9e-35).epsilon(0.01));
    CHECK(r.zeta_eps == doctest::Approx(400.0 * r.epsilon_H));
  }

  TEST_CASE("delta1 vanishes with H while epsilon is constant") {
    RateInputs in;
    in.num_states = 10;
    in.num_actions = 2;
    in.num_contexts = 5;
    in.horizon = 50;
    in.alpha = 0.05;
    in.beta = 0.2;
    in.separation = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    const double eps = lemma1_rates(in).epsilon_H;
    for (double h : {1.0, 10.0, 100.0, 1000.0}) {
      in.trajectories = h;
      const auto r = lemma1_rates(in);
      CHECK(r.epsilon_H == eps);
      CHECK(r.delta1_H.raw < previous);
      previous = r.delta1_H.raw;
    }
    CHECK(previous < 1e-40);
  }

  TEST_CASE("no classification steps gives a vacuous delta2") {
    RateInputs in = tiny();
    in.exploration_steps = 0;
    const auto r = lemma1_rates(in);
    REQUIRE(r.delta2_defined);
    CHECK(r.delta2_eps.vacuous);
    CHECK(r.delta2_eps.raw == doctest::Approx(std::exp(1.0)));
    CHECK(r.delta2_eps.value == 1.0);
  }

  TEST_CASE("delta2 is undefined when the separation does not clear 2 epsilon") {
    RateInputs in;
    in.num_states = 5;
    in.num_actions = 2;
    in.num_contexts = 3;
    in.horizon = 1;
    in.alpha = 0.01;
    in.separation = 0.5;
    const auto r = lemma1_rates(in);
    CHECK(r.epsilon_H > 0.25);
    CHECK_FALSE(r.delta2_defined);
  }

  TEST_CASE("constant_scale multiplies every expression") {
    RateInputs in = tiny();
    in.exploration_steps = 3;
    in.trajectories = 0.5;
    in.beta = 0.1;
    const auto base = lemma1_rates(in);
    in.constant_scale = 4.0;
    const auto scaled = lemma1_rates(in);
    CHECK(scaled.epsilon_H == doctest::Approx(4.0 * base.epsilon_H));
    CHECK(scaled.delta1_H.raw == doctest::Approx(4.0 * base.delta1_H.raw));
    CHECK(scaled.delta2_eps.raw ==
          doctest::Approx(4.0 * std::exp(1.0 - 3.0 * std::pow(1.0 - scaled.epsilon_H, 2.0))));
  }

  TEST_CASE("non-positive separation") {
    RateInputs in;
    in.separation = 0.0;
    CHECK_THROWS_AS(lemma1_rates(in), InvalidParameter);
  }
}

TEST_SUITE("theorem 1") {
  TEST_CASE("degenerate corners") {
    CHECK(theorem1_regret_bound(100, 2000, 600, 0.0, 0.0, 0.0) == doctest::Approx(100.0 * 600.0));
    CHECK(theorem1_regret_bound(100, 2000, 600, 1.0, 0.3, 7.0) == doctest::Approx(100.0 * 2000.0));
    CHECK(theorem1_regret_bound(100, 2000, 600, 0.0, 1.0, 7.0) == doctest::Approx(100.0 * 2000.0));
  }

  TEST_CASE("worked example") {
    // 0.99 * 100 * (0.05 * 2000 + 0.95 * 610) + 0.01 * 100 * 2000
    CHECK(theorem1_regret_bound(100, 2000, 600, 0.01, 0.05, 10) == doctest::Approx(69270.5).epsilon(1e-12));
  }

  TEST_CASE("monotone in each input") {
    const double base = theorem1_regret_bound(50, 1000, 100, 0.1, 0.2, 5);
    CHECK(theorem1_regret_bound(50, 1000, 100, 0.2, 0.2, 5) > base);
    CHECK(theorem1_regret_bound(50, 1000, 100, 0.1, 0.3, 5) > base);
    CHECK(theorem1_regret_bound(50, 1000, 100, 0.1, 0.2, 6) > base);
    CHECK(theorem1_regret_bound(50, 1000, 101, 0.1, 0.2, 5) > base);
  }

  TEST_CASE("probabilities outside [0, 1]") {
    CHECK_THROWS_AS(theorem1_regret_bound(1, 1, 1, 1.5, 0.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(theorem1_regret_bound(1, 1, 1, 0.0, -0.1, 0.0), InvalidParameter);
  }

  TEST_CASE("bundle overload charges an undefined delta2 as failure") {
    RateBundle r;
    r.delta1_H = clip_probability(0.0);
    r.delta2_defined = false;
    CHECK(theorem1_regret_bound(10, 200, 20, r) == doctest::Approx(10.0 * 200.0));
  }
}

TEST_SUITE("corollary") {
  CorollaryInputs inputs() {
    CorollaryInputs in;
    in.rates.num_states = 2;
    in.rates.num_actions = 2;
    in.rates.num_contexts = 3;
    in.rates.horizon = 1000;
    in.rates.exploration_steps = 500;
    in.rates.separation = 2.0;
    in.rates.alpha = 0.2;
    in.rates.beta = 0.3;
    in.batch_size = 10;
    in.previous_trajectories = 1.0;
    return in;
  }

  TEST_CASE("misclustering vanishes as earlier batches grow") {
    auto in = inputs();
    in.rates.horizon = 10;
    in.rates.exploration_steps = 5;
    in.rates.alpha = 0.01;
    double previous = corollary_bound(in).misclustering;
    for (double h : {10.0, 100.0, 1000.0, 10000.0}) {
      in.previous_trajectories = h;
      const double now = corollary_bound(in).misclustering;
      CHECK(now < previous);
      previous = now;
    }
    CHECK(previous == 0.0);
  }

  TEST_CASE("exploration floor dominates when every exponent is very negative") {
    const auto in = inputs();
    const auto terms = corollary_bound(in);
    CHECK(terms.misclassification < 1e-100);
    CHECK(terms.total == doctest::Approx(10.0 * 500.0));
    CHECK(terms.total == doctest::Approx(terms.misclassification + terms.model_error + terms.misclustering));
  }
}
