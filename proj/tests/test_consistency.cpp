#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "support/random_instances.hpp"
#include "tcrisk/consistency.hpp"
#include "tcrisk/errors.hpp"

using namespace tcrisk;

TEST_CASE("simple mode on the s4 example is inconsistent at t = 0 only") {
  const Instance s4 = s4_instance();
  const SimpleHorizon vf{2, ExpectationOperator::paper10()};
  const PolicyChoice c = run_policy_choice(vf, s4.market, s4.space);
  const ConsistencyReport r = check_time_consistency(vf, s4.market, c);
  CHECK_FALSE(r.verdict);
  REQUIRE(r.per_time.size() == 3);
  CHECK_FALSE(r.per_time[0].pass);
  CHECK(std::abs(r.per_time[0].max_gap - 2.6815) <= 1e-4);
  CHECK(r.per_time[1].pass);
  CHECK(r.per_time[2].pass);
}

TEST_CASE("terminal choice on the s4 example is consistent") {
  const Instance s4 = s4_instance();
  const Terminal vf{ExpectationOperator::paper10()};
  const PolicyChoice c = run_policy_choice(vf, s4.market, s4.space);
  CHECK(check_time_consistency(vf, s4.market, c).verdict);
}

TEST_CASE("singleton spaces are consistent and dependable") {
  const Instance s4 = s4_instance();
  const PolicySpace single(s4.market.tree, 1, {s4.base});
  const SimpleHorizon simple{2, ExpectationOperator::paper10()};
  CHECK(check_time_consistency(simple, s4.market, run_policy_choice(simple, s4.market, single)).verdict);
  const ModifiedHorizon mod{2, ExpectationOperator::paper10()};
  CHECK(check_dependability(mod, s4.market, run_policy_choice(mod, s4.market, single)).verdict);
  // Equality needs the singleton to be truncation-closed.
  const PolicySpace null(s4.market.tree, 1, {zero_policy(s4.market.tree, 1)});
  const auto r = check_dependability(mod, s4.market, run_policy_choice(mod, s4.market, null));
  CHECK(r.verdict);
  for (const auto& rec : r.per_time) CHECK(rec.max_gap == 0.0);
}

TEST_CASE("s4 example is dependable") {
  const Instance s4 = s4_instance();
  const ModifiedHorizon vf{2, ExpectationOperator::paper10()};
  const PolicyChoice c = run_policy_choice(vf, s4.market, s4.space);
  const DependabilityReport r = check_dependability(vf, s4.market, c);
  CHECK(r.verdict);
  CHECK(std::abs(r.per_time[0].chosen.values[0] - 0.1889) <= 5e-5);
  CHECK(std::abs(r.per_time[0].realized.values[0] - 0.4741) <= 5e-5);
}

TEST_CASE("mismatched inputs") {
  const Instance s4 = s4_instance();
  const auto op = ExpectationOperator::paper10();
  const PolicyChoice simple = run_policy_choice(SimpleHorizon{2, op}, s4.market, s4.space);
  CHECK_THROWS_AS(check_dependability(ModifiedHorizon{2, op}, s4.market, simple), MismatchedInputs);
  CHECK_THROWS_AS(check_dependability(SimpleHorizon{2, op}, s4.market, simple), MismatchedInputs);
  CHECK_THROWS_AS(check_time_consistency(SimpleHorizon{1, op}, s4.market, simple), MismatchedInputs);
}

TEST_CASE("dependability on random stopping-time spaces") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Instance inst = gen::random_instance(seed);
    const ModifiedHorizon vf{1 + static_cast<int>(seed % 3), ExpectationOperator::entropic(10.0)};
    CHECK(check_dependability(vf, inst.market, run_policy_choice(vf, inst.market, inst.space)).verdict);
  }
}

TEST_CASE("monotonicity witness on the s4 example") {
  const Instance s4 = s4_instance();
  const SimpleHorizon vf{2, ExpectationOperator::paper10()};
  const MonotonicityReport r = intertemporal_monotonicity(vf, s4.market, s4.space);
  CHECK_FALSE(r.verdict);
  REQUIRE(r.witness);
  const auto& w = *r.witness;
  CHECK(w.s < w.t);
  CHECK(agree_before(s4.space[w.x], s4.space[w.x_prime], w.t));
  CHECK((value(vf, s4.market, s4.space[w.x], w.t).values.array() >=
         value(vf, s4.market, s4.space[w.x_prime], w.t).values.array() - 1e-9)
            .all());
  CHECK(w.value_x < w.value_x_prime);
}

TEST_CASE("terminal and additive values are monotone") {
  const Instance s4 = s4_instance();
  CHECK(intertemporal_monotonicity(Terminal{ExpectationOperator::paper10()}, s4.market, s4.space).verdict);
  CHECK(intertemporal_monotonicity(mean_variance_payoff(0.1), s4.market, s4.space).verdict);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = gen::random_instance(seed, 3);
    CHECK(intertemporal_monotonicity(Terminal{ExpectationOperator::entropic(5.0)}, inst.market, inst.space).verdict);
    CHECK(intertemporal_monotonicity(mean_variance_payoff(0.2), inst.market, inst.space).verdict);
  }
}

TEST_CASE("monotone values give consistent choices on random sub-spaces") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = gen::random_instance(seed, 3);
    auto rng = gen::engine(seed, 30);
    const Terminal vf{ExpectationOperator::entropic(10.0)};
    for (int draw = 0; draw < 5; ++draw) {
      std::vector<Policy> subset;
      for (const auto& x : inst.space.members()) {
        if (gen::uniform(rng, 0, 1) < 0.5) subset.push_back(x);
      }
      if (subset.empty()) subset.push_back(inst.base);
      const PolicySpace sub(inst.market.tree, inst.market.assets, subset);
      if (!intertemporal_monotonicity(vf, inst.market, sub).verdict) continue;
      try {
        const PolicyChoice c = run_policy_choice(vf, inst.market, sub);
        CHECK(check_time_consistency(vf, inst.market, c).verdict);
      } catch (const NoUniformMaximizer&) {
        // Sub-spaces need not be pasting-closed; no choice exists then.
      }
    }
  }
}

TEST_CASE("acceptability on the s4 example") {
  const Instance s4 = s4_instance();
  const AcceptabilityReport r = acceptability_check(s4.market, s4.base, 2, ExpectationOperator::paper10());
  CHECK(r.chain_holds);
  CHECK(std::abs(r.realized_value - 0.4741) <= 5e-5);
  CHECK(std::abs(r.first_choice_value - 0.1889) <= 5e-5);
  CHECK(std::abs(r.policy_value + 2.4926) <= 5e-5);
  CHECK(std::abs(r.policy_terminal_value - 0.4741) <= 5e-5);
  CHECK(r.threshold == 0.0);
  CHECK(r.realized_acceptable);
  CHECK_FALSE(r.acceptable);
  CHECK(r.space_size == 26);
  CHECK(r.dependability.verdict);
}

TEST_CASE("acceptability of the null policy") {
  MarketModel market = s4_market();
  market.initial_wealth = 3.0;
  const AcceptabilityReport r =
      acceptability_check(market, zero_policy(market.tree, 1), 2, ExpectationOperator::entropic(10.0));
  CHECK(r.chain_holds);
  CHECK(r.realized_value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.first_choice_value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.policy_value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.threshold == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.initial_wealth == 3.0);
  CHECK(r.acceptable);
}

TEST_CASE("acceptability chain on random depth-3 trees") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto rng = gen::engine(seed, 31);
    const ScenarioTree tree = ScenarioTree::build(gen::random_tree_spec(rng, 3, 2, true));
    std::vector<Eigen::MatrixXd> prices{Eigen::MatrixXd::Constant(1, 1, 20.0)};
    for (int t = 1; t <= 3; ++t) {
      Eigen::MatrixXd p(tree.level_size(t), 1);
      for (Index k = 0; k < p.rows(); ++k) p(k, 0) = prices.back()(tree.node(t, k).parent_slot, 0) + gen::uniform(rng, -10, 10);
      prices.push_back(p);
    }
    const MarketModel market = make_market(tree, prices);
    const Policy x = constant_policy(market.tree, 1, gen::uniform(rng, -1, 1), "x");
    const auto r = acceptability_check(market, x, 1 + static_cast<int>(seed % 3), ExpectationOperator::entropic(10.0));
    CHECK(r.chain_holds);
  }
}

TEST_CASE("acceptability propagates the enumeration cap") {
  const ScenarioTree deep = ScenarioTree::uniform(6, 2);
  std::vector<Eigen::MatrixXd> prices;
  for (int t = 0; t <= 6; ++t) prices.push_back(Eigen::MatrixXd::Constant(deep.level_size(t), 1, 1.0));
  const MarketModel market = make_market(deep, prices);
  CHECK_THROWS_AS(acceptability_check(market, constant_policy(deep, 1, 1.0, "x"), 2, ExpectationOperator::linear(),
                                      1e-9, 1000),
                  EnumerationLimit);
}
