#include "tcrisk/consistency.hpp"

#include <map>

#include "tcrisk/errors.hpp"

namespace tcrisk {

namespace {

void check_choice(const ValueFunction& vf, const MarketModel& market, const PolicyChoice& choice) {
  const int T = market.tree.horizon();
  if (choice.value_function != describe(vf))
    throw MismatchedInputs("choice was produced by " + choice.value_function + ", not " + describe(vf));
  if (choice.choices.size() != static_cast<std::size_t>(T) || choice.values.size() != choice.choices.size())
    throw MismatchedInputs("choice does not cover decision times 0..T-1 of the market");
  for (const auto& p : choice.choices) {
    try {
      check_policy(market.tree, market.assets, p);
    } catch (const DimensionError& e) {
      throw MismatchedInputs(std::string("choice does not fit the market: ") + e.what());
    }
  }
}

template <class Verdict>
ComparisonReport compare(std::string name, const ValueFunction& vf, const MarketModel& market,
                         const PolicyChoice& choice, double tol, Verdict verdict) {
  ComparisonReport report{std::move(name), {}, true, tol};
  for (int t = 0; t < market.tree.horizon(); ++t) {
    TimeRecord rec;
    rec.t = t;
    rec.chosen = value(vf, market, choice.choices[static_cast<std::size_t>(t)], t);
    rec.realized = value(vf, market, choice.realized, t);
    const Eigen::VectorXd gap = rec.chosen.values - rec.realized.values;
    rec.max_gap = gap.maxCoeff();
    rec.min_gap = gap.minCoeff();
    rec.pass = verdict(rec);
    report.verdict = report.verdict && rec.pass;
    report.per_time.push_back(std::move(rec));
  }
  return report;
}

}  // namespace

ConsistencyReport check_time_consistency(const ValueFunction& vf, const MarketModel& market,
                                         const PolicyChoice& choice, double tol) {
  check_choice(vf, market, choice);
  return compare("time_consistency", vf, market, choice, tol, [tol](const TimeRecord& r) {
    return r.max_gap <= tol && r.min_gap >= -tol;
  });
}

DependabilityReport check_dependability(const ValueFunction& vf, const MarketModel& market,
                                        const PolicyChoice& choice, double tol) {
  if (!std::holds_alternative<ModifiedHorizon>(vf))
    throw MismatchedInputs("dependability is defined for the modified moving-horizon value");
  if (choice.mode != ChoiceMode::Modified)
    throw MismatchedInputs("dependability needs a choice produced in modified mode");
  check_choice(vf, market, choice);
  return compare("dependability", vf, market, choice, tol,
                 [tol](const TimeRecord& r) { return r.max_gap <= tol; });
}

MonotonicityReport intertemporal_monotonicity(const ValueFunction& vf, const MarketModel& market,
                                              const PolicySpace& space, double tol) {
  MonotonicityReport report;
  report.tol = tol;
  const int T = market.tree.horizon();
  const std::size_t n = space.size();

  std::vector<Eigen::MatrixXd> values;  // values[t] is level_size(t) x n
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd v(market.tree.level_size(t), static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) v.col(static_cast<Index>(i)) = value(vf, market, space[i], t).values;
    values.push_back(std::move(v));
  }
  auto at_least = [tol](const auto& a, const auto& b) { return ((a - b).array() >= -tol).all(); };

  for (int t = 1; t < T; ++t) {
    // Members agree before t iff their truncations at t coincide.
    std::map<std::vector<std::uint64_t>, std::size_t> groups;
    std::vector<std::size_t> group(n);
    for (std::size_t i = 0; i < n; ++i)
      group[i] = groups.emplace(policy_key(truncate(space[i], t)), groups.size()).first->second;

    const auto& vt = values[static_cast<std::size_t>(t)];
    std::vector<std::pair<std::size_t, std::size_t>> premises;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && group[i] == group[j] &&
            at_least(vt.col(static_cast<Index>(i)), vt.col(static_cast<Index>(j))))
          premises.emplace_back(i, j);
    report.premises_checked += premises.size();

    for (int s = 0; s < t; ++s) {
      const auto& vs = values[static_cast<std::size_t>(s)];
      for (const auto& [i, j] : premises) {
        const Eigen::VectorXd gap = vs.col(static_cast<Index>(i)) - vs.col(static_cast<Index>(j));
        Index slot = 0;
        if (gap.minCoeff(&slot) >= -tol) continue;
        report.verdict = false;
        report.witness = MonotonicityWitness{i, j, space[i].label, space[j].label, s, t,
                                             market.tree.node(s, slot).id,
                                             vs(slot, static_cast<Index>(i)),
                                             vs(slot, static_cast<Index>(j))};
        return report;
      }
    }
  }
  return report;
}

AcceptabilityReport acceptability_check(const MarketModel& market, const Policy& x, int m,
                                        const ExpectationOperator& op, double tol, std::uint64_t cap) {
  const ValueFunction vf = ModifiedHorizon{m, op};
  validate(vf);
  check_policy(market.tree, market.assets, x);
  const PolicySpace space = stopping_time_space(market.tree, x, cap);
  PolicyChoice choice = run_policy_choice(vf, market, space, tol);
  DependabilityReport dependability = check_dependability(vf, market, choice, tol);

  const Terminal terminal{op};
  const double realized = value(vf, market, choice.realized, 0).values[0];
  const double first = choice.values.empty() ? realized : choice.values.front().values[0];
  const double policy_value = value(vf, market, truncate(x, m), 0).values[0];
  const double terminal_value = value(terminal, market, x, 0).values[0];
  const double threshold = value(terminal, market, zero_policy(market.tree, market.assets), 0).values[0];

  AcceptabilityReport report{realized,
                             first,
                             policy_value,
                             terminal_value,
                             threshold,
                             market.initial_wealth,
                             realized >= first - tol && first >= policy_value - tol,
                             policy_value >= threshold - tol,
                             realized >= threshold - tol,
                             space.size(),
                             tol,
                             std::move(choice),
                             std::move(dependability)};
  return report;
}

}  // namespace tcrisk
