#include "tcrisk/horizon.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tcrisk/errors.hpp"

namespace tcrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_time(const MarketModel& market, int t) {
  if (t < 0 || t > market.tree.horizon())
    throw TimeOrderError("value requested at time " + std::to_string(t) + " outside 0.." +
                         std::to_string(market.tree.horizon()));
}

Slice bellman_value(const BellmanAdditive& vf, const MarketModel& market, const Policy& policy, int t) {
  const auto& tree = market.tree;
  check_policy(tree, market.assets, policy);
  Slice v = tree.zeros(tree.horizon());
  for (int s = tree.horizon() - 1; s >= t; --s) {
    Slice next = conditional_expectation(tree, v, s);
    const auto& x = policy.alloc[static_cast<std::size_t>(s)];
    for (Index k = 0; k < next.values.size(); ++k)
      next.values[k] += vf.payoff(market, {s, k}, x.row(k));
    v = std::move(next);
  }
  return v;
}

}  // namespace

BellmanAdditive zero_payoff() {
  return {[](const MarketModel&, NodeRef, const Eigen::RowVectorXd&) { return 0.0; }, "zero"};
}

BellmanAdditive mean_variance_payoff(double risk_aversion) {
  auto payoff = [risk_aversion](const MarketModel& market, NodeRef node, const Eigen::RowVectorXd& x) {
    const auto& n = market.tree.node(node);
    const Eigen::MatrixXd delta = market.increments(node.time).middleRows(n.first_child, n.child_count);
    const Eigen::VectorXd p =
        market.tree.branch_probabilities(node.time + 1).segment(n.first_child, n.child_count);
    const Eigen::RowVectorXd mean = p.transpose() * delta;
    const Eigen::MatrixXd centered = delta.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * p.asDiagonal() * centered;
    return x.dot(mean) - risk_aversion * (x * cov * x.transpose())(0, 0);
  };
  std::ostringstream name;
  name << "mean_variance(" << risk_aversion << ")";
  return {payoff, name.str()};
}

std::string describe(const ValueFunction& vf) {
  return std::visit(overloaded{
                        [](const SimpleHorizon& v) {
                          return "simple(m=" + std::to_string(v.m) + ", " + v.op.describe() + ")";
                        },
                        [](const ModifiedHorizon& v) {
                          return "modified(m=" + std::to_string(v.m) + ", " + v.op.describe() + ")";
                        },
                        [](const Terminal& v) { return "terminal(" + v.op.describe() + ")"; },
                        [](const BellmanAdditive& v) { return "bellman(" + v.name + ")"; },
                    },
                    vf);
}

std::optional<int> horizon_length(const ValueFunction& vf) {
  if (const auto* s = std::get_if<SimpleHorizon>(&vf)) return s->m;
  if (const auto* s = std::get_if<ModifiedHorizon>(&vf)) return s->m;
  return std::nullopt;
}

void validate(const ValueFunction& vf) {
  if (auto m = horizon_length(vf); m && *m < 1) throw InputError("horizon m must be at least 1");
  if (const auto* b = std::get_if<BellmanAdditive>(&vf); b && !b->payoff)
    throw InputError("Bellman value function has no payoff");
}

Slice value(const ValueFunction& vf, const MarketModel& market, const Policy& policy, int t) {
  validate(vf);
  check_time(market, t);
  const int T = market.tree.horizon();
  return std::visit(
      overloaded{
          [&](const SimpleHorizon& v) {
            return evaluate(v.op, market.tree, wealth_process(market, policy).at(t + v.m), t);
          },
          [&](const ModifiedHorizon& v) {
            return evaluate(v.op, market.tree, wealth_process(market, policy).at(T), t);
          },
          [&](const Terminal& v) {
            return evaluate(v.op, market.tree, wealth_process(market, policy).at(T), t);
          },
          [&](const BellmanAdditive& v) { return bellman_value(v, market, policy, t); },
      },
      vf);
}

PolicySpace feasible_set(const ValueFunction& vf, const PolicySpace& space, int t, const Policy& past) {
  validate(vf);
  PolicySpace cond = conditional_space(space, t, past);
  const auto* modified = std::get_if<ModifiedHorizon>(&vf);
  if (!modified) return cond;

  struct Entry {
    std::size_t rank;
    Policy policy;
  };
  std::map<std::vector<std::uint64_t>, Entry> truncated;
  for (std::size_t i = 0; i < cond.size(); ++i) {
    Policy cut = truncate(cond[i], t + modified->m);
    auto key = policy_key(cut);
    if (truncated.count(key)) continue;
    if (auto member = cond.find(cut)) {
      truncated.emplace(std::move(key), Entry{*member, cond[*member]});
    } else {
      cut.label = cond[i].label + "|cut" + std::to_string(t + modified->m);
      truncated.emplace(std::move(key), Entry{i, std::move(cut)});
    }
  }
  std::vector<Entry> ordered;
  for (auto& [key, entry] : truncated) ordered.push_back(std::move(entry));
  std::sort(ordered.begin(), ordered.end(),
            [](const Entry& a, const Entry& b) { return a.rank < b.rank; });
  std::vector<Policy> policies;
  for (auto& e : ordered) policies.push_back(std::move(e.policy));
  return PolicySpace(space.shape(), space.assets(), std::move(policies),
                     "I[0," + std::to_string(t + modified->m) + "[" + cond.label());
}

Maximizer uniform_maximizer(const ValueFunction& vf, const MarketModel& market,
                            const PolicySpace& feasible, int t, double tol) {
  validate(vf);
  check_time(market, t);
  const auto& tree = market.tree;
  const Index nodes = tree.level_size(t);
  const auto n = feasible.size();

  Eigen::MatrixXd values(nodes, static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    values.col(static_cast<Index>(i)) = value(vf, market, feasible[i], t).values;
  const Eigen::VectorXd best = values.rowwise().maxCoeff();

  std::vector<bool> preferred(n, true);
  if (const auto* simple = std::get_if<SimpleHorizon>(&vf)) {
    for (std::size_t i = 0; i < n; ++i)
      preferred[i] = same_allocations(feasible[i], truncate(feasible[i], t + simple->m));
  }

  std::vector<std::size_t> pick(static_cast<std::size_t>(nodes));
  for (Index k = 0; k < nodes; ++k) {
    std::optional<std::size_t> first_tied;
    std::optional<std::size_t> first_preferred;
    for (std::size_t i = 0; i < n; ++i) {
      if (values(k, static_cast<Index>(i)) < best[k] - tol) continue;
      if (!first_tied) first_tied = i;
      if (preferred[i]) {
        first_preferred = i;
        break;
      }
    }
    pick[static_cast<std::size_t>(k)] = first_preferred.value_or(*first_tied);
  }

  auto dominates = [&](const Eigen::VectorXd& v) { return ((v - best).array() >= -tol).all(); };

  if (std::all_of(pick.begin(), pick.end(), [&](std::size_t i) { return i == pick.front(); })) {
    const auto i = pick.front();
    return {feasible[i], {t, values.col(static_cast<Index>(i))}, i};
  }

  // Paste the nodewise winners below their time-t nodes.
  Policy pasted = feasible[pick.front()];
  for (int s = t; s < pasted.decision_times(); ++s) {
    const Eigen::VectorXi anc = tree.ancestor_map(t, s);
    auto& dst = pasted.alloc[static_cast<std::size_t>(s)];
    for (Index k = 0; k < anc.size(); ++k)
      dst.row(k) = feasible[pick[static_cast<std::size_t>(anc[k])]].alloc[static_cast<std::size_t>(s)].row(k);
  }
  if (auto member = feasible.find(pasted)) {
    Slice v = value(vf, market, feasible[*member], t);
    if (dominates(v.values)) return {feasible[*member], std::move(v), member};
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dominates(values.col(static_cast<Index>(i))))
      return {feasible[i], {t, values.col(static_cast<Index>(i))}, i};
  }
  throw NoUniformMaximizer("no uniform maximizer of " + describe(vf) + " at t=" + std::to_string(t) +
                           ": the nodewise paste is not in '" + feasible.label() +
                           "' and no member dominates");
}

std::string to_string(ChoiceMode mode) { return mode == ChoiceMode::Simple ? "simple" : "modified"; }

PolicyChoice run_policy_choice(const ValueFunction& vf, const MarketModel& market,
                               const PolicySpace& space, double tol) {
  validate(vf);
  const auto& tree = market.tree;
  const int T = tree.horizon();
  if (space.shape() != decision_shape(tree) || (T > 0 && space.assets() != market.assets))
    throw MismatchedInputs("policy space '" + space.label() + "' does not match the market");

  PolicyChoice choice{{}, space[0], {}, ChoiceMode::Simple, describe(vf), space, true, {}};
  if (const auto* modified = std::get_if<ModifiedHorizon>(&vf)) {
    choice.mode = ChoiceMode::Modified;
    const auto closure = is_truncation_closed(space, modified->m);
    choice.truncation_closed = closure.closed;
    if (!closure.closed)
      choice.warnings.push_back("policy space is not closed under truncation (t=" +
                                std::to_string(closure.witness->t) + ", member '" +
                                closure.witness->member.label + "')");
  }

  for (int t = 0; t < T; ++t) {
    const Policy& past = t == 0 ? space[0] : choice.choices.back();
    try {
      const PolicySpace feasible = feasible_set(vf, space, t, past);
      Maximizer best = uniform_maximizer(vf, market, feasible, t, tol);
      choice.choices.push_back(std::move(best.policy));
      choice.values.push_back(std::move(best.value));
    } catch (const EmptyConditionalSpace& e) {
      throw EmptyConditionalSpace("policy choice failed at t=" + std::to_string(t) + ": " + e.what());
    } catch (const NoUniformMaximizer& e) {
      throw NoUniformMaximizer("policy choice failed at t=" + std::to_string(t) + ": " + e.what());
    }
  }

  if (T > 0) {
    choice.realized = choice.choices.front();
    for (int u = 0; u < T; ++u)
      choice.realized.alloc[static_cast<std::size_t>(u)] =
          choice.choices[static_cast<std::size_t>(u)].alloc[static_cast<std::size_t>(u)];
  }
  choice.realized.label = "realized";

  for (int t = 0; t < T; ++t)
    if (!agree_before(choice.choices[static_cast<std::size_t>(t)], choice.realized, t))
      throw std::logic_error("policy choice is not viable at t=" + std::to_string(t));
  if (T > 0 && !same_allocations(choice.choices.back(), choice.realized))
    throw std::logic_error("last choice does not realize the realized policy");
  return choice;
}

}  // namespace tcrisk
