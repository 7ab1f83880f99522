#pragma once

// Independent reference computations. These walk parent pointers and enumerate
// nodes directly; they avoid the library's descendant ranges, its conditional
// expectation and its wealth recursion.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "tcrisk/horizon.hpp"

namespace oracle {

using tcrisk::Index;
using tcrisk::MarketModel;
using tcrisk::Policy;
using tcrisk::ScenarioTree;

/// Slot of the time-t ancestor of the time-s node `slot`.
inline Index ancestor(const ScenarioTree& tree, int s, Index slot, int t) {
  while (s > t) {
    slot = tree.node(s, slot).parent_slot;
    --s;
  }
  return slot;
}

/// Product of branch probabilities from the root.
inline double path_prob(const ScenarioTree& tree, int s, Index slot) {
  double p = 1.0;
  while (s > 0) {
    p *= tree.node(s, slot).branch_prob;
    slot = tree.node(s, slot).parent_slot;
    --s;
  }
  return p;
}

/// Wealth at every time-s node, summed pathwise from v0.
inline Eigen::VectorXd wealth(const MarketModel& market, const Policy& x, int s) {
  const auto& tree = market.tree;
  Eigen::VectorXd out(tree.level_size(s));
  for (Index k = 0; k < out.size(); ++k) {
    double v = market.initial_wealth;
    for (int u = 0; u < s; ++u) {
      const Index a = ancestor(tree, s, k, u);
      const Index b = ancestor(tree, s, k, u + 1);
      for (Index i = 0; i < market.assets; ++i) {
        v += x.alloc[static_cast<std::size_t>(u)](a, i) *
             (market.prices[static_cast<std::size_t>(u + 1)](b, i) - market.prices[static_cast<std::size_t>(u)](a, i));
      }
    }
    out[k] = v;
  }
  return out;
}

/// -kappa ln E[exp(-q/gamma) | F_t] by direct enumeration of the time-s nodes.
/// kappa <= 0 selects the classical conditional expectation.
inline Eigen::VectorXd entropic(const ScenarioTree& tree, const Eigen::VectorXd& q, int s, int t,
                                double gamma, double kappa) {
  Eigen::VectorXd out(tree.level_size(t));
  for (Index n = 0; n < out.size(); ++n) {
    const double pn = path_prob(tree, t, n);
    long double acc = 0.0L;
    for (Index k = 0; k < q.size(); ++k) {
      if (ancestor(tree, s, k, t) != n) continue;
      const long double w = path_prob(tree, s, k) / pn;
      acc += kappa > 0.0 ? w * std::exp(-static_cast<long double>(q[k]) / gamma) : w * q[k];
    }
    out[n] = kappa > 0.0 ? static_cast<double>(-kappa * std::log(acc)) : static_cast<double>(acc);
  }
  return out;
}

inline Eigen::VectorXd linear(const ScenarioTree& tree, const Eigen::VectorXd& q, int s, int t) {
  return entropic(tree, q, s, t, 1.0, 0.0);
}

/// Zero allocations from `cutoff` on.
inline Policy truncated(Policy x, int cutoff) {
  for (int u = cutoff; u < x.decision_times(); ++u) x.alloc[static_cast<std::size_t>(u)].setZero();
  return x;
}

/// Entropic moving-horizon values. `modified` evaluates V_T, otherwise V_{min(t+m,T)}.
inline Eigen::VectorXd horizon_value(const MarketModel& market, const Policy& x, int t, int m, double gamma,
                                     double kappa, bool modified) {
  const int T = market.tree.horizon();
  const int s = modified ? T : std::min(t + m, T);
  return entropic(market.tree, wealth(market, x, s), s, t, gamma, kappa);
}

/// Bellman recursion V_T = 0, V_u = f(node, X_u) + E[V_{u+1} | F_u] over children.
inline Eigen::VectorXd bellman(const MarketModel& market, const Policy& x, int t,
                               const std::function<double(int, Index, const Eigen::RowVectorXd&)>& f) {
  const auto& tree = market.tree;
  const int T = tree.horizon();
  Eigen::VectorXd next = Eigen::VectorXd::Zero(tree.level_size(T));
  for (int u = T - 1; u >= t; --u) {
    Eigen::VectorXd cur(tree.level_size(u));
    for (Index n = 0; n < cur.size(); ++n) {
      double e = 0.0;
      for (Index k = 0; k < next.size(); ++k) {
        if (tree.node(u + 1, k).parent_slot == n) e += tree.node(u + 1, k).branch_prob * next[k];
      }
      cur[n] = f(u, n, x.alloc[static_cast<std::size_t>(u)].row(n)) + e;
    }
    next = std::move(cur);
  }
  return next;
}

/// Number of stopping times: a node either stops now or defers to each child.
inline std::uint64_t stopping_count(const ScenarioTree& tree, int t = 0, Index slot = 0) {
  if (t == tree.horizon()) return 1;
  std::uint64_t prod = 1;
  for (Index k = 0; k < tree.level_size(t + 1); ++k) {
    if (tree.node(t + 1, k).parent_slot == slot) prod *= stopping_count(tree, t + 1, k);
  }
  return 1 + prod;
}

inline bool same(const Policy& a, const Policy& b, int before) {
  for (int u = 0; u < before; ++u) {
    if (a.alloc[static_cast<std::size_t>(u)] != b.alloc[static_cast<std::size_t>(u)]) return false;
  }
  return true;
}

/// Members agreeing with `past` before t, by plain filtering.
inline std::vector<Policy> conditional(const std::vector<Policy>& members, int t, const Policy& past) {
  std::vector<Policy> out;
  for (const auto& x : members) {
    if (same(x, past, t)) out.push_back(x);
  }
  return out;
}

}  // namespace oracle
