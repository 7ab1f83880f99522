#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tcrisk/expectations.hpp"
#include "tcrisk/market.hpp"

namespace tcrisk {

/// V_t(X) = E(V^X_{t+m} | F_t), horizon clamped at T.
struct SimpleHorizon {
  int m = 1;
  ExpectationOperator op;
};

/// V~_t(X) = E(V^X_T | F_t) maximized over I_{[0,t+m[} U|_t.
struct ModifiedHorizon {
  int m = 1;
  ExpectationOperator op;
};

/// V_t(X) = E(V^X_T | F_t).
struct Terminal {
  ExpectationOperator op;
};

/// Running payoff f(node, X_t) of a Bellman-additive value.
using Payoff = std::function<double(const MarketModel&, NodeRef, const Eigen::RowVectorXd&)>;

/// V_t(X) = f(t, X_t) + E[V_{t+1}(X) | F_t], V_T = 0.
struct BellmanAdditive {
  Payoff payoff;
  std::string name = "custom";
};

using ValueFunction = std::variant<SimpleHorizon, ModifiedHorizon, Terminal, BellmanAdditive>;

/// f = 0.
BellmanAdditive zero_payoff();

/// f = <x, E[dS | node]> - risk_aversion * x' Cov[dS | node] x.
BellmanAdditive mean_variance_payoff(double risk_aversion);

std::string describe(const ValueFunction& vf);

/// Horizon length for the horizon variants, nullopt otherwise.
std::optional<int> horizon_length(const ValueFunction& vf);

/// Throws InputError for m < 1 or a missing payoff.
void validate(const ValueFunction& vf);

Slice value(const ValueFunction& vf, const MarketModel& market, const Policy& policy, int t);

/// Conditional space, or for the modified variant its truncation at t + m.
///
/// Truncated policies keep the stored index of the member they coincide with
/// when one exists in the conditional space, and otherwise the index of the
/// first member truncating to them. This keeps tie-breaking aligned between
/// the simple and modified problems on truncation-closed spaces.
PolicySpace feasible_set(const ValueFunction& vf, const PolicySpace& space, int t, const Policy& past);

struct Maximizer {
  Policy policy;
  Slice value;
  std::optional<std::size_t> member;  ///< index in the feasible set
};

/// Uniform maximizer of V_t on a feasible set by per-node argmax and pasting.
///
/// Ties within `tol` go to the smallest stored index; for SimpleHorizon a tied
/// member equal to its own truncation at t + m is preferred first.
Maximizer uniform_maximizer(const ValueFunction& vf, const MarketModel& market,
                            const PolicySpace& feasible, int t, double tol = kDefaultTol);

enum class ChoiceMode { Simple, Modified };

std::string to_string(ChoiceMode mode);

/// A viable sequence of choices X^0..X^{T-1} and the realized policy.
struct PolicyChoice {
  std::vector<Policy> choices;
  Policy realized;
  std::vector<Slice> values;  ///< V_t(X^t)
  ChoiceMode mode = ChoiceMode::Simple;
  std::string value_function;
  PolicySpace space;
  bool truncation_closed = true;
  std::vector<std::string> warnings;
};

/// Sequential moving-horizon optimization. The mode follows the value function:
/// ModifiedHorizon optimizes over truncated feasible sets, everything else over
/// conditional spaces.
PolicyChoice run_policy_choice(const ValueFunction& vf, const MarketModel& market,
                               const PolicySpace& space, double tol = kDefaultTol);

}  // namespace tcrisk
