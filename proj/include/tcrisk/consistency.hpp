#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcrisk/horizon.hpp"

namespace tcrisk {

/// Per-time comparison of V_t(X^t) against V_t(X^hat). gap = chosen - realized.
struct TimeRecord {
  int t = 0;
  Slice chosen;
  Slice realized;
  double max_gap = 0.0;
  double min_gap = 0.0;
  bool pass = true;
};

struct ComparisonReport {
  std::string check;
  std::vector<TimeRecord> per_time;
  bool verdict = true;
  double tol = kDefaultTol;
};

/// Time consistency: |V_t(X^t) - V_t(X^hat)| <= tol at every node.
using ConsistencyReport = ComparisonReport;
/// Dependability: V~_t(X^t) <= V~_t(X^hat) + tol at every node.
using DependabilityReport = ComparisonReport;

ConsistencyReport check_time_consistency(const ValueFunction& vf, const MarketModel& market,
                                         const PolicyChoice& choice, double tol = kDefaultTol);

DependabilityReport check_dependability(const ValueFunction& vf, const MarketModel& market,
                                        const PolicyChoice& choice, double tol = kDefaultTol);

/// Pair X, X' agreeing before t with V_t(X) >= V_t(X') everywhere but
/// V_s(X) < V_s(X') at `node`.
struct MonotonicityWitness {
  std::size_t x = 0;
  std::size_t x_prime = 0;
  std::string x_label;
  std::string x_prime_label;
  int s = 0;
  int t = 0;
  std::string node;
  double value_x = 0.0;
  double value_x_prime = 0.0;
};

struct MonotonicityReport {
  bool verdict = true;
  std::optional<MonotonicityWitness> witness;
  std::size_t premises_checked = 0;
  double tol = kDefaultTol;
};

/// Brute force over ordered member pairs and times s < t <= T-1. The reported
/// witness is the earliest in (t, s, x, x') order.
MonotonicityReport intertemporal_monotonicity(const ValueFunction& vf, const MarketModel& market,
                                              const PolicySpace& space, double tol = kDefaultTol);

struct AcceptabilityReport {
  double realized_value = 0.0;     ///< V~_0(X^hat)
  double first_choice_value = 0.0; ///< V~_0(X^0)
  double policy_value = 0.0;       ///< V~_0(I_{[0,m[} x) = V_0(x)
  double policy_terminal_value = 0.0;  ///< E(V^x_T | F_0), without truncation
  double threshold = 0.0;          ///< value of the null policy
  double initial_wealth = 0.0;
  bool chain_holds = true;
  bool acceptable = false;           ///< policy_value >= threshold
  bool realized_acceptable = false;  ///< realized_value >= threshold
  std::size_t space_size = 0;
  double tol = kDefaultTol;
  PolicyChoice choice;
  DependabilityReport dependability;
};

/// Optimizes the modified problem over the stopping-time space of x and
/// reports V~_0(X^hat) >= V~_0(X^0) >= V~_0(I_{[0,m[} x) at the root.
AcceptabilityReport acceptability_check(const MarketModel& market, const Policy& x, int m,
                                        const ExpectationOperator& op, double tol = kDefaultTol,
                                        std::uint64_t cap = kDefaultStoppingTimeCap);

}  // namespace tcrisk
