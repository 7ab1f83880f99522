#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tcrisk/scenario_tree.hpp"

namespace tcrisk {

/// Nonlinear conditional expectation acting slice to slice.
///
/// Linear is the classical E[.|F_t]. Entropic evaluates
///   -kappa * ln E[exp(-q / gamma) | F_t]
/// which satisfies the nonlinear-expectation axioms when kappa == gamma. The
/// paper10 preset (gamma = 10, kappa = 10 / ln 10) is the base-10 form
/// -10 log10 E[exp(-q/10) | F_t] and only differs by the positive factor 1/ln 10.
struct ExpectationOperator {
  enum class Kind { Linear, Entropic };

  Kind kind = Kind::Linear;
  double gamma = 1.0;
  double kappa = 1.0;
  /// Largest admissible |q| / gamma before evaluation refuses to exponentiate.
  double overflow_bound = 700.0;

  static ExpectationOperator linear();
  static ExpectationOperator entropic(double gamma);
  static ExpectationOperator entropic(double gamma, double kappa);
  static ExpectationOperator paper10();

  bool is_linear() const { return kind == Kind::Linear; }
  std::string describe() const;
};

/// E(q | F_t) for a time-s slice q, t <= s.
Slice evaluate(const ExpectationOperator& op, const ScenarioTree& tree, const Slice& q, int t);

/// q masked by an F_t event given as one flag per time-t node.
Slice mask(const ScenarioTree& tree, const Slice& q, int t, const std::vector<bool>& event);

struct AxiomCounterexample {
  std::size_t trial = 0;
  int s = 0;  ///< time of the evaluated slice
  int t = 0;  ///< inner conditioning time
  int u = 0;  ///< outer conditioning time (recursivity)
  Slice q;
  std::optional<Slice> q_other;  ///< second slice (monotonicity) or event mask
  Slice lhs;
  Slice rhs;
  std::string node;
  double violation = 0.0;
};

struct AxiomVerdict {
  bool pass = true;
  double worst_violation = 0.0;
  std::optional<AxiomCounterexample> counterexample;
};

struct AxiomReport {
  AxiomVerdict monotonicity;
  AxiomVerdict constant_invariance;
  AxiomVerdict recursivity;
  AxiomVerdict zero_one_law;
  /// Trials with q != q' somewhere below a node whose values still tie (informational).
  std::size_t strictness_ties = 0;
  std::size_t trials = 0;
  double tol = kDefaultTol;

  bool all_pass() const {
    return monotonicity.pass && constant_invariance.pass && recursivity.pass && zero_one_law.pass;
  }
};

struct AxiomOptions {
  double tol = kDefaultTol;
  /// Random slice values are drawn uniformly from [-amplitude, amplitude].
  double amplitude = 10.0;
};

/// Randomized, seeded check of monotonicity, constant invariance, recursivity
/// and the zero-one law. Failures are report content, not errors.
AxiomReport axioms_check(const ExpectationOperator& op, const ScenarioTree& tree,
                         std::size_t trials, std::uint64_t seed, const AxiomOptions& options = {});

}  // namespace tcrisk
