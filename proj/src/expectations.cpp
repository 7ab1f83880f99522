#include "tcrisk/expectations.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tcrisk/errors.hpp"

namespace tcrisk {

ExpectationOperator ExpectationOperator::linear() { return {}; }

ExpectationOperator ExpectationOperator::entropic(double gamma) { return entropic(gamma, gamma); }

ExpectationOperator ExpectationOperator::entropic(double gamma, double kappa) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("entropic gamma must be > 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InputError("entropic kappa must be > 0");
  ExpectationOperator op;
  op.kind = Kind::Entropic;
  op.gamma = gamma;
  op.kappa = kappa;
  return op;
}

ExpectationOperator ExpectationOperator::paper10() { return entropic(10.0, 10.0 / std::log(10.0)); }

std::string ExpectationOperator::describe() const {
  if (is_linear()) return "linear";
  std::ostringstream out;
  out.precision(10);
  out << "entropic(gamma=" << gamma << ", kappa=" << kappa << ")";
  return out.str();
}

Slice evaluate(const ExpectationOperator& op, const ScenarioTree& tree, const Slice& q, int t) {
  if (t > q.time) throw TimeOrderError("cannot evaluate a time-" + std::to_string(q.time) +
                                       " slice at later time " + std::to_string(t));
  if (op.is_linear()) return conditional_expectation(tree, q, t);

  check_slice(tree, q);
  const double worst = q.values.size() ? q.values.cwiseAbs().maxCoeff() / op.gamma : 0.0;
  if (!(worst <= op.overflow_bound)) {
    std::ostringstream msg;
    msg << "entropic evaluation refused: |q|/gamma = " << worst << " exceeds " << op.overflow_bound;
    throw OverflowGuard(msg.str());
  }
  // Log-sum-exp with the largest exponent of each time-t atom factored out.
  const Eigen::VectorXd a = -q.values / op.gamma;
  Slice peak{t, Eigen::VectorXd(tree.level_size(t))};
  for (Index n = 0; n < peak.values.size(); ++n) {
    const auto [lo, hi] = tree.descendants(t, n, q.time);
    peak.values[n] = a.segment(lo, hi - lo).maxCoeff();
  }
  const Slice shifted{q.time, (a - lift(tree, peak, q.time).values).array().exp().matrix()};
  Slice inner = conditional_expectation(tree, shifted, t);
  inner.values = -op.kappa * (peak.values.array() + inner.values.array().log()).matrix();
  return inner;
}

Slice mask(const ScenarioTree& tree, const Slice& q, int t, const std::vector<bool>& event) {
  const Eigen::VectorXi anc = tree.ancestor_map(t, q.time);
  if (event.size() != static_cast<std::size_t>(tree.level_size(t)))
    throw DimensionError("event does not match the time-" + std::to_string(t) + " nodes");
  Slice out = q;
  for (Index k = 0; k < anc.size(); ++k)
    if (!event[static_cast<std::size_t>(anc[k])]) out.values[k] = 0.0;
  return out;
}

namespace {

struct Comparison {
  double violation = 0.0;
  Index slot = 0;
};

// Largest amount by which lhs falls below rhs.
Comparison shortfall(const Slice& lhs, const Slice& rhs) {
  Comparison c;
  Eigen::VectorXd gap = rhs.values - lhs.values;
  c.violation = gap.size() ? gap.maxCoeff(&c.slot) : 0.0;
  return c;
}

Comparison mismatch(const Slice& lhs, const Slice& rhs) {
  Comparison c;
  Eigen::VectorXd gap = (lhs.values - rhs.values).cwiseAbs();
  c.violation = gap.size() ? gap.maxCoeff(&c.slot) : 0.0;
  return c;
}

void record(AxiomVerdict& verdict, const Comparison& c, double tol, const ScenarioTree& tree,
            AxiomCounterexample example) {
  verdict.worst_violation = std::max(verdict.worst_violation, c.violation);
  if (c.violation > tol && verdict.pass) {
    verdict.pass = false;
    example.node = tree.node(example.lhs.time, c.slot).id;
    example.violation = c.violation;
    verdict.counterexample = std::move(example);
  }
}

}  // namespace

AxiomReport axioms_check(const ExpectationOperator& op, const ScenarioTree& tree,
                         std::size_t trials, std::uint64_t seed, const AxiomOptions& options) {
  if (trials < 1) throw InputError("axiom check needs at least one trial");
  AxiomReport report;
  report.trials = trials;
  report.tol = options.tol;

  double amplitude = options.amplitude;
  if (!op.is_linear()) amplitude = std::min(amplitude, op.overflow_bound * op.gamma / 4.0);

  const int T = tree.horizon();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> value(-amplitude, amplitude);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    auto pick = [&](int hi) { return std::uniform_int_distribution<int>(0, hi)(rng); };

    const int s = pick(T);
    const int t = pick(s);
    const int u = pick(t);
    Slice q{s, Eigen::VectorXd(tree.level_size(s))};
    for (Index k = 0; k < q.values.size(); ++k) q.values[k] = value(rng);

    const Slice e_t = evaluate(op, tree, q, t);

    // Monotonicity: q' <= q nodewise.
    {
      Slice lower = q;
      for (Index k = 0; k < lower.values.size(); ++k)
        if (coin(rng)) lower.values[k] -= amplitude * unit(rng);
      const Slice e_lower = evaluate(op, tree, lower, t);
      record(report.monotonicity, shortfall(e_t, e_lower), options.tol, tree,
             {trial, s, t, u, q, lower, e_t, e_lower, {}, 0.0});
      for (Index k = 0; k < e_t.values.size(); ++k) {
        const auto [first, last] = tree.descendants(t, k, s);
        const bool differs = (q.values.segment(first, last - first).array() !=
                              lower.values.segment(first, last - first).array()).any();
        if (differs && std::abs(e_t.values[k] - e_lower.values[k]) <= options.tol) {
          ++report.strictness_ties;
          break;
        }
      }
    }

    // Constant invariance: an F_t quantity viewed at time s evaluates to itself.
    {
      Slice c{t, Eigen::VectorXd(tree.level_size(t))};
      for (Index k = 0; k < c.values.size(); ++k) c.values[k] = value(rng);
      const Slice e_c = evaluate(op, tree, lift(tree, c, s), t);
      record(report.constant_invariance, mismatch(e_c, c), options.tol, tree,
             {trial, s, t, u, lift(tree, c, s), std::nullopt, e_c, c, {}, 0.0});
    }

    // Recursivity: E(E(q|F_t)|F_u) = E(q|F_u).
    {
      const Slice nested = evaluate(op, tree, e_t, u);
      const Slice direct = evaluate(op, tree, q, u);
      record(report.recursivity, mismatch(nested, direct), options.tol, tree,
             {trial, s, t, u, q, std::nullopt, nested, direct, {}, 0.0});
    }

    // Zero-one law: E(I_A q|F_t) = I_A E(q|F_t) for A in F_t.
    {
      std::vector<bool> event(static_cast<std::size_t>(tree.level_size(t)));
      Slice flags{t, Eigen::VectorXd(tree.level_size(t))};
      for (std::size_t k = 0; k < event.size(); ++k) {
        event[k] = coin(rng);
        flags.values[static_cast<Index>(k)] = event[k] ? 1.0 : 0.0;
      }
      const Slice lhs = evaluate(op, tree, mask(tree, q, t, event), t);
      const Slice rhs = mask(tree, e_t, t, event);
      record(report.zero_one_law, mismatch(lhs, rhs), options.tol, tree,
             {trial, s, t, u, q, flags, lhs, rhs, {}, 0.0});
    }
  }
  return report;
}

}  // namespace tcrisk
