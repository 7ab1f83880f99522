#include "tcrisk/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tcrisk/errors.hpp"
#include "tcrisk/io.hpp"

namespace tcrisk::cli {

namespace {

struct Options {
  std::string example;
  std::string market_file;
  std::string space_file;
  std::string tree_file;
  std::string policy_file;
  std::string vf_file;
  std::string out_dir = ".";
  std::string mode = "simple";
  int m = 2;
  std::optional<std::string> op;
  double gamma = 10.0;
  std::optional<double> kappa;
  bool paper10 = false;
  double risk_aversion = 0.0;
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
  std::size_t trials = 500;
  std::uint64_t cap = kDefaultStoppingTimeCap;
  int depth = 0;
  int precision = 4;
  std::string format = "text";
};

void add_operator_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--operator", o.op, "linear | entropic | paper10");
  cmd->add_option("--gamma", o.gamma, "entropic risk denominator");
  cmd->add_option("--kappa", o.kappa, "entropic outer scale (defaults to gamma)");
  cmd->add_flag("--paper10", o.paper10, "kappa = 10 / ln 10 (base-10 logarithm form)");
}

void add_output_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--tol", o.tol, "comparison tolerance");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--format", o.format, "text | structured")->check(CLI::IsMember({"text", "structured"}));
  cmd->add_option("--precision", o.precision, "decimals in text output");
}

void add_instance_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--example", o.example, "built-in instance (s4)");
  cmd->add_option("--market", o.market_file, "market file");
}

void add_value_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--mode", o.mode, "simple | modified | terminal | bellman")
      ->check(CLI::IsMember({"simple", "modified", "terminal", "bellman"}));
  cmd->add_option("--m", o.m, "horizon length");
  cmd->add_option("--risk-aversion", o.risk_aversion, "Bellman mean-variance payoff coefficient");
  cmd->add_option("--vf", o.vf_file, "value-function config file (overrides --mode and operator flags)");
}

// The built-in example is meant to reproduce its reference numbers, which use the
// base-10 operator, so it is the default there unless the axioms are checked.
ExpectationOperator make_operator(const Options& o, bool example_default = true) {
  const bool base10 = example_default && !o.example.empty() && !o.kappa && !o.paper10;
  std::string name = o.op.value_or(base10 ? "paper10" : "entropic");
  if (name == "linear") return ExpectationOperator::linear();
  if (name == "paper10") return ExpectationOperator::entropic(o.gamma, 10.0 / std::log(10.0));
  if (name != "entropic") throw InputError("unknown operator '" + name + "'");
  if (o.paper10) return ExpectationOperator::entropic(o.gamma, 10.0 / std::log(10.0));
  if (o.kappa) return ExpectationOperator::entropic(o.gamma, *o.kappa);
  return ExpectationOperator::entropic(o.gamma);
}

ValueFunction make_value_function(const Options& o) {
  if (!o.vf_file.empty()) return io::value_function_from_json(io::load_json_file(o.vf_file));
  if (o.m < 1) throw InputError("--m must be at least 1");
  ValueFunction vf;
  if (o.mode == "simple") vf = SimpleHorizon{o.m, make_operator(o)};
  else if (o.mode == "modified") vf = ModifiedHorizon{o.m, make_operator(o)};
  else if (o.mode == "terminal") vf = Terminal{make_operator(o)};
  else vf = mean_variance_payoff(o.risk_aversion);
  return vf;
}

MarketModel load_market(const Options& o) {
  if (!o.example.empty()) return builtin_instance(o.example).market;
  if (o.market_file.empty()) throw InputError("need --example or --market");
  return io::market_from_json(io::load_json_file(o.market_file));
}

struct Loaded {
  MarketModel market;
  PolicySpace space;
  std::string name;
};

Loaded load_instance(const Options& o) {
  if (!o.example.empty() && o.space_file.empty()) {
    Instance inst = builtin_instance(o.example);
    return {std::move(inst.market), std::move(inst.space), inst.name};
  }
  MarketModel market = load_market(o);
  if (o.space_file.empty()) throw InputError("need --space with --market");
  PolicySpace space = io::space_from_json(io::load_json_file(o.space_file), market, o.cap);
  return {std::move(market), std::move(space), o.example.empty() ? o.market_file : o.example};
}

std::string number(double v, int precision) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << (std::abs(v) < 0.5 * std::pow(10.0, -precision) ? 0.0 : v);
  return s.str();
}

std::string slice_text(const ScenarioTree& tree, const Slice& slice, int precision) {
  std::string out;
  for (const auto& n : tree.level(slice.time)) {
    if (!out.empty()) out += ' ';
    out += n.id + "=" + number(slice.values[n.slot], precision);
  }
  return out;
}

std::string policy_text(const ScenarioTree& tree, const Policy& p, int precision) {
  std::string out;
  for (int t = 0; t < p.decision_times(); ++t) {
    out += (t ? " t" : "t") + std::to_string(t) + "[";
    bool first = true;
    for (const auto& n : tree.level(t)) {
      if (!first) out += ' ';
      first = false;
      out += n.id + "=";
      const auto row = p.alloc[static_cast<std::size_t>(t)].row(n.slot);
      for (Index i = 0; i < row.size(); ++i) out += (i ? "," : "") + number(row[i], precision);
    }
    out += "]";
  }
  return out;
}

void emit(std::ostream& out, const io::json& j) { out << j.dump(2) << '\n'; }

int cmd_run(const Options& o, std::ostream& out) {
  const Loaded inst = load_instance(o);
  const ValueFunction vf = make_value_function(o);
  const auto& tree = inst.market.tree;
  const PolicyChoice choice = run_policy_choice(vf, inst.market, inst.space, o.tol);
  const bool modified = choice.mode == ChoiceMode::Modified;
  const ComparisonReport report = modified ? check_dependability(vf, inst.market, choice, o.tol)
                                           : check_time_consistency(vf, inst.market, choice, o.tol);
  const char* verdict = modified ? (report.verdict ? "DEPENDABLE" : "NOT DEPENDABLE")
                                 : (report.verdict ? "CONSISTENT" : "INCONSISTENT");

  if (o.format == "structured") {
    io::json j = io::report_json(inst.market, report);
    j["command"] = "run";
    j["verdict_label"] = verdict;
    j["choice"] = io::report_json(inst.market, choice);
    emit(out, j);
    return report.verdict ? kPass : kViolated;
  }

  const int p = o.precision;
  const char* v = modified ? "V~" : "V";
  out << "instance: " << inst.name << " (T=" << tree.horizon() << ", d=" << inst.market.assets
      << ", v0=" << number(inst.market.initial_wealth, p) << ")\n";
  out << "policy space: " << inst.space.label() << " (" << inst.space.size() << " policies)\n";
  out << "value function: " << describe(vf) << ", mode " << to_string(choice.mode) << "\n";
  for (const auto& w : choice.warnings) out << "warning: " << w << "\n";
  for (std::size_t t = 0; t < choice.choices.size(); ++t) {
    out << "t=" << t << " chose " << choice.choices[t].label << ": "
        << policy_text(tree, choice.choices[t], p) << "\n";
  }
  out << "realized X^: " << policy_text(tree, choice.realized, p) << "\n";
  out << "check: " << report.check << "\n";
  for (const auto& r : report.per_time) {
    out << "t=" << r.t << " " << v << "_" << r.t << "(X^" << r.t << ") = " << slice_text(tree, r.chosen, p)
        << " | " << v << "_" << r.t << "(X^) = " << slice_text(tree, r.realized, p)
        << " | max gap " << number(r.max_gap, p) << " " << (r.pass ? "ok" : "FAIL") << "\n";
  }
  out << "verdict: " << verdict << "\n";
  return report.verdict ? kPass : kViolated;
}

int cmd_check_axioms(const Options& o, std::ostream& out) {
  std::optional<ScenarioTree> tree;
  std::string source;
  if (!o.tree_file.empty()) {
    tree = io::tree_from_json(io::load_json_file(o.tree_file));
    source = o.tree_file;
  } else if (!o.example.empty() || !o.market_file.empty()) {
    tree = load_market(o).tree;
    source = o.example.empty() ? o.market_file : o.example;
  } else if (o.depth > 0) {
    tree = ScenarioTree::uniform(o.depth, 2);
    source = "binary depth " + std::to_string(o.depth);
  } else {
    throw InputError("need --tree, --market, --example or --depth");
  }
  const ExpectationOperator op = make_operator(o, false);
  AxiomOptions options;
  options.tol = o.tol;
  const AxiomReport report = axioms_check(op, *tree, o.trials, o.seed, options);

  if (o.format == "structured") {
    io::json j = io::report_json(*tree, report);
    j["command"] = "check-axioms";
    j["operator"] = io::to_json(op);
    emit(out, j);
    return report.all_pass() ? kPass : kViolated;
  }
  out << "operator: " << op.describe() << "\n";
  out << "tree: " << source << ", " << report.trials << " trials, seed " << o.seed << ", tol " << o.tol << "\n";
  auto line = [&](const char* name, const AxiomVerdict& v) {
    out << name << ": " << (v.pass ? "pass" : "FAIL") << " (worst violation " << std::scientific
        << std::setprecision(3) << v.worst_violation << std::defaultfloat << ")\n";
    if (v.counterexample) {
      const auto& c = *v.counterexample;
      out << "  counterexample: trial " << c.trial << ", s=" << c.s << " t=" << c.t << " u=" << c.u << ", node "
          << c.node << "\n";
      out << "    q: " << slice_text(*tree, c.q, 6) << "\n";
      out << "    lhs: " << slice_text(*tree, c.lhs, 6) << "\n";
      out << "    rhs: " << slice_text(*tree, c.rhs, 6) << "\n";
    }
  };
  line("monotonicity", report.monotonicity);
  line("constant_invariance", report.constant_invariance);
  line("recursivity", report.recursivity);
  line("zero_one_law", report.zero_one_law);
  out << "strictness ties (informational): " << report.strictness_ties << "\n";
  out << "verdict: " << (report.all_pass() ? "ALL AXIOMS HOLD" : "AXIOM VIOLATED") << "\n";
  return report.all_pass() ? kPass : kViolated;
}

int cmd_acceptability(const Options& o, std::ostream& out) {
  MarketModel market = load_market(o);
  Policy x;
  if (!o.policy_file.empty()) {
    io::json j = io::load_json_file(o.policy_file);
    if (j.contains("policy")) j = j.at("policy");
    x = io::policy_from_json(j, market);
  } else if (!o.example.empty()) {
    x = builtin_instance(o.example).base;
  } else {
    throw InputError("need --policy with --market");
  }
  if (o.m < 1) throw InputError("--m must be at least 1");
  const ExpectationOperator op = make_operator(o);
  const AcceptabilityReport report = acceptability_check(market, x, o.m, op, o.tol, o.cap);

  if (o.format == "structured") {
    io::json j = io::report_json(market, report);
    j["command"] = "acceptability";
    j["operator"] = io::to_json(op);
    j["m"] = o.m;
    emit(out, j);
    return report.chain_holds ? kPass : kViolated;
  }
  const int p = o.precision;
  out << "policy: " << x.label << ", stopping-time space of " << report.space_size << " policies, m=" << o.m
      << ", " << op.describe() << "\n";
  out << "V~_0(X^) = " << number(report.realized_value, p) << " >= V~_0(X^0) = "
      << number(report.first_choice_value, p) << " >= V~_0(I[0,m[ x) = " << number(report.policy_value, p)
      << " : " << (report.chain_holds ? "chain holds" : "CHAIN VIOLATED") << "\n";
  out << "E(V_T of x | F_0) without truncation: " << number(report.policy_terminal_value, p) << "\n";
  out << "threshold (null policy): " << number(report.threshold, p) << " (v0 = " << number(report.initial_wealth, p)
      << ")\n";
  out << "x acceptable: " << (report.acceptable ? "yes" : "no")
      << "; realized policy acceptable: " << (report.realized_acceptable ? "yes" : "no") << "\n";
  out << "dependable: " << (report.dependability.verdict ? "yes" : "no") << "\n";
  return report.chain_holds ? kPass : kViolated;
}

int cmd_monotonicity(const Options& o, std::ostream& out) {
  const Loaded inst = load_instance(o);
  const ValueFunction vf = make_value_function(o);
  const MonotonicityReport report = intertemporal_monotonicity(vf, inst.market, inst.space, o.tol);
  if (o.format == "structured") {
    io::json j = io::report_json(report);
    j["command"] = "monotonicity";
    j["value_function"] = describe(vf);
    emit(out, j);
    return report.verdict ? kPass : kViolated;
  }
  out << "value function: " << describe(vf) << ", " << inst.space.size() << " policies, "
      << report.premises_checked << " premises checked\n";
  if (report.witness) {
    const auto& w = *report.witness;
    out << "witness: X=" << w.x_label << " X'=" << w.x_prime_label << " dominates at t=" << w.t
        << " but at s=" << w.s << ", node " << w.node << ": " << number(w.value_x, o.precision) << " < "
        << number(w.value_x_prime, o.precision) << "\n";
  }
  out << "verdict: " << (report.verdict ? "MONOTONE" : "NOT MONOTONE") << "\n";
  return report.verdict ? kPass : kViolated;
}

int cmd_export(const Options& o, std::ostream& out) {
  if (o.example.empty()) throw InputError("need --example");
  const Instance inst = builtin_instance(o.example);
  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  auto write = [&](const std::string& name, const io::json& j) {
    const fs::path path = fs::path(o.out_dir) / name;
    std::ofstream f(path);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << j.dump(2) << '\n';
    out << "wrote " << path.string() << "\n";
  };
  write(inst.name + "_market.json", io::to_json(inst.market));
  write(inst.name + "_space.json", {{"stopping_space_of", io::to_json(inst.market.tree, inst.base)}});
  write(inst.name + "_policy.json", io::to_json(inst.market.tree, inst.base));
  return kPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Moving-horizon risk: policy choice, time consistency and dependability checks", "tcrisk"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run the policy choice and its consistency check");
  add_instance_options(run_cmd, o);
  run_cmd->add_option("--space", o.space_file, "policy space file");
  run_cmd->add_option("--cap", o.cap, "stopping-time enumeration cap");
  add_value_options(run_cmd, o);
  add_operator_options(run_cmd, o);
  add_output_options(run_cmd, o);

  auto* axioms_cmd = app.add_subcommand("check-axioms", "randomized nonlinear-expectation axiom check");
  add_instance_options(axioms_cmd, o);
  axioms_cmd->add_option("--tree", o.tree_file, "tree file");
  axioms_cmd->add_option("--depth", o.depth, "use a binary tree of this depth");
  axioms_cmd->add_option("--trials", o.trials, "number of random trials");
  add_operator_options(axioms_cmd, o);
  add_output_options(axioms_cmd, o);

  auto* accept_cmd = app.add_subcommand("acceptability", "acceptability chain over a stopping-time space");
  add_instance_options(accept_cmd, o);
  accept_cmd->add_option("--policy", o.policy_file, "policy file");
  accept_cmd->add_option("--m", o.m, "horizon length");
  accept_cmd->add_option("--cap", o.cap, "stopping-time enumeration cap");
  add_operator_options(accept_cmd, o);
  add_output_options(accept_cmd, o);

  auto* mono_cmd = app.add_subcommand("monotonicity", "brute-force intertemporal monotonicity check");
  add_instance_options(mono_cmd, o);
  mono_cmd->add_option("--space", o.space_file, "policy space file");
  mono_cmd->add_option("--cap", o.cap, "stopping-time enumeration cap");
  add_value_options(mono_cmd, o);
  add_operator_options(mono_cmd, o);
  add_output_options(mono_cmd, o);

  auto* export_cmd = app.add_subcommand("export-example", "write a built-in instance as input files");
  export_cmd->add_option("--example", o.example, "built-in instance (s4)")->required();
  export_cmd->add_option("--out-dir", o.out_dir, "output directory");

  std::vector<std::string> argv_storage{"tcrisk"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(o, out);
    if (axioms_cmd->parsed()) return cmd_check_axioms(o, out);
    if (accept_cmd->parsed()) return cmd_acceptability(o, out);
    if (mono_cmd->parsed()) return cmd_monotonicity(o, out);
    if (export_cmd->parsed()) return cmd_export(o, out);
  } catch (const EnumerationLimit& e) {
    err << "error: " << e.what() << " (raise --cap to enumerate more)\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace tcrisk::cli
