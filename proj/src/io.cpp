#include "tcrisk/io.hpp"

#include <cmath>
#include <fstream>

#include "tcrisk/errors.hpp"

namespace tcrisk::io {

namespace {

const json& require(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(std::string(what) + " is missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T get(const json& j, const char* key, const char* what) {
  try {
    return require(j, key, what).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + " field '" + key + "': " + e.what());
  }
}

Eigen::RowVectorXd vector_from_json(const json& j, Index d, const std::string& where) {
  if (!j.is_array() || static_cast<Index>(j.size()) != d)
    throw DimensionError(where + " must be an array of " + std::to_string(d) + " numbers");
  Eigen::RowVectorXd v(d);
  for (Index i = 0; i < d; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw InputError(where + " contains a non-number");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

// Reads {node-id: [..]} for every node of times [0, last], rejecting extras.
std::vector<Eigen::MatrixXd> node_map_from_json(const json& j, const ScenarioTree& tree, int last,
                                                Index d, const std::string& what) {
  if (!j.is_object()) throw InputError(what + " must be an object keyed by node id");
  std::vector<Eigen::MatrixXd> out;
  std::size_t used = 0;
  for (int t = 0; t <= last; ++t) {
    const auto& level = tree.level(t);
    Eigen::MatrixXd m(static_cast<Index>(level.size()), d);
    for (std::size_t k = 0; k < level.size(); ++k) {
      auto it = j.find(level[k].id);
      if (it == j.end()) throw DimensionError(what + " is not defined at node '" + level[k].id + "'");
      m.row(static_cast<Index>(k)) = vector_from_json(*it, d, what + " at '" + level[k].id + "'");
      ++used;
    }
    out.push_back(std::move(m));
  }
  if (used != j.size()) {
    for (const auto& [id, _] : j.items()) {
      if (!tree.contains(id)) throw UnknownNode(what + " refers to unknown node '" + id + "'");
    }
    throw DimensionError(what + " has entries outside times 0.." + std::to_string(last));
  }
  return out;
}

json row_json(const Eigen::RowVectorXd& row) {
  json a = json::array();
  for (Index i = 0; i < row.size(); ++i) a.push_back(row[i]);
  return a;
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("cannot parse '" + path + "': " + e.what());
  }
}

TreeSpec tree_spec_from_json(const json& j) {
  TreeSpec spec;
  spec.horizon = get<int>(j, "T", "tree");
  const auto& nodes = require(j, "nodes", "tree");
  if (!nodes.is_array()) throw InputError("tree field 'nodes' must be an array");
  for (const auto& n : nodes) {
    NodeSpec node;
    node.id = get<std::string>(n, "id", "node");
    node.time = get<int>(n, "time", "node");
    if (n.contains("parent") && !n.at("parent").is_null()) node.parent = get<std::string>(n, "parent", "node");
    if (node.parent) {
      node.p = get<double>(n, "p", "node");
    } else if (n.contains("p") && !n.at("p").is_null()) {
      node.p = get<double>(n, "p", "node");
    }
    spec.nodes.push_back(std::move(node));
  }
  return spec;
}

ScenarioTree tree_from_json(const json& j) { return ScenarioTree::build(tree_spec_from_json(j)); }

MarketModel market_from_json(const json& j) {
  ScenarioTree tree = tree_from_json(j);
  const int d = get<int>(j, "d", "market");
  if (d < 1) throw DimensionError("market needs d >= 1");
  const double v0 = j.contains("v0") ? get<double>(j, "v0", "market") : 0.0;
  auto prices = node_map_from_json(require(j, "prices", "market"), tree, tree.horizon(), d, "prices");
  return make_market(std::move(tree), std::move(prices), v0);
}

Policy policy_from_json(const json& j, const MarketModel& market) {
  Policy p;
  p.label = j.contains("label") ? get<std::string>(j, "label", "policy") : "policy";
  const int T = market.tree.horizon();
  if (T > 0)
    p.alloc = node_map_from_json(require(j, "alloc", "policy"), market.tree, T - 1, market.assets,
                                 "allocation of '" + p.label + "'");
  return p;
}

PolicySpace space_from_json(const json& j, const MarketModel& market, std::uint64_t cap) {
  if (j.is_object() && j.contains("stopping_space_of"))
    return stopping_time_space(market.tree, policy_from_json(j.at("stopping_space_of"), market), cap);
  const auto& list = require(j, "policies", "policy space");
  if (!list.is_array()) throw InputError("policy space field 'policies' must be an array");
  std::vector<Policy> policies;
  for (const auto& p : list) policies.push_back(policy_from_json(p, market));
  const std::string label = j.contains("label") ? get<std::string>(j, "label", "policy space") : "space";
  return PolicySpace(market.tree, market.assets, std::move(policies), label);
}

ExpectationOperator operator_from_json(const json& j) {
  const auto kind = get<std::string>(j, "kind", "operator");
  if (kind == "linear") return ExpectationOperator::linear();
  if (kind == "paper10") return ExpectationOperator::paper10();
  if (kind != "entropic") throw InputError("unknown operator kind '" + kind + "'");
  const double gamma = j.contains("gamma") ? get<double>(j, "gamma", "operator") : 10.0;
  if (!j.contains("kappa") || j.at("kappa").is_null()) return ExpectationOperator::entropic(gamma);
  const auto& kappa = j.at("kappa");
  if (kappa.is_string()) {
    if (kappa.get<std::string>() != "paper10") throw InputError("kappa must be a number or \"paper10\"");
    return ExpectationOperator::entropic(gamma, 10.0 / std::log(10.0));
  }
  return ExpectationOperator::entropic(gamma, get<double>(j, "kappa", "operator"));
}

ValueFunction value_function_from_json(const json& j) {
  const auto variant = get<std::string>(j, "variant", "value function");
  if (variant == "bellman") {
    if (!j.contains("payoff")) return zero_payoff();
    const auto& payoff = j.at("payoff");
    const auto kind = get<std::string>(payoff, "kind", "payoff");
    if (kind == "zero") return zero_payoff();
    if (kind == "mean_variance")
      return mean_variance_payoff(payoff.contains("risk_aversion")
                                      ? get<double>(payoff, "risk_aversion", "payoff")
                                      : 0.0);
    throw InputError("unknown payoff kind '" + kind + "'");
  }
  const ExpectationOperator op =
      j.contains("operator") ? operator_from_json(j.at("operator")) : ExpectationOperator::entropic(10.0);
  ValueFunction vf;
  if (variant == "terminal") {
    vf = Terminal{op};
  } else {
    const int m = get<int>(j, "m", "value function");
    if (variant == "simple") vf = SimpleHorizon{m, op};
    else if (variant == "modified") vf = ModifiedHorizon{m, op};
    else throw InputError("unknown value-function variant '" + variant + "'");
  }
  validate(vf);
  return vf;
}

json to_json(const TreeSpec& spec) {
  json nodes = json::array();
  for (const auto& n : spec.nodes) {
    nodes.push_back({{"id", n.id},
                     {"time", n.time},
                     {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                     {"p", n.p}});
  }
  return {{"T", spec.horizon}, {"nodes", nodes}};
}

json to_json(const MarketModel& market) {
  TreeSpec spec;
  spec.horizon = market.tree.horizon();
  json prices = json::object();
  for (int t = 0; t <= spec.horizon; ++t) {
    const auto& level = market.tree.level(t);
    for (const auto& n : level) {
      std::optional<std::string> parent;
      if (t > 0) parent = market.tree.node(t - 1, n.parent_slot).id;
      spec.nodes.push_back({n.id, t, parent, n.branch_prob});
      prices[n.id] = row_json(market.prices[static_cast<std::size_t>(t)].row(n.slot));
    }
  }
  json j = to_json(spec);
  j["d"] = market.assets;
  j["v0"] = market.initial_wealth;
  j["prices"] = prices;
  return j;
}

json to_json(const ScenarioTree& tree, const Policy& policy) {
  json alloc = json::object();
  for (int t = 0; t < policy.decision_times(); ++t)
    for (const auto& n : tree.level(t))
      alloc[n.id] = row_json(policy.alloc[static_cast<std::size_t>(t)].row(n.slot));
  return {{"label", policy.label}, {"alloc", alloc}};
}

json to_json(const PolicySpace& space, const ScenarioTree& tree) {
  json list = json::array();
  for (const auto& p : space.members()) list.push_back(to_json(tree, p));
  return {{"label", space.label()}, {"policies", list}};
}

json to_json(const ExpectationOperator& op) {
  if (op.is_linear()) return {{"kind", "linear"}};
  return {{"kind", "entropic"}, {"gamma", op.gamma}, {"kappa", op.kappa}};
}

json to_json(const ScenarioTree& tree, const Slice& slice) {
  json values = json::object();
  for (const auto& n : tree.level(slice.time)) values[n.id] = slice.values[n.slot];
  return {{"t", slice.time}, {"values", values}};
}

json report_json(const MarketModel& market, const PolicyChoice& choice) {
  json per_time = json::array();
  for (std::size_t t = 0; t < choice.choices.size(); ++t) {
    per_time.push_back({{"t", t},
                        {"policy", to_json(market.tree, choice.choices[t])},
                        {"value", to_json(market.tree, choice.values[t])}});
  }
  return {{"check", "policy_choice"},
          {"mode", to_string(choice.mode)},
          {"value_function", choice.value_function},
          {"space", {{"label", choice.space.label()}, {"size", choice.space.size()}}},
          {"truncation_closed", choice.truncation_closed},
          {"warnings", choice.warnings},
          {"per_time", per_time},
          {"realized", to_json(market.tree, choice.realized)}};
}

json report_json(const MarketModel& market, const ComparisonReport& report) {
  json per_time = json::array();
  for (const auto& r : report.per_time) {
    per_time.push_back({{"t", r.t},
                        {"chosen", to_json(market.tree, r.chosen)},
                        {"realized", to_json(market.tree, r.realized)},
                        {"max_gap", r.max_gap},
                        {"min_gap", r.min_gap},
                        {"pass", r.pass}});
  }
  return {{"schema", kReportSchema},
          {"check", report.check},
          {"per_time", per_time},
          {"verdict", report.verdict},
          {"tol", report.tol}};
}

json report_json(const MonotonicityReport& report) {
  json j = {{"schema", kReportSchema},
            {"check", "intertemporal_monotonicity"},
            {"per_time", json::array()},
            {"premises_checked", report.premises_checked},
            {"verdict", report.verdict},
            {"tol", report.tol}};
  if (report.witness) {
    const auto& w = *report.witness;
    j["witness"] = {{"x", w.x_label},         {"x_prime", w.x_prime_label}, {"s", w.s},
                    {"t", w.t},               {"node", w.node},             {"value_x", w.value_x},
                    {"value_x_prime", w.value_x_prime}};
  }
  return j;
}

json report_json(const ScenarioTree& tree, const AxiomReport& report) {
  auto verdict = [&](const AxiomVerdict& v) {
    json j = {{"pass", v.pass}, {"worst_violation", v.worst_violation}};
    if (v.counterexample) {
      const auto& c = *v.counterexample;
      j["counterexample"] = {{"trial", c.trial},
                             {"s", c.s},
                             {"t", c.t},
                             {"u", c.u},
                             {"q", to_json(tree, c.q)},
                             {"lhs", to_json(tree, c.lhs)},
                             {"rhs", to_json(tree, c.rhs)},
                             {"node", c.node},
                             {"violation", c.violation}};
      if (c.q_other) j["counterexample"]["q_other"] = to_json(tree, *c.q_other);
    }
    return j;
  };
  return {{"schema", kReportSchema},
          {"check", "axioms"},
          {"per_time", json::array()},
          {"axioms",
           {{"monotonicity", verdict(report.monotonicity)},
            {"constant_invariance", verdict(report.constant_invariance)},
            {"recursivity", verdict(report.recursivity)},
            {"zero_one_law", verdict(report.zero_one_law)}}},
          {"strictness_ties", report.strictness_ties},
          {"trials", report.trials},
          {"verdict", report.all_pass()},
          {"tol", report.tol}};
}

json report_json(const MarketModel& market, const AcceptabilityReport& report) {
  json dep = report_json(market, report.dependability);
  return {{"schema", kReportSchema},
          {"check", "acceptability"},
          {"per_time", dep["per_time"]},
          {"chain",
           {{"realized_value", report.realized_value},
            {"first_choice_value", report.first_choice_value},
            {"policy_value", report.policy_value}}},
          {"policy_terminal_value", report.policy_terminal_value},
          {"threshold", report.threshold},
          {"v0", report.initial_wealth},
          {"acceptable", report.acceptable},
          {"realized_acceptable", report.realized_acceptable},
          {"space_size", report.space_size},
          {"dependable", report.dependability.verdict},
          {"verdict", report.chain_holds},
          {"tol", report.tol}};
}

}  // namespace tcrisk::io
