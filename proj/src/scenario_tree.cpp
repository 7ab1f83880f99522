#include "tcrisk/scenario_tree.hpp"

#include <cmath>
#include <sstream>

#include "tcrisk/errors.hpp"

namespace tcrisk {

ScenarioTree ScenarioTree::build(const TreeSpec& spec) {
  if (spec.horizon < 0) throw StructureError("tree horizon must be non-negative");
  if (spec.nodes.empty()) throw StructureError("tree has no nodes");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (!index.emplace(spec.nodes[i].id, i).second)
      throw StructureError("duplicate node id '" + spec.nodes[i].id +
                           "' (recombining or repeated node)");
  }

  std::optional<std::size_t> root;
  std::vector<std::vector<std::size_t>> children(spec.nodes.size());
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    if (n.time < 0 || n.time > spec.horizon)
      throw StructureError("node '" + n.id + "' has time outside 0..T");
    if (!n.parent) {
      if (root) throw StructureError("multiple roots: '" + spec.nodes[*root].id + "' and '" + n.id + "'");
      if (n.time != 0) throw StructureError("root '" + n.id + "' must be at time 0");
      root = i;
      continue;
    }
    auto it = index.find(*n.parent);
    if (it == index.end())
      throw StructureError("node '" + n.id + "' has unknown parent '" + *n.parent + "'");
    if (spec.nodes[it->second].time != n.time - 1)
      throw StructureError("time gap between node '" + n.id + "' and its parent '" + *n.parent + "'");
    children[it->second].push_back(i);
  }
  if (!root) throw StructureError("tree has no root");

  ScenarioTree tree;
  tree.horizon_ = spec.horizon;
  tree.levels_.resize(static_cast<std::size_t>(spec.horizon) + 1);

  std::vector<std::size_t> frontier{*root};
  Node root_node;
  root_node.id = spec.nodes[*root].id;
  tree.levels_[0].push_back(root_node);

  for (int t = 0; t <= spec.horizon; ++t) {
    std::vector<std::size_t> next;
    auto& level = tree.levels_[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      auto& node = level[k];
      const auto& kids = children[frontier[k]];
      if (t == spec.horizon) {
        if (!kids.empty()) throw StructureError("node '" + node.id + "' at time T has children");
        continue;
      }
      if (kids.empty())
        throw StructureError("leaf '" + node.id + "' at time " + std::to_string(t) + " before T");
      double total = 0.0;
      for (auto c : kids) {
        const double p = spec.nodes[c].p;
        if (!(p > 0.0) || !std::isfinite(p)) {
          std::ostringstream msg;
          msg << "branch probability of '" << spec.nodes[c].id << "' is " << p << ", must be > 0";
          throw ProbabilityError(msg.str());
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kProbabilityTol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "children of '" << node.id << "' have probabilities summing to " << total;
        throw ProbabilityError(msg.str());
      }
      node.first_child = static_cast<Index>(next.size());
      node.child_count = static_cast<Index>(kids.size());
      auto& child_level = tree.levels_[static_cast<std::size_t>(t) + 1];
      for (auto c : kids) {
        Node child;
        child.id = spec.nodes[c].id;
        child.time = t + 1;
        child.slot = static_cast<Index>(next.size());
        child.parent_slot = static_cast<Index>(k);
        child.branch_prob = spec.nodes[c].p;
        child.path_prob = node.path_prob * child.branch_prob;
        child_level.push_back(child);
        next.push_back(c);
      }
    }
    frontier = std::move(next);
  }

  for (const auto& level : tree.levels_)
    for (const auto& n : level) tree.by_id_.emplace(n.id, NodeRef{n.time, n.slot});
  if (tree.by_id_.size() != spec.nodes.size())
    throw StructureError("tree description contains nodes unreachable from the root");
  return tree;
}

ScenarioTree ScenarioTree::uniform(int horizon, int branching) {
  if (branching < 1) throw StructureError("branching must be at least 1");
  TreeSpec spec;
  spec.horizon = horizon;
  spec.nodes.push_back({"r", 0, std::nullopt, 1.0});
  std::vector<std::string> frontier{"r"};
  for (int t = 1; t <= horizon; ++t) {
    std::vector<std::string> next;
    for (const auto& parent : frontier) {
      for (int b = 0; b < branching; ++b) {
        std::string id = parent + std::to_string(b);
        spec.nodes.push_back({id, t, parent, 1.0 / branching});
        next.push_back(std::move(id));
      }
    }
    frontier = std::move(next);
  }
  return build(spec);
}

std::size_t ScenarioTree::size() const {
  std::size_t n = 0;
  for (const auto& level : levels_) n += level.size();
  return n;
}

void ScenarioTree::check_time(int t) const {
  if (t < 0 || t > horizon_)
    throw TimeOrderError("time " + std::to_string(t) + " outside 0.." + std::to_string(horizon_));
}

Index ScenarioTree::level_size(int t) const {
  check_time(t);
  return static_cast<Index>(levels_[static_cast<std::size_t>(t)].size());
}

const ScenarioTree::Node& ScenarioTree::node(int t, Index slot) const {
  check_time(t);
  const auto& level = levels_[static_cast<std::size_t>(t)];
  if (slot < 0 || slot >= static_cast<Index>(level.size()))
    throw UnknownNode("no slot " + std::to_string(slot) + " at time " + std::to_string(t));
  return level[static_cast<std::size_t>(slot)];
}

const std::vector<ScenarioTree::Node>& ScenarioTree::level(int t) const {
  check_time(t);
  return levels_[static_cast<std::size_t>(t)];
}

NodeRef ScenarioTree::find(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw UnknownNode("unknown node '" + id + "'");
  return it->second;
}

std::pair<Index, Index> ScenarioTree::descendants(int t, Index slot, int s) const {
  if (s < t) throw TimeOrderError("descendants requested at an earlier time");
  check_time(s);
  Index first = slot;
  Index last = slot + 1;
  for (int u = t; u < s; ++u) {
    const auto& level = levels_[static_cast<std::size_t>(u)];
    const auto& lo = level[static_cast<std::size_t>(first)];
    const auto& hi = level[static_cast<std::size_t>(last - 1)];
    first = lo.first_child;
    last = hi.first_child + hi.child_count;
  }
  return {first, last};
}

Eigen::VectorXi ScenarioTree::ancestor_map(int t, int s) const {
  if (s < t) throw TimeOrderError("ancestor map requested at an earlier time");
  check_time(s);
  Eigen::VectorXi map(level_size(s));
  for (Index k = 0; k < map.size(); ++k) map[k] = static_cast<int>(k);
  for (int u = s; u > t; --u) {
    const auto& level = levels_[static_cast<std::size_t>(u)];
    for (Index k = 0; k < map.size(); ++k)
      map[k] = static_cast<int>(level[static_cast<std::size_t>(map[k])].parent_slot);
  }
  return map;
}

Eigen::VectorXd ScenarioTree::branch_probabilities(int t) const {
  const auto& lv = level(t);
  Eigen::VectorXd p(static_cast<Index>(lv.size()));
  for (std::size_t k = 0; k < lv.size(); ++k) p[static_cast<Index>(k)] = lv[k].branch_prob;
  return p;
}

Eigen::VectorXd ScenarioTree::path_probabilities(int t) const {
  const auto& lv = level(t);
  Eigen::VectorXd p(static_cast<Index>(lv.size()));
  for (std::size_t k = 0; k < lv.size(); ++k) p[static_cast<Index>(k)] = lv[k].path_prob;
  return p;
}

Slice ScenarioTree::zeros(int t) const { return {t, Eigen::VectorXd::Zero(level_size(t))}; }

Slice ScenarioTree::constant(int t, double value) const {
  return {t, Eigen::VectorXd::Constant(level_size(t), value)};
}

double path_probability(const ScenarioTree& tree, const std::string& id) {
  return path_probability(tree, tree.find(id));
}

double path_probability(const ScenarioTree& tree, NodeRef node) {
  return tree.node(node).path_prob;
}

void check_slice(const ScenarioTree& tree, const Slice& q) {
  if (q.values.size() != tree.level_size(q.time))
    throw DimensionError("slice at time " + std::to_string(q.time) + " has " +
                         std::to_string(q.values.size()) + " values, level has " +
                         std::to_string(tree.level_size(q.time)) + " nodes");
}

Slice conditional_expectation(const ScenarioTree& tree, const Slice& q, int t) {
  check_slice(tree, q);
  if (t > q.time)
    throw TimeOrderError("cannot condition a time-" + std::to_string(q.time) +
                         " slice on later time " + std::to_string(t));
  if (t < 0) throw TimeOrderError("negative conditioning time");
  Eigen::VectorXd current = q.values;
  // One backward step per level: parent = sum over children of branch_prob * child.
  for (int u = q.time; u > t; --u) {
    const auto& parents = tree.level(u - 1);
    const Eigen::VectorXd p = tree.branch_probabilities(u);
    Eigen::VectorXd up(static_cast<Index>(parents.size()));
    for (std::size_t k = 0; k < parents.size(); ++k) {
      const auto& n = parents[k];
      up[static_cast<Index>(k)] = p.segment(n.first_child, n.child_count)
                                      .dot(current.segment(n.first_child, n.child_count));
    }
    current = std::move(up);
  }
  return {t, std::move(current)};
}

Slice lift(const ScenarioTree& tree, const Slice& q, int s) {
  check_slice(tree, q);
  const Eigen::VectorXi anc = tree.ancestor_map(q.time, s);
  Slice out{s, Eigen::VectorXd(anc.size())};
  for (Index k = 0; k < anc.size(); ++k) out.values[k] = q.values[anc[k]];
  return out;
}

}  // namespace tcrisk
