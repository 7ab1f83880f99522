#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace tcrisk {

using Index = Eigen::Index;

/// Default tolerance for value comparisons in consistency checks.
inline constexpr double kDefaultTol = 1e-9;
/// Tolerance for sibling probability sums.
inline constexpr double kProbabilityTol = 1e-12;

/// One node of a tree description, as read from a tree file.
struct NodeSpec {
  std::string id;
  int time = 0;
  std::optional<std::string> parent;
  double p = 1.0;
};

struct TreeSpec {
  int horizon = 0;
  std::vector<NodeSpec> nodes;
};

/// Node position: time level and slot within that level.
struct NodeRef {
  int time = 0;
  Index slot = 0;
};

/// A scalar F_t-measurable quantity: one value per time-t node, indexed by slot.
struct Slice {
  int time = 0;
  Eigen::VectorXd values;
};

/// Finite non-recombining event tree with branch probabilities.
///
/// Nodes are stored level by level. Level t+1 lists the children of the level-t
/// nodes in slot order, so the time-s descendants of any time-t node occupy a
/// contiguous slot range of level s. Every slice in the library relies on this
/// layout. Immutable once built.
class ScenarioTree {
public:
  struct Node {
    std::string id;
    int time = 0;
    Index slot = 0;
    Index parent_slot = -1;  // slot in level time-1, -1 for the root
    Index first_child = 0;   // slot in level time+1
    Index child_count = 0;
    double branch_prob = 1.0;
    double path_prob = 1.0;
  };

  /// Validates the description and lays the nodes out level by level.
  static ScenarioTree build(const TreeSpec& spec);

  /// Complete tree with `branching` children per node and equal branch probabilities.
  static ScenarioTree uniform(int horizon, int branching);

  int horizon() const { return horizon_; }
  std::size_t size() const;
  Index level_size(int t) const;

  const Node& node(int t, Index slot) const;
  const Node& node(NodeRef ref) const { return node(ref.time, ref.slot); }
  const std::vector<Node>& level(int t) const;

  NodeRef find(const std::string& id) const;
  bool contains(const std::string& id) const { return by_id_.count(id) > 0; }

  /// Half-open slot range [first, second) of the time-s descendants of a time-t node.
  std::pair<Index, Index> descendants(int t, Index slot, int s) const;

  /// For every time-s slot, the slot of its time-t ancestor (t <= s).
  Eigen::VectorXi ancestor_map(int t, int s) const;

  /// Branch probabilities of level t as a vector (all ones at t = 0).
  Eigen::VectorXd branch_probabilities(int t) const;

  /// Path probabilities of level t.
  Eigen::VectorXd path_probabilities(int t) const;

  Slice zeros(int t) const;
  Slice constant(int t, double value) const;

private:
  void check_time(int t) const;

  int horizon_ = 0;
  std::vector<std::vector<Node>> levels_;
  std::unordered_map<std::string, NodeRef> by_id_;
};

/// Unconditional probability of reaching a node.
double path_probability(const ScenarioTree& tree, const std::string& id);
double path_probability(const ScenarioTree& tree, NodeRef node);

/// Classical conditional expectation E[q | F_t] of a time-s slice, t <= s.
Slice conditional_expectation(const ScenarioTree& tree, const Slice& q, int t);

/// Broadcast an F_t slice down to level s >= t (same value on every descendant).
Slice lift(const ScenarioTree& tree, const Slice& q, int s);

/// Throws DimensionError unless the slice covers exactly the nodes of its level.
void check_slice(const ScenarioTree& tree, const Slice& q);

}  // namespace tcrisk
