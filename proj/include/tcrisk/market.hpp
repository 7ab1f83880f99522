#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tcrisk/scenario_tree.hpp"

namespace tcrisk {

/// Risky asset prices on a tree. Row k of prices[t] is the price vector at
/// time-t slot k; the risk-free rate is zero.
struct MarketModel {
  ScenarioTree tree;
  int assets = 1;
  std::vector<Eigen::MatrixXd> prices;
  double initial_wealth = 0.0;

  /// S_{t+1} - S_t for every time-(t+1) node, t in 0..T-1.
  Eigen::MatrixXd increments(int t) const;
};

/// Validates shapes and assembles a market.
MarketModel make_market(ScenarioTree tree, std::vector<Eigen::MatrixXd> prices,
                        double initial_wealth = 0.0);

/// An adapted allocation process on decision times 0..T-1 (alloc[t] is
/// level_size(t) x d). The label does not take part in comparisons.
struct Policy {
  std::string label;
  std::vector<Eigen::MatrixXd> alloc;

  int decision_times() const { return static_cast<int>(alloc.size()); }
  Index assets() const { return alloc.empty() ? 0 : alloc.front().cols(); }
};

/// Nodewise-exact equality of allocations.
bool same_allocations(const Policy& a, const Policy& b);

/// True iff a and b coincide at every node of every time s < t.
bool agree_before(const Policy& a, const Policy& b, int t);

Policy constant_policy(const ScenarioTree& tree, int assets, double value, std::string label);
Policy zero_policy(const ScenarioTree& tree, int assets, std::string label = "zero");

/// Level sizes of the decision times 0..T-1.
std::vector<Index> decision_shape(const ScenarioTree& tree);

/// Throws DimensionError unless the policy is shaped for the tree with `assets` columns.
void check_policy(const ScenarioTree& tree, int assets, const Policy& policy);
void check_policy(const std::vector<Index>& shape, int assets, const Policy& policy);

/// Wealth V_t on times 0..T. Queries beyond T return V_T.
class WealthProcess {
public:
  explicit WealthProcess(std::vector<Eigen::VectorXd> levels) : levels_(std::move(levels)) {}

  int horizon() const { return static_cast<int>(levels_.size()) - 1; }
  Slice at(int u) const;

private:
  std::vector<Eigen::VectorXd> levels_;
};

/// V_{t+1} = <X_t, S_{t+1} - S_t> + V_t edgewise from V_0 = initial wealth.
WealthProcess wealth_process(const MarketModel& market, const Policy& policy);

/// Zero allocations at every time >= cutoff.
Policy truncate(const Policy& policy, int cutoff);

/// An F_t event: a subset of the time-t nodes, by slot.
struct Event {
  int time = 0;
  std::vector<bool> contains;

  static Event all(const ScenarioTree& tree, int t);
  static Event none(const ScenarioTree& tree, int t);
};

/// I_A x + I_{A^c} y. The two policies must agree before the event time.
Policy paste(const ScenarioTree& tree, const Event& a, const Policy& x, const Policy& y);

/// Finite, deduplicated family of policies on one tree with one asset count.
/// Duplicates (nodewise identical allocations) keep their first occurrence.
class PolicySpace {
public:
  PolicySpace(const ScenarioTree& tree, int assets, std::vector<Policy> policies,
              std::string label = {});
  /// `shape` holds the level sizes of the decision times 0..T-1.
  PolicySpace(std::vector<Index> shape, int assets, std::vector<Policy> policies,
              std::string label = {});

  std::size_t size() const { return members_.size(); }
  const Policy& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<Policy>& members() const { return members_; }
  const std::string& label() const { return label_; }
  int assets() const { return assets_; }
  int horizon() const { return static_cast<int>(shape_.size()); }
  const std::vector<Index>& shape() const { return shape_; }

  std::optional<std::size_t> find(const Policy& policy) const;
  bool contains(const Policy& policy) const { return find(policy).has_value(); }

private:
  std::vector<Policy> members_;
  std::map<std::vector<std::uint64_t>, std::size_t> index_;
  std::string label_;
  int assets_ = 1;
  std::vector<Index> shape_;
};

/// Bitwise key of a policy's allocations.
std::vector<std::uint64_t> policy_key(const Policy& policy);

/// Members agreeing with `past` at every node of every time s < t.
PolicySpace conditional_space(const PolicySpace& space, int t, const Policy& past);

struct PastingWitness {
  Event event;
  Policy x;
  Policy y;
  Policy pasted;
};

struct PastingCheck {
  bool closed = true;
  std::optional<PastingWitness> witness;
  std::size_t pastes_checked = 0;
};

/// Maximum time-t level size for which every event is enumerated.
inline constexpr Index kMaxEventSlice = 20;

/// Every paste of every pair of the conditional space over every F_t event
/// must land in the conditional space.
PastingCheck is_pasting_closed(const ScenarioTree& tree, const PolicySpace& space, int t,
                               const Policy& past);

struct TruncationWitness {
  int t = 0;
  Policy member;
  Policy truncated;
};

struct TruncationCheck {
  bool closed = true;
  std::optional<TruncationWitness> witness;
};

/// Closure of the space under I_{[0,t+m[} for every t and every past.
TruncationCheck is_truncation_closed(const PolicySpace& space, int m);

/// Stopped-by-now flags per time 0..T and slot; absorbing, and always stopped at T.
struct StoppingTime {
  std::vector<std::vector<bool>> stopped;

  /// Time at which the path through this node stops (the node must be at time T).
  int value_at_leaf(const ScenarioTree& tree, Index leaf_slot) const;
};

inline constexpr std::uint64_t kDefaultStoppingTimeCap = 1'000'000;

/// f(leaf) = 1, f(n) = 1 + prod f(children), saturated at cap + 1.
std::uint64_t count_stopping_times(const ScenarioTree& tree,
                                   std::uint64_t cap = kDefaultStoppingTimeCap);

std::vector<StoppingTime> enumerate_stopping_times(const ScenarioTree& tree,
                                                   std::uint64_t cap = kDefaultStoppingTimeCap);

/// I_{[0,tau[} applied pathwise to a base policy.
Policy stop_policy(const Policy& base, const StoppingTime& tau);

/// {I_{[0,tau[} base : tau a stopping time}, deduplicated.
PolicySpace stopping_time_space(const ScenarioTree& tree, const Policy& base,
                                std::uint64_t cap = kDefaultStoppingTimeCap);

}  // namespace tcrisk
