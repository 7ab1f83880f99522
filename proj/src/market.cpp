#include "tcrisk/market.hpp"

#include <bit>

#include "tcrisk/errors.hpp"

namespace tcrisk {

Eigen::MatrixXd MarketModel::increments(int t) const {
  if (t < 0 || t >= tree.horizon()) throw TimeOrderError("no increment after time " + std::to_string(t));
  const auto& next = tree.level(t + 1);
  const auto& now = prices[static_cast<std::size_t>(t)];
  const auto& later = prices[static_cast<std::size_t>(t) + 1];
  Eigen::MatrixXd delta(later.rows(), later.cols());
  for (std::size_t k = 0; k < next.size(); ++k) {
    const auto row = static_cast<Index>(k);
    delta.row(row) = later.row(row) - now.row(next[k].parent_slot);
  }
  return delta;
}

MarketModel make_market(ScenarioTree tree, std::vector<Eigen::MatrixXd> prices,
                        double initial_wealth) {
  if (prices.size() != static_cast<std::size_t>(tree.horizon()) + 1)
    throw DimensionError("prices must cover times 0..T");
  const Index d = prices.front().cols();
  if (d < 1) throw DimensionError("market needs at least one asset");
  for (int t = 0; t <= tree.horizon(); ++t) {
    const auto& p = prices[static_cast<std::size_t>(t)];
    if (p.rows() != tree.level_size(t))
      throw DimensionError("prices missing at some nodes of time " + std::to_string(t));
    if (p.cols() != d)
      throw DimensionError("price arity changes at time " + std::to_string(t));
  }
  MarketModel market;
  market.tree = std::move(tree);
  market.assets = static_cast<int>(d);
  market.prices = std::move(prices);
  market.initial_wealth = initial_wealth;
  return market;
}

bool same_allocations(const Policy& a, const Policy& b) {
  if (a.alloc.size() != b.alloc.size()) return false;
  for (std::size_t t = 0; t < a.alloc.size(); ++t) {
    if (a.alloc[t].rows() != b.alloc[t].rows() || a.alloc[t].cols() != b.alloc[t].cols()) return false;
    if ((a.alloc[t].array() != b.alloc[t].array()).any()) return false;
  }
  return true;
}

bool agree_before(const Policy& a, const Policy& b, int t) {
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(t, 0)),
                                       std::min(a.alloc.size(), b.alloc.size()));
  for (std::size_t s = 0; s < n; ++s)
    if ((a.alloc[s].array() != b.alloc[s].array()).any()) return false;
  return true;
}

std::vector<Index> decision_shape(const ScenarioTree& tree) {
  std::vector<Index> shape;
  for (int t = 0; t < tree.horizon(); ++t) shape.push_back(tree.level_size(t));
  return shape;
}

Policy constant_policy(const ScenarioTree& tree, int assets, double value, std::string label) {
  Policy p{std::move(label), {}};
  for (int t = 0; t < tree.horizon(); ++t)
    p.alloc.push_back(Eigen::MatrixXd::Constant(tree.level_size(t), assets, value));
  return p;
}

Policy zero_policy(const ScenarioTree& tree, int assets, std::string label) {
  return constant_policy(tree, assets, 0.0, std::move(label));
}

void check_policy(const std::vector<Index>& shape, int assets, const Policy& policy) {
  if (policy.alloc.size() != shape.size())
    throw DimensionError("policy '" + policy.label + "' covers " + std::to_string(policy.alloc.size()) +
                         " decision times, expected " + std::to_string(shape.size()));
  for (std::size_t t = 0; t < shape.size(); ++t) {
    if (policy.alloc[t].rows() != shape[t])
      throw DimensionError("policy '" + policy.label + "' is not defined on every time-" +
                           std::to_string(t) + " node");
    if (policy.alloc[t].cols() != assets)
      throw DimensionError("policy '" + policy.label + "' has allocation arity " +
                           std::to_string(policy.alloc[t].cols()) + ", market has " +
                           std::to_string(assets) + " assets");
  }
}

void check_policy(const ScenarioTree& tree, int assets, const Policy& policy) {
  check_policy(decision_shape(tree), assets, policy);
}

Slice WealthProcess::at(int u) const {
  if (u < 0) throw TimeOrderError("negative wealth time");
  const int t = std::min(u, horizon());
  return {t, levels_[static_cast<std::size_t>(t)]};
}

WealthProcess wealth_process(const MarketModel& market, const Policy& policy) {
  const auto& tree = market.tree;
  check_policy(tree, market.assets, policy);
  std::vector<Eigen::VectorXd> levels;
  levels.push_back(Eigen::VectorXd::Constant(1, market.initial_wealth));
  for (int t = 0; t < tree.horizon(); ++t) {
    const Eigen::MatrixXd delta = market.increments(t);
    const auto& next = tree.level(t + 1);
    const auto& x = policy.alloc[static_cast<std::size_t>(t)];
    const auto& v = levels.back();
    Eigen::VectorXd v_next(static_cast<Index>(next.size()));
    for (std::size_t k = 0; k < next.size(); ++k) {
      const auto row = static_cast<Index>(k);
      const Index parent = next[k].parent_slot;
      v_next[row] = x.row(parent).dot(delta.row(row)) + v[parent];
    }
    levels.push_back(std::move(v_next));
  }
  return WealthProcess(std::move(levels));
}

Policy truncate(const Policy& policy, int cutoff) {
  Policy out = policy;
  for (std::size_t t = static_cast<std::size_t>(std::max(cutoff, 0)); t < out.alloc.size(); ++t)
    out.alloc[t].setZero();
  return out;
}

Event Event::all(const ScenarioTree& tree, int t) {
  return {t, std::vector<bool>(static_cast<std::size_t>(tree.level_size(t)), true)};
}

Event Event::none(const ScenarioTree& tree, int t) {
  return {t, std::vector<bool>(static_cast<std::size_t>(tree.level_size(t)), false)};
}

Policy paste(const ScenarioTree& tree, const Event& a, const Policy& x, const Policy& y) {
  if (a.contains.size() != static_cast<std::size_t>(tree.level_size(a.time)))
    throw DimensionError("event does not match the time-" + std::to_string(a.time) + " nodes");
  if (x.alloc.size() != y.alloc.size()) throw DimensionError("pasting policies of different shapes");
  if (!agree_before(x, y, a.time))
    throw PrefixMismatch("policies '" + x.label + "' and '" + y.label + "' disagree before time " +
                         std::to_string(a.time));
  Policy out{"paste(" + x.label + "," + y.label + ")", y.alloc};
  for (int s = a.time; s < static_cast<int>(out.alloc.size()); ++s) {
    const Eigen::VectorXi anc = tree.ancestor_map(a.time, s);
    auto& dst = out.alloc[static_cast<std::size_t>(s)];
    const auto& src = x.alloc[static_cast<std::size_t>(s)];
    for (Index k = 0; k < anc.size(); ++k)
      if (a.contains[static_cast<std::size_t>(anc[k])]) dst.row(k) = src.row(k);
  }
  return out;
}

std::vector<std::uint64_t> policy_key(const Policy& policy) {
  std::vector<std::uint64_t> key;
  for (const auto& a : policy.alloc) {
    key.push_back(static_cast<std::uint64_t>(a.rows()));
    for (Index i = 0; i < a.size(); ++i) key.push_back(std::bit_cast<std::uint64_t>(a.data()[i]));
  }
  return key;
}

PolicySpace::PolicySpace(const ScenarioTree& tree, int assets, std::vector<Policy> policies,
                         std::string label)
    : PolicySpace(decision_shape(tree), assets, std::move(policies), std::move(label)) {}

PolicySpace::PolicySpace(std::vector<Index> shape, int assets, std::vector<Policy> policies,
                         std::string label)
    : label_(std::move(label)), assets_(assets), shape_(std::move(shape)) {
  if (policies.empty()) throw StructureError("policy space '" + label_ + "' is empty");
  for (auto& p : policies) {
    check_policy(shape_, assets_, p);
    auto key = policy_key(p);
    if (index_.emplace(std::move(key), members_.size()).second) members_.push_back(std::move(p));
  }
}

std::optional<std::size_t> PolicySpace::find(const Policy& policy) const {
  auto it = index_.find(policy_key(policy));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PolicySpace conditional_space(const PolicySpace& space, int t, const Policy& past) {
  if (t <= 0) return space;
  check_policy(space.shape(), space.assets(), past);
  std::vector<Policy> kept;
  for (const auto& p : space.members())
    if (agree_before(p, past, t)) kept.push_back(p);
  if (kept.empty())
    throw EmptyConditionalSpace("no member of '" + space.label() + "' agrees with '" + past.label +
                                "' before time " + std::to_string(t));
  return PolicySpace(space.shape(), space.assets(), std::move(kept),
                     space.label() + "|" + std::to_string(t));
}

PastingCheck is_pasting_closed(const ScenarioTree& tree, const PolicySpace& space, int t,
                               const Policy& past) {
  PastingCheck result;
  const PolicySpace cond = conditional_space(space, t, past);
  if (t >= space.horizon()) return result;
  const Index n = tree.level_size(t);
  if (n > kMaxEventSlice)
    throw EnumerationLimit("time-" + std::to_string(t) + " level has " + std::to_string(n) +
                           " nodes, too many events to enumerate");
  const std::uint64_t events = std::uint64_t{1} << n;
  Event a{t, std::vector<bool>(static_cast<std::size_t>(n))};
  for (std::size_t i = 0; i < cond.size(); ++i) {
    for (std::size_t j = i + 1; j < cond.size(); ++j) {
      // A = all and A = empty reproduce x and y.
      for (std::uint64_t mask = 1; mask + 1 < events; ++mask) {
        for (Index k = 0; k < n; ++k) a.contains[static_cast<std::size_t>(k)] = (mask >> k) & 1U;
        Policy pasted = paste(tree, a, cond[i], cond[j]);
        ++result.pastes_checked;
        if (!cond.contains(pasted)) {
          result.closed = false;
          result.witness = PastingWitness{a, cond[i], cond[j], std::move(pasted)};
          return result;
        }
      }
    }
  }
  return result;
}

TruncationCheck is_truncation_closed(const PolicySpace& space, int m) {
  if (m < 1) throw InputError("horizon m must be at least 1");
  TruncationCheck result;
  // U|_t^X always contains X, and a truncation at t+m > t keeps the prefix, so
  // closure over every (t, past) reduces to closure of the whole space.
  for (int t = 0; t + m < space.horizon(); ++t) {
    for (const auto& x : space.members()) {
      Policy cut = truncate(x, t + m);
      if (!space.contains(cut)) {
        result.closed = false;
        result.witness = TruncationWitness{t, x, std::move(cut)};
        return result;
      }
    }
  }
  return result;
}

int StoppingTime::value_at_leaf(const ScenarioTree& tree, Index leaf_slot) const {
  const int T = tree.horizon();
  int tau = T;
  Index slot = leaf_slot;
  for (int t = T; t >= 0; --t) {
    if (stopped[static_cast<std::size_t>(t)][static_cast<std::size_t>(slot)]) tau = t;
    if (t > 0) slot = tree.node(t, slot).parent_slot;
  }
  return tau;
}

namespace {

std::uint64_t count_subtree(const ScenarioTree& tree, int t, Index slot, std::uint64_t limit) {
  if (t == tree.horizon()) return 1;
  const auto& n = tree.node(t, slot);
  std::uint64_t product = 1;
  for (Index c = 0; c < n.child_count; ++c) {
    const std::uint64_t f = count_subtree(tree, t + 1, n.first_child + c, limit);
    product = (product > limit / f) ? limit : std::min(limit, product * f);
  }
  return std::min(limit, product + 1);
}

using ContinueSet = std::vector<NodeRef>;

// Each option lists the nodes of the subtree where the rule has not yet stopped.
std::vector<ContinueSet> subtree_options(const ScenarioTree& tree, int t, Index slot) {
  std::vector<ContinueSet> options{ContinueSet{}};
  if (t == tree.horizon()) return options;
  const auto& n = tree.node(t, slot);
  std::vector<ContinueSet> combos{ContinueSet{{t, slot}}};
  for (Index c = 0; c < n.child_count; ++c) {
    const auto child = subtree_options(tree, t + 1, n.first_child + c);
    std::vector<ContinueSet> next;
    next.reserve(combos.size() * child.size());
    for (const auto& prefix : combos) {
      for (const auto& tail : child) {
        ContinueSet merged = prefix;
        merged.insert(merged.end(), tail.begin(), tail.end());
        next.push_back(std::move(merged));
      }
    }
    combos = std::move(next);
  }
  options.insert(options.end(), std::make_move_iterator(combos.begin()),
                 std::make_move_iterator(combos.end()));
  return options;
}

}  // namespace

std::uint64_t count_stopping_times(const ScenarioTree& tree, std::uint64_t cap) {
  return count_subtree(tree, 0, 0, cap + 1);
}

std::vector<StoppingTime> enumerate_stopping_times(const ScenarioTree& tree, std::uint64_t cap) {
  const std::uint64_t count = count_stopping_times(tree, cap);
  if (count > cap)
    throw EnumerationLimit("number of stopping times exceeds the cap of " + std::to_string(cap));
  std::vector<StoppingTime> out;
  out.reserve(count);
  for (const auto& cont : subtree_options(tree, 0, 0)) {
    StoppingTime tau;
    for (int t = 0; t <= tree.horizon(); ++t)
      tau.stopped.emplace_back(static_cast<std::size_t>(tree.level_size(t)), true);
    for (const auto& ref : cont)
      tau.stopped[static_cast<std::size_t>(ref.time)][static_cast<std::size_t>(ref.slot)] = false;
    out.push_back(std::move(tau));
  }
  return out;
}

Policy stop_policy(const Policy& base, const StoppingTime& tau) {
  Policy out = base;
  for (std::size_t t = 0; t < out.alloc.size(); ++t)
    for (Index k = 0; k < out.alloc[t].rows(); ++k)
      if (tau.stopped[t][static_cast<std::size_t>(k)]) out.alloc[t].row(k).setZero();
  return out;
}

PolicySpace stopping_time_space(const ScenarioTree& tree, const Policy& base, std::uint64_t cap) {
  const int assets = static_cast<int>(base.alloc.empty() ? 1 : base.assets());
  check_policy(tree, assets, base);
  const auto taus = enumerate_stopping_times(tree, cap);
  std::vector<Policy> policies;
  policies.reserve(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    Policy p = stop_policy(base, taus[i]);
    p.label = base.label + "@tau" + std::to_string(i);
    policies.push_back(std::move(p));
  }
  return PolicySpace(tree, assets, std::move(policies), "stop(" + base.label + ")");
}

}  // namespace tcrisk
