#include "tcrisk/examples.hpp"

#include <array>

#include "tcrisk/errors.hpp"

namespace tcrisk {

namespace {

constexpr double kInitialPrice = 20.0;
constexpr std::array<std::array<double, 2>, 3> kIncrements{{{1.0, -0.1}, {0.1, -10.0}, {100.0, -0.1}}};
constexpr std::array<char, 2> kBranch{'u', 'd'};

}  // namespace

TreeSpec s4_tree_spec() {
  TreeSpec spec;
  spec.horizon = 3;
  spec.nodes.push_back({"r", 0, std::nullopt, 1.0});
  std::vector<std::string> frontier{"r"};
  for (int t = 1; t <= 3; ++t) {
    std::vector<std::string> next;
    for (const auto& parent : frontier) {
      for (char b : kBranch) {
        std::string id = parent + b;
        spec.nodes.push_back({id, t, parent, 0.5});
        next.push_back(std::move(id));
      }
    }
    frontier = std::move(next);
  }
  return spec;
}

MarketModel s4_market() {
  ScenarioTree tree = ScenarioTree::build(s4_tree_spec());
  std::vector<Eigen::MatrixXd> prices;
  prices.push_back(Eigen::MatrixXd::Constant(1, 1, kInitialPrice));
  for (int t = 1; t <= tree.horizon(); ++t) {
    const auto& level = tree.level(t);
    Eigen::MatrixXd p(static_cast<Index>(level.size()), 1);
    for (std::size_t k = 0; k < level.size(); ++k) {
      const auto& node = level[k];
      const int branch = node.id.back() == 'u' ? 0 : 1;
      p(static_cast<Index>(k), 0) = prices.back()(node.parent_slot, 0) +
                                    kIncrements[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(branch)];
    }
    prices.push_back(std::move(p));
  }
  return make_market(std::move(tree), std::move(prices), 0.0);
}

Instance s4_instance() {
  MarketModel market = s4_market();
  Policy hold = constant_policy(market.tree, 1, 1.0, "hold");
  PolicySpace space = stopping_time_space(market.tree, hold);
  return {"s4", std::move(market), std::move(hold), std::move(space)};
}

Instance builtin_instance(const std::string& name) {
  if (name == "s4") return s4_instance();
  throw InputError("unknown built-in example '" + name + "' (available: s4)");
}

}  // namespace tcrisk
