#pragma once

#include <string>

#include "tcrisk/market.hpp"

namespace tcrisk {

/// A market together with a base policy and the policy space built over it.
struct Instance {
  std::string name;
  MarketModel market;
  Policy base;
  PolicySpace space;
};

/// Three-period binary tree with independent increments
///   S1 - S0 in {1, -0.1}, S2 - S1 in {0.1, -10}, S3 - S2 in {100, -0.1},
/// each branch with probability 0.5, S0 = 20 and zero initial wealth.
/// Node ids spell the path: "r", "ru", "rd", "rud", ...
TreeSpec s4_tree_spec();
MarketModel s4_market();

/// s4 market, base policy holding one unit everywhere, and its stopping-time space.
Instance s4_instance();

/// Looks up a built-in instance by name; throws InputError for unknown names.
Instance builtin_instance(const std::string& name);

}  // namespace tcrisk
