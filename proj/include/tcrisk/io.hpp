#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "tcrisk/consistency.hpp"
#include "tcrisk/examples.hpp"

namespace tcrisk::io {

using nlohmann::json;

/// Version tag written into every structured report.
inline constexpr const char* kReportSchema = "tcrisk.report/1";

json load_json_file(const std::string& path);

// Inputs. Malformed documents raise InputError; semantic problems raise the
// library's own errors (ProbabilityError, StructureError, ...).

/// {"T": int, "nodes": [{"id": str, "time": int, "parent": str|null, "p": float}]}
TreeSpec tree_spec_from_json(const json& j);
ScenarioTree tree_from_json(const json& j);

/// Tree document plus {"d": int, "v0": float, "prices": {node-id: [float; d]}}.
MarketModel market_from_json(const json& j);

/// {"label": str, "alloc": {node-id: [float; d]}} over the time-0..T-1 nodes.
Policy policy_from_json(const json& j, const MarketModel& market);

/// {"policies": [policy...]} or {"stopping_space_of": policy}.
PolicySpace space_from_json(const json& j, const MarketModel& market,
                            std::uint64_t cap = kDefaultStoppingTimeCap);

/// {"kind": "linear"} or {"kind": "entropic", "gamma": float, "kappa": float | "paper10"}.
ExpectationOperator operator_from_json(const json& j);

/// {"variant": "simple"|"modified"|"terminal"|"bellman", "m": int, "operator": {...},
///  "payoff": {"kind": "zero"} | {"kind": "mean_variance", "risk_aversion": float}}
ValueFunction value_function_from_json(const json& j);

// Outputs.

json to_json(const TreeSpec& spec);
json to_json(const MarketModel& market);
json to_json(const ScenarioTree& tree, const Policy& policy);
json to_json(const PolicySpace& space, const ScenarioTree& tree);
json to_json(const ExpectationOperator& op);
json to_json(const ScenarioTree& tree, const Slice& slice);

json report_json(const MarketModel& market, const PolicyChoice& choice);
json report_json(const MarketModel& market, const ComparisonReport& report);
json report_json(const MonotonicityReport& report);
json report_json(const ScenarioTree& tree, const AxiomReport& report);
json report_json(const MarketModel& market, const AcceptabilityReport& report);

}  // namespace tcrisk::io
