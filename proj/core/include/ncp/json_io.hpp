#pragma once

#include <string>

#include "ncp/cpt_solver.hpp"
#include "ncp/dp_solver.hpp"
#include "ncp/no_arbitrage.hpp"
#include "ncp/preferences.hpp"
#include "ncp/tree.hpp"

namespace ncp {

struct TreeBundle {
  ScenarioTree tree;
  ClaimSpec claim;
};

/// Tree format: {"horizon", "assets", "nodes": [{"id", "time", "parent",
/// "prob", "price"}], "claim": {leaf id -> payoff} (optional)}.
/// Unknown fields are rejected.
TreeBundle parse_tree(const std::string& json_text);

/// Preference format: {"kind": "eu", "utility": {...}} or
/// {"kind": "cpt", "u_plus": {...}, "u_minus": {...}, "w_plus": {...},
/// "w_minus": {...}} with {"family", "params"} leaves.
Preference parse_preference(const std::string& json_text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::string to_json(const ScenarioTree& tree, const NAReport& report);
std::string to_json(const ScenarioTree& tree, const SolveResult& result);
std::string to_json(const ScenarioTree& tree, const CPTResult& result);
std::string to_json(const CurveResult& curve);

NAReport parse_na_report(const ScenarioTree& tree, const std::string& json_text);
/// Rebuilds the serialized fields (value functions are not serialized).
SolveResult parse_solve_report(const ScenarioTree& tree, const std::string& json_text);
CPTResult parse_cpt_report(const ScenarioTree& tree, const std::string& json_text);
CurveResult parse_curve_report(const std::string& json_text);

}  // namespace ncp
