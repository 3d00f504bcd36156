#include "ncp/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ncp {

namespace {

using nlohmann::json;

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(errc::input, std::string("malformed JSON: ") + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw Error(errc::input, "unknown field '" + key + "' in " + where);
}

double number_at(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw Error(errc::input, where + " is missing '" + key + "'");
  if (!obj[key].is_number()) throw Error(errc::input, where + "." + key + " must be a number");
  return obj[key].get<double>();
}

int integer_at(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw Error(errc::input, where + " is missing '" + key + "'");
  if (!obj[key].is_number_integer())
    throw Error(errc::input, where + "." + key + " must be an integer");
  return obj[key].get<int>();
}

std::map<std::string, double> params_of(const json& obj, const std::string& where) {
  std::map<std::string, double> out;
  if (!obj.contains("params")) return out;
  if (!obj["params"].is_object()) throw Error(errc::input, where + ".params must be an object");
  for (const auto& [key, val] : obj["params"].items()) {
    if (!val.is_number()) throw Error(errc::input, where + ".params." + key + " must be a number");
    out[key] = val.get<double>();
  }
  return out;
}

UtilityFunction utility_of(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw Error(errc::input, where + " must be an object");
  reject_unknown_keys(obj, {"family", "params"}, where);
  if (!obj.contains("family") || !obj["family"].is_string())
    throw Error(errc::input, where + " needs a string 'family'");
  return make_builtin_utility(obj["family"].get<std::string>(), params_of(obj, where));
}

DistortionFunction distortion_of(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw Error(errc::input, where + " must be an object");
  reject_unknown_keys(obj, {"family", "params"}, where);
  if (!obj.contains("family") || !obj["family"].is_string())
    throw Error(errc::input, where + " needs a string 'family'");
  return make_builtin_distortion(obj["family"].get<std::string>(), params_of(obj, where));
}

json strategy_to_json(const ScenarioTree& tree, const Strategy& s) {
  json out = json::object();
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.is_leaf(i)) continue;
    const Vec* phi = s.find(i);
    if (phi) out[tree.node(i).id] = *phi;
  }
  return out;
}

Strategy strategy_from_json(const ScenarioTree& tree, const json& obj,
                            const std::string& where) {
  Strategy s(tree.size());
  for (const auto& [id, arr] : obj.items()) {
    const auto idx = tree.find(id);
    if (!idx) throw Error(errc::input, where + " references unknown node '" + id + "'");
    if (!arr.is_array()) throw Error(errc::input, where + "." + id + " must be an array");
    s.set(*idx, arr.get<Vec>());
  }
  return s;
}

}  // namespace

TreeBundle parse_tree(const std::string& json_text) {
  const json root = parse_text(json_text);
  if (!root.is_object()) throw Error(errc::input, "tree file must hold a JSON object");
  reject_unknown_keys(root, {"horizon", "assets", "nodes", "claim"}, "tree");
  const int horizon = integer_at(root, "horizon", "tree");
  const int assets = integer_at(root, "assets", "tree");
  if (!root.contains("nodes") || !root["nodes"].is_array())
    throw Error(errc::input, "tree needs a 'nodes' array");

  std::vector<NodeSpec> specs;
  for (const auto& jn : root["nodes"]) {
    if (!jn.is_object()) throw Error(errc::input, "every node must be an object");
    reject_unknown_keys(jn, {"id", "time", "parent", "prob", "price"}, "node");
    NodeSpec s;
    if (!jn.contains("id") || !jn["id"].is_string())
      throw Error(errc::input, "node needs a string 'id'");
    s.id = jn["id"].get<std::string>();
    s.time = integer_at(jn, "time", "node '" + s.id + "'");
    s.prob = number_at(jn, "prob", "node '" + s.id + "'");
    if (jn.contains("parent")) {
      if (!jn["parent"].is_string())
        throw Error(errc::input, "node '" + s.id + "': parent must be a string");
      s.parent = jn["parent"].get<std::string>();
    }
    if (!jn.contains("price") || !jn["price"].is_array())
      throw Error(errc::input, "node '" + s.id + "' needs a 'price' array");
    s.price = jn["price"].get<Vec>();
    specs.push_back(std::move(s));
  }

  TreeBundle bundle{ScenarioTree::build(horizon, assets, specs), ClaimSpec{}};
  if (root.contains("claim")) {
    if (!root["claim"].is_object()) throw Error(errc::input, "claim must be an object");
    for (const auto& [id, val] : root["claim"].items()) {
      const auto idx = bundle.tree.find(id);
      if (!idx) throw Error(errc::input, "claim references unknown node '" + id + "'");
      if (!bundle.tree.is_leaf(*idx))
        throw Error(errc::input, "claim set on non-leaf node '" + id + "'");
      if (!val.is_number()) throw Error(errc::input, "claim." + id + " must be a number");
      bundle.claim.set(*idx, val.get<double>());
    }
  }
  return bundle;
}

Preference parse_preference(const std::string& json_text) {
  const json root = parse_text(json_text);
  if (!root.is_object()) throw Error(errc::input, "preference file must hold a JSON object");
  if (!root.contains("kind") || !root["kind"].is_string())
    throw Error(errc::input, "preference needs a string 'kind'");
  const std::string kind = root["kind"].get<std::string>();

  Preference pref;
  if (kind == "eu") {
    reject_unknown_keys(root, {"kind", "utility"}, "preference");
    if (!root.contains("utility")) throw Error(errc::input, "eu preference needs 'utility'");
    pref.kind = Preference::Kind::eu;
    pref.utility = utility_of(root["utility"], "utility");
  } else if (kind == "cpt") {
    reject_unknown_keys(root, {"kind", "u_plus", "u_minus", "w_plus", "w_minus"}, "preference");
    for (const char* key : {"u_plus", "u_minus", "w_plus", "w_minus"})
      if (!root.contains(key))
        throw Error(errc::input, std::string("cpt preference needs '") + key + "'");
    pref.kind = Preference::Kind::cpt;
    pref.cpt.u_plus = utility_of(root["u_plus"], "u_plus");
    pref.cpt.u_minus = utility_of(root["u_minus"], "u_minus");
    pref.cpt.w_plus = distortion_of(root["w_plus"], "w_plus");
    pref.cpt.w_minus = distortion_of(root["w_minus"], "w_minus");
  } else {
    throw Error(errc::input, "preference kind must be 'eu' or 'cpt', got '" + kind + "'");
  }
  return pref;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::input, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(errc::input, "cannot write '" + path + "'");
  out << content;
}

std::string to_json(const ScenarioTree& tree, const NAReport& report) {
  json out;
  out["na"] = report.na;
  out["witness"] = report.witness ? strategy_to_json(tree, *report.witness) : json(nullptr);
  json nodes = json::array();
  for (const auto& pn : report.nodes) {
    json jn;
    jn["node"] = pn.id;
    jn["r"] = pn.rank;
    jn["beta"] = pn.beta ? json(*pn.beta) : json(nullptr);
    jn["kappa"] = pn.kappa ? json(*pn.kappa) : json(nullptr);
    jn["pi"] = pn.pi ? json(*pn.pi) : json(nullptr);
    nodes.push_back(jn);
  }
  out["nodes"] = nodes;
  return out.dump(2) + "\n";
}

std::string to_json(const ScenarioTree& tree, const SolveResult& result) {
  json out;
  out["value"] = result.value;
  out["z"] = result.z;
  out["strategy"] = strategy_to_json(tree, result.strategy);
  json bounds = json::object();
  for (std::size_t i = 0; i < result.strategy_bounds.size(); ++i) {
    if (result.strategy_bounds[i].empty()) continue;
    json per = json::object();
    for (const auto& [n, k] : result.strategy_bounds[i]) per[std::to_string(n)] = k;
    bounds[tree.node(i).id] = per;
  }
  out["K"] = bounds;
  json diag;
  diag["grid_sizes"] = result.diagnostics.grid_sizes;
  diag["refinement_delta"] = result.diagnostics.refinement_delta;
  diag["attained"] = result.diagnostics.attained;
  diag["grid_value"] = result.diagnostics.grid_value;
  diag["consistency_gap"] = result.diagnostics.consistency_gap;
  diag["exact_extraction"] = result.diagnostics.exact_extraction;
  diag["certified"] = result.diagnostics.certified;
  out["diagnostics"] = diag;
  return out.dump(2) + "\n";
}

std::string to_json(const ScenarioTree& tree, const CPTResult& result) {
  json out;
  out["v_plus"] = result.value.v_plus;
  out["v_minus"] = result.value.v_minus;
  out["v"] = result.value.v;
  out["strategy"] = strategy_to_json(tree, result.strategy);
  json region = json::object();
  for (const auto& [node, r] : result.region.radius) region[tree.node(node).id] = r;
  out["region"] = region;
  out["converged"] = result.converged;
  return out.dump(2) + "\n";
}

std::string to_json(const CurveResult& curve) {
  json out;
  json pts = json::array();
  for (const auto& p : curve.points) pts.push_back({{"z", p.z}, {"value", p.value}});
  out["points"] = pts;
  out["max_jump"] = curve.max_jump;
  out["nondecreasing"] = curve.nondecreasing;
  return out.dump(2) + "\n";
}

NAReport parse_na_report(const ScenarioTree& tree, const std::string& json_text) {
  const json root = parse_text(json_text);
  NAReport rep;
  rep.na = root.at("na").get<bool>();
  if (!root.at("witness").is_null()) {
    rep.witness = strategy_from_json(tree, root["witness"], "witness");
    for (const auto& [id, _] : root["witness"].items()) {
      rep.witness_node = tree.find(id);
      break;
    }
  }
  for (const auto& jn : root.at("nodes")) {
    NAReport::PerNode pn;
    pn.id = jn.at("node").get<std::string>();
    const auto idx = tree.find(pn.id);
    if (!idx) throw Error(errc::input, "report references unknown node '" + pn.id + "'");
    pn.node = *idx;
    pn.rank = jn.at("r").get<std::size_t>();
    if (!jn.at("beta").is_null()) pn.beta = jn["beta"].get<double>();
    if (!jn.at("kappa").is_null()) pn.kappa = jn["kappa"].get<double>();
    if (!jn.at("pi").is_null()) pn.pi = jn["pi"].get<double>();
    rep.nodes.push_back(pn);
  }
  return rep;
}

SolveResult parse_solve_report(const ScenarioTree& tree, const std::string& json_text) {
  const json root = parse_text(json_text);
  SolveResult res;
  res.value = root.at("value").get<double>();
  res.z = root.at("z").get<double>();
  res.strategy = strategy_from_json(tree, root.at("strategy"), "strategy");
  res.strategy_bounds.resize(tree.size());
  for (const auto& [id, per] : root.at("K").items()) {
    const auto idx = tree.find(id);
    if (!idx) throw Error(errc::input, "report references unknown node '" + id + "'");
    for (const auto& [n, k] : per.items())
      res.strategy_bounds[*idx][std::stol(n)] = k.get<double>();
  }
  const json& diag = root.at("diagnostics");
  res.diagnostics.grid_sizes = diag.at("grid_sizes").get<std::vector<std::size_t>>();
  res.diagnostics.refinement_delta = diag.at("refinement_delta").get<double>();
  res.diagnostics.attained = diag.at("attained").get<double>();
  res.diagnostics.grid_value = diag.at("grid_value").get<double>();
  res.diagnostics.consistency_gap = diag.at("consistency_gap").get<double>();
  res.diagnostics.exact_extraction = diag.at("exact_extraction").get<bool>();
  res.diagnostics.certified = diag.at("certified").get<bool>();
  return res;
}

CPTResult parse_cpt_report(const ScenarioTree& tree, const std::string& json_text) {
  const json root = parse_text(json_text);
  CPTResult res;
  res.value.v_plus = root.at("v_plus").get<double>();
  res.value.v_minus = root.at("v_minus").get<double>();
  res.value.v = root.at("v").get<double>();
  res.strategy = strategy_from_json(tree, root.at("strategy"), "strategy");
  for (const auto& [id, r] : root.at("region").items()) {
    const auto idx = tree.find(id);
    if (!idx) throw Error(errc::input, "report references unknown node '" + id + "'");
    res.region.radius[*idx] = r.get<double>();
  }
  res.converged = root.at("converged").get<bool>();
  return res;
}

CurveResult parse_curve_report(const std::string& json_text) {
  const json root = parse_text(json_text);
  CurveResult res;
  for (const auto& p : root.at("points"))
    res.points.push_back({p.at("z").get<double>(), p.at("value").get<double>()});
  res.max_jump = root.at("max_jump").get<double>();
  res.nondecreasing = root.at("nondecreasing").get<bool>();
  return res;
}

}  // namespace ncp
