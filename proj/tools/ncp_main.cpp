// ncp: no-arbitrage checks, expected-utility and CPT solves, and the
// negative-result demos, driven by JSON tree/preference files.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncp/cpt_solver.hpp"
#include "ncp/dp_solver.hpp"
#include "ncp/json_io.hpp"
#include "ncp/no_arbitrage.hpp"
#include "ncp/phenomena.hpp"
#include "ncp/tree.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitArbitrage = 2;
constexpr int kExitHypothesis = 3;

int exit_code_for(ncp::errc kind) {
  switch (kind) {
    case ncp::errc::arbitrage: return kExitArbitrage;
    case ncp::errc::hypothesis: return kExitHypothesis;
    default: return kExitInput;
  }
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) std::cout << content;
  else ncp::write_file(out_path, content);
}

ncp::TreeBundle load_valid_tree(const std::string& path) {
  ncp::TreeBundle bundle = ncp::parse_tree(ncp::read_file(path));
  const ncp::ValidationReport rep = ncp::validate_tree(bundle.tree);
  if (!rep.ok) {
    std::string msg = "tree '" + path + "' is invalid:";
    for (const auto& v : rep.violations) msg += "\n  " + v;
    throw ncp::Error(ncp::errc::input, msg);
  }
  return bundle;
}

ncp::Config make_config(const std::vector<std::string>& tol_overrides, unsigned long long seed) {
  ncp::Config cfg;
  cfg.seed = seed;
  if (const char* env = std::getenv("NCP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) cfg.threads = n;
  }
  for (const std::string& kv : tol_overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ncp::Error(ncp::errc::input, "--tol expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
  }
  return cfg;
}

std::vector<double> parse_z_range(const std::string& spec) {
  double a = 0.0, b = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(spec);
  if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
    throw ncp::Error(ncp::errc::input, "--z-range expects a:b:step with step > 0");
  std::vector<double> zs;
  for (double z = a; z <= b + 1e-12; z += step) zs.push_back(z);
  if (zs.empty()) throw ncp::Error(ncp::errc::input, "--z-range produced no samples");
  return zs;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  std::istringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw ncp::Error(ncp::errc::input, "expected a comma-separated integer list");
  return out;
}

std::string csv_pairs(const std::string& header, const std::vector<std::pair<double, double>>& rows) {
  std::ostringstream ss;
  ss.precision(17);
  ss << header << "\n";
  for (const auto& [a, b] : rows) ss << a << "," << b << "\n";
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite scenario-tree market solver: no-arbitrage bounds, "
               "non-concave expected-utility and CPT optimal investment"};
  app.require_subcommand(1);

  std::string tree_path, pref_path, out_path, z_range_spec;
  double z = 0.0;
  unsigned long long seed = 12345;
  std::vector<std::string> tol_overrides;

  auto add_common = [&](CLI::App* cmd, bool needs_pref) {
    cmd->add_option("--tree", tree_path, "tree JSON file")->required();
    if (needs_pref) cmd->add_option("--pref", pref_path, "preference JSON file")->required();
    cmd->add_option("--out", out_path, "output path (stdout when omitted)");
    cmd->add_option("--seed", seed, "search seed");
    cmd->add_option("--tol", tol_overrides, "numeric override key=value (repeatable)");
  };

  auto* cmd_check = app.add_subcommand("check-na", "decide (NA) and report beta/kappa/pi bounds");
  add_common(cmd_check, false);

  auto* cmd_solve = app.add_subcommand("solve", "optimal investment for the given preference");
  add_common(cmd_solve, true);
  cmd_solve->add_option("--z", z, "initial capital");

  auto* cmd_curve = app.add_subcommand("curve", "indirect utility over a range of capitals");
  add_common(cmd_curve, true);
  cmd_curve->add_option("--z-range", z_range_spec, "a:b:step")->required();

  auto* cmd_demo = app.add_subcommand("demo", "negative-result demos emitting CSV");
  std::string demo_name;
  std::string n_list = "1,2,4,8,16,32,64";
  int truncation = 4;
  double phi_max = 20.0, phi_step = 0.25, p_up = 0.5, floor_a = 0.5;
  cmd_demo->add_option("name", demo_name, "nonexistence | ladder | closedness")->required();
  cmd_demo->add_option("--out", out_path, "output path or prefix (stdout when omitted)");
  cmd_demo->add_option("--n", n_list, "comma-separated ladder indices");
  cmd_demo->add_option("--K", truncation, "market truncation depth");
  cmd_demo->add_option("--phi-max", phi_max, "sweep upper end");
  cmd_demo->add_option("--phi-step", phi_step, "sweep step");
  cmd_demo->add_option("--p-up", p_up, "up-move probability of the coin market");
  cmd_demo->add_option("--a", floor_a, "loss floor of the bounded-below utility");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }

  try {
    const ncp::Config cfg = make_config(tol_overrides, seed);

    if (cmd_check->parsed()) {
      const ncp::TreeBundle bundle = load_valid_tree(tree_path);
      ncp::NAReport report = ncp::check_na(bundle.tree, cfg);
      if (report.na) report = ncp::pi_bounds(bundle.tree, ncp::quantitative_na(bundle.tree, cfg));
      emit(out_path, ncp::to_json(bundle.tree, report));
      return report.na ? kExitOk : kExitArbitrage;
    }

    if (cmd_solve->parsed()) {
      const ncp::TreeBundle bundle = load_valid_tree(tree_path);
      const ncp::Preference pref = ncp::parse_preference(ncp::read_file(pref_path));
      if (pref.kind == ncp::Preference::Kind::eu) {
        const ncp::SolveResult res = ncp::solve(bundle.tree, pref, bundle.claim, z, cfg);
        emit(out_path, ncp::to_json(bundle.tree, res));
      } else {
        const ncp::CPTResult res = ncp::optimize_cpt(bundle.tree, pref.cpt, bundle.claim, z, cfg);
        emit(out_path, ncp::to_json(bundle.tree, res));
      }
      return kExitOk;
    }

    if (cmd_curve->parsed()) {
      const ncp::TreeBundle bundle = load_valid_tree(tree_path);
      const ncp::Preference pref = ncp::parse_preference(ncp::read_file(pref_path));
      const ncp::CurveResult curve = ncp::indirect_utility_curve(
          bundle.tree, pref, bundle.claim, parse_z_range(z_range_spec), cfg);
      emit(out_path, ncp::to_json(curve));
      return kExitOk;
    }

    if (cmd_demo->parsed()) {
      if (demo_name == "nonexistence") {
        std::vector<double> grid;
        for (double p = 0.0; p <= phi_max + 1e-12; p += phi_step) grid.push_back(p);
        const auto u = ncp::make_builtin_utility("bounded_below", {{"a", floor_a}});
        const ncp::DivergenceSweep sweep = ncp::nonexistence_sweep(p_up, u, grid);
        std::vector<std::pair<double, double>> rows;
        for (std::size_t i = 0; i < sweep.phis.size(); ++i)
          rows.emplace_back(sweep.phis[i], sweep.values[i]);
        emit(out_path, csv_pairs("phi,value", rows));
        return kExitOk;
      }
      if (demo_name == "ladder") {
        const auto rungs = ncp::weak_convergence_ladder(parse_int_list(n_list));
        std::vector<std::pair<double, double>> rows;
        for (const auto& r : rungs) rows.emplace_back(r.n, r.distance);
        emit(out_path, csv_pairs("n,distance", rows));
        return kExitOk;
      }
      if (demo_name == "closedness") {
        const ncp::ClosednessProbe probe =
            ncp::closedness_probe(truncation, parse_int_list(n_list));
        std::vector<std::pair<double, double>> dist_rows;
        for (const auto& [n, d] : probe.distances) dist_rows.emplace_back(n, d);
        std::ostringstream resid;
        resid.precision(17);
        resid << "candidate,k,c_k,residual,max_abs\n";
        for (const auto& row : probe.residuals)
          for (std::size_t k = 0; k < row.residuals.size(); ++k)
            resid << row.name << "," << (k + 1) << "," << row.moments[k] << ","
                  << row.residuals[k] << "," << row.max_abs << "\n";
        if (out_path.empty()) {
          std::cout << csv_pairs("n,distance", dist_rows) << resid.str();
        } else {
          ncp::write_file(out_path + "_distance.csv", csv_pairs("n,distance", dist_rows));
          ncp::write_file(out_path + "_residuals.csv", resid.str());
        }
        return kExitOk;
      }
      throw ncp::Error(ncp::errc::input, "unknown demo '" + demo_name + "'");
    }
  } catch (const ncp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
