// Command-line front end.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tasolve/run.hpp"
#include "tasolve/scenario.hpp"

namespace {

using namespace tasolve;

void print_warnings(const Scenario& sc) {
  for (const auto& w : sc.warnings) std::cerr << "warning: " << sc.name << ": " << w << "\n";
}

int report_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitInputError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-based dynamic traffic assignment solver"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir = "out";
  Overrides ov;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one scenario for a user equilibrium");
  solve_cmd->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  solve_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  solve_cmd->add_option("--eps", ov.eps, "Relative-gap tolerance");
  solve_cmd->add_option("--max-iters", ov.max_iters, "Iteration budget");
  solve_cmd->add_option("--model", ov.model, "static | mn | ctm");
  solve_cmd->add_option("--cost-mode", ov.cost_mode, "bpr | instantaneous | actual");
  solve_cmd->add_option("--solver", ov.solver, "fw | msa | epm | msa_then_epm");

  std::vector<std::string> member_files;
  std::string ref_model = "ctm";
  std::string ref_cost_mode = "actual";
  auto* compare_cmd =
      app.add_subcommand("compare", "Measure each solution's distance from a reference equilibrium");
  compare_cmd->add_option("--scenario", member_files, "Scenario JSON file (repeatable)")
      ->required();
  compare_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  compare_cmd->add_option("--ref-model", ref_model, "mn | ctm")->capture_default_str();
  compare_cmd->add_option("--ref-cost-mode", ref_cost_mode, "instantaneous | actual")
      ->capture_default_str();

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file and exit");
  validate_cmd->add_option("--scenario", scenario_file, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  if (*validate_cmd) {
    try {
      const Scenario sc = load_scenario(scenario_file);
      print_warnings(sc);
      std::cout << sc.name << ": ok (" << sc.network.num_links() << " links, "
                << sc.network.num_ods() << " ODs, " << sc.network.num_paths() << " paths, "
                << sc.network.time_grid().steps << " steps)\n";
      return kExitConverged;
    } catch (const std::exception& e) {
      return report_error(e);
    }
  }

  if (*solve_cmd) {
    Scenario sc;
    Json overrides;
    try {
      sc = load_scenario(scenario_file);
      overrides = apply_overrides(sc, ov);
    } catch (const std::exception& e) {
      return report_error(e);
    }
    print_warnings(sc);
    try {
      const RunResult r = run_scenario(sc);
      write_run(out_dir, sc, r, overrides);
      std::cout << sc.name << ": " << to_string(r.report.termination) << " after "
                << r.report.iterations.size() << " iterations, gap "
                << format_double(r.report.final_gap()) << "\n";
      return r.exit_code();
    } catch (const std::exception& e) {
      return report_error(e);
    }
  }

  std::vector<Scenario> members;
  ModelConfig reference;
  try {
    for (const auto& f : member_files) {
      members.push_back(load_scenario(f));
      print_warnings(members.back());
    }
    const auto m = parse_traffic_model(ref_model);
    const auto c = parse_cost_mode(ref_cost_mode);
    if (!m) throw Error("--ref-model: unknown model '" + ref_model + "'");
    if (!c) throw Error("--ref-cost-mode: unknown cost mode '" + ref_cost_mode + "'");
    reference = {*m, *c, members.front().model.merge};
  } catch (const std::exception& e) {
    return report_error(e);
  }
  try {
    const Comparison cmp = compare(members, reference);
    write_comparison(out_dir, members, cmp);
    bool all_converged = cmp.reference_solution.converged;
    for (const auto& e : cmp.entries) {
      std::cout << e.name << ": integrated D " << format_double(e.integrated_flow)
                << ", integrated Dx " << format_double(e.integrated_state) << "\n";
      all_converged = all_converged && e.run.report.converged;
    }
    return all_converged ? kExitConverged : kExitNotConverged;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}
