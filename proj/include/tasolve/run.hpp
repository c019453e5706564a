#ifndef TASOLVE_RUN_HPP_
#define TASOLVE_RUN_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <future>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tasolve/cost.hpp"
#include "tasolve/io.hpp"
#include "tasolve/metrics.hpp"
#include "tasolve/scenario.hpp"
#include "tasolve/solvers.hpp"

namespace tasolve {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

/// Command-line values that replace scenario-file values.
struct Overrides {
  std::optional<double> eps;
  std::optional<int> max_iters;
  std::optional<std::string> model;
  std::optional<std::string> cost_mode;
  std::optional<std::string> solver;
};

/// Applies `ov` to `sc` and returns the provenance record written to
/// report.json. Throws ScenarioError on unknown names or an incompatible
/// result.
inline Json apply_overrides(Scenario& sc, const Overrides& ov) {
  Json record = Json::array();
  std::vector<std::string> errors;
  auto note = [&](const char* flag, const Json& from, const Json& to) {
    record.push_back({{"flag", flag}, {"file_value", from}, {"value", to}});
  };
  if (ov.eps) {
    note("--eps", sc.options.eps, *ov.eps);
    sc.options.eps = *ov.eps;
  }
  if (ov.max_iters) {
    note("--max-iters", sc.options.max_iters, *ov.max_iters);
    sc.options.max_iters = *ov.max_iters;
  }
  if (ov.model) {
    if (auto m = parse_traffic_model(*ov.model)) {
      note("--model", to_string(sc.model.model), *ov.model);
      sc.model.model = *m;
    } else {
      errors.push_back("--model: unknown model '" + *ov.model + "'");
    }
  }
  if (ov.cost_mode) {
    if (auto m = parse_cost_mode(*ov.cost_mode)) {
      note("--cost-mode", to_string(sc.model.cost_mode), *ov.cost_mode);
      sc.model.cost_mode = *m;
    } else {
      errors.push_back("--cost-mode: unknown cost mode '" + *ov.cost_mode + "'");
    }
  }
  if (ov.solver) {
    if (auto m = parse_solver_method(*ov.solver)) {
      note("--solver", to_string(sc.method), *ov.solver);
      sc.method = *m;
    } else {
      errors.push_back("--solver: unknown method '" + *ov.solver + "'");
    }
  }
  if (errors.empty()) errors = semantic_errors(sc);
  if (!errors.empty()) throw ScenarioError(errors);
  return record;
}

struct RunResult {
  SolverReport report;
  std::optional<StateTrajectory> trajectory;  // dynamic models only
  std::vector<double> d_wardrop_flow;
  double wall_ms = 0.0;

  int exit_code() const { return report.converged ? kExitConverged : kExitNotConverged; }
};

inline RunResult run_scenario(const Scenario& sc) {
  const auto start = std::chrono::steady_clock::now();
  const ModelManager F(sc.network, sc.model);
  RunResult r;
  r.report = solve(F, sc.method, sc.options);
  if (F.is_dynamic()) r.trajectory = F.load(r.report.final_assignment);
  r.d_wardrop_flow = wardrop_distance_flow(r.report.final_assignment, r.report.final_costs,
                                           sc.network);
  r.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline Json report_json(const Scenario& sc, const RunResult& r, const Json& overrides) {
  return {{"converged", r.report.converged},
          {"gap", r.report.final_gap()},
          {"iterations", r.report.iterations.size()},
          {"termination", to_string(r.report.termination)},
          {"wall_ms", r.wall_ms},
          {"config", to_json(sc)},
          {"overrides", overrides},
          {"warnings", sc.warnings}};
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("cannot create output directory " + dir.string());
  }
}

inline void write_run(const std::filesystem::path& dir, const Scenario& sc, const RunResult& r,
                      const Json& overrides = Json::array()) {
  ensure_directory(dir);
  const SolverReport& rep = r.report;
  write_file_atomic(dir / "assignment.csv", assignment_csv(rep.final_assignment, sc.network));
  write_file_atomic(dir / "path_costs.csv", path_costs_csv(rep.final_costs, sc.network));
  if (r.trajectory) write_file_atomic(dir / "state.csv", state_csv(*r.trajectory, sc.network));
  write_file_atomic(dir / "iterations.csv", iterations_csv(rep.iterations));
  write_file_atomic(dir / "metrics.csv", metrics_csv(r.d_wardrop_flow, {}));
  write_file_atomic(dir / "report.json", report_json(sc, r, overrides).dump(2) + "\n");
}

/// Distances of one member's solution from equilibrium under the reference
/// model.
struct ComparisonEntry {
  std::string name;
  ModelConfig model;
  RunResult run;
  std::vector<double> d_wardrop_flow;   // per step
  std::vector<double> d_wardrop_state;  // per instant 0..steps
  double integrated_flow = 0.0;
  double integrated_state = 0.0;
};

struct Comparison {
  ModelConfig reference;
  SolverReport reference_solution;
  std::vector<ComparisonEntry> entries;
};

inline bool same_network(const Network& a, const Network& b) {
  if (a.num_links() != b.num_links() || a.num_paths() != b.num_paths() ||
      a.num_ods() != b.num_ods()) {
    return false;
  }
  for (std::size_t p = 0; p < a.num_paths(); ++p) {
    if (a.paths()[p].id != b.paths()[p].id || a.path_links(p) != b.path_links(p)) return false;
  }
  for (std::size_t w = 0; w < a.num_ods(); ++w) {
    if (a.ods()[w].demand.values != b.ods()[w].demand.values) return false;
  }
  const TimeGrid ga = a.time_grid();
  const TimeGrid gb = b.time_grid();
  return ga.dt == gb.dt && ga.steps == gb.steps;
}

/// Solves every member (concurrently), computes the reference equilibrium
/// and evaluates each member's assignment under the reference model. The
/// reference model must be dynamic so that state trajectories exist.
inline Comparison compare(const std::vector<Scenario>& members, ModelConfig reference) {
  if (members.empty()) throw Error("compare needs at least one scenario");
  if (reference.model == TrafficModel::kStatic) {
    throw Error("the reference model must be dynamic (mn or ctm)");
  }
  if (auto e = config_error(reference); !e.empty()) throw Error("reference: " + e);
  const Network& net = members.front().network;
  for (const Scenario& sc : members) {
    if (!same_network(net, sc.network)) {
      throw Error("scenario '" + sc.name + "' does not share the network and grid of '" +
                  members.front().name + "'");
    }
  }

  std::vector<std::future<RunResult>> runs;
  for (const Scenario& sc : members) {
    runs.push_back(std::async(std::launch::async, [&sc] { return run_scenario(sc); }));
  }

  Comparison out;
  out.reference = reference;
  std::set<std::string> names;
  for (std::size_t i = 0; i < members.size(); ++i) {
    ComparisonEntry e;
    e.name = members[i].name;
    while (!names.insert(e.name).second) e.name += "_" + std::to_string(i);
    e.model = members[i].model;
    e.run = runs[i].get();
    out.entries.push_back(std::move(e));
  }

  const ModelManager F(net, reference);
  std::optional<SolverReport> ref_solution;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].model == reference) {
      ref_solution = out.entries[i].run.report;
      break;
    }
  }
  if (!ref_solution) {
    const Scenario& base = members.front();
    const SolverMethod m =
        base.method == SolverMethod::kFrankWolfe ? SolverMethod::kMsaThenEpm : base.method;
    ref_solution = solve(F, m, base.options);
  }
  out.reference_solution = std::move(*ref_solution);
  const StateTrajectory ref_traj = F.load(out.reference_solution.final_assignment);
  const double dt = net.time_grid().dt;

  for (ComparisonEntry& e : out.entries) {
    const DemandAssignment& h = e.run.report.final_assignment;
    e.d_wardrop_flow = wardrop_distance_flow(h, F(h), net);
    e.d_wardrop_state = wardrop_distance_state(F.load(h), ref_traj);
    e.integrated_flow = time_integral(e.d_wardrop_flow, dt);
    e.integrated_state =
        time_integral(std::span<const double>(e.d_wardrop_state).first(h.steps()), dt);
  }
  return out;
}

inline std::string comparison_csv(const Comparison& cmp) {
  std::string out = "solution,timestep,d_wardrop_flow,d_wardrop_state\n";
  for (const ComparisonEntry& e : cmp.entries) {
    for (std::size_t k = 0; k < e.d_wardrop_flow.size(); ++k) {
      out += e.name + ',' + std::to_string(k) + ',' + format_double(e.d_wardrop_flow[k]) + ',' +
             format_double(e.d_wardrop_state[k]) + '\n';
    }
  }
  return out;
}

inline std::string summary_csv(const Comparison& cmp) {
  std::string out =
      "solution,model,cost_mode,converged,gap,integrated_d_wardrop_flow,"
      "integrated_d_wardrop_state\n";
  for (const ComparisonEntry& e : cmp.entries) {
    out += e.name + ',' + std::string(to_string(e.model.model)) + ',' +
           std::string(to_string(e.model.cost_mode)) + ',' +
           (e.run.report.converged ? "true" : "false") + ',' +
           format_double(e.run.report.final_gap()) + ',' + format_double(e.integrated_flow) +
           ',' + format_double(e.integrated_state) + '\n';
  }
  return out;
}

/// Distance tables plus each member's assignment and own-model path costs.
inline void write_comparison(const std::filesystem::path& dir, const std::vector<Scenario>& members,
                             const Comparison& cmp) {
  ensure_directory(dir);
  write_file_atomic(dir / "comparison.csv", comparison_csv(cmp));
  write_file_atomic(dir / "summary.csv", summary_csv(cmp));
  Json solutions = Json::array();
  for (std::size_t i = 0; i < cmp.entries.size(); ++i) {
    const ComparisonEntry& e = cmp.entries[i];
    const Network& net = members[i].network;
    write_file_atomic(dir / (e.name + "_assignment.csv"),
                      assignment_csv(e.run.report.final_assignment, net));
    write_file_atomic(dir / (e.name + "_path_costs.csv"),
                      path_costs_csv(e.run.report.final_costs, net));
    solutions.push_back({{"name", e.name},
                         {"converged", e.run.report.converged},
                         {"gap", e.run.report.final_gap()},
                         {"iterations", e.run.report.iterations.size()},
                         {"wall_ms", e.run.wall_ms},
                         {"config", to_json(members[i])}});
  }
  const Json report = {
      {"reference",
       {{"model", to_string(cmp.reference.model)},
        {"cost_mode", to_string(cmp.reference.cost_mode)},
        {"merge_rule", to_string(cmp.reference.merge)},
        {"converged", cmp.reference_solution.converged},
        {"gap", cmp.reference_solution.final_gap()}}},
      {"solutions", solutions}};
  write_file_atomic(dir / "report.json", report.dump(2) + "\n");
}

}  // namespace tasolve

#endif  // TASOLVE_RUN_HPP_
