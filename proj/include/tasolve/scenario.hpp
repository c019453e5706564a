#ifndef TASOLVE_SCENARIO_HPP_
#define TASOLVE_SCENARIO_HPP_

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tasolve/cost.hpp"
#include "tasolve/models.hpp"
#include "tasolve/network.hpp"
#include "tasolve/solvers.hpp"

namespace tasolve {

using Json = nlohmann::json;

/// One or more schema or semantic problems, each prefixed with a JSON
/// pointer to the offending value.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> errors)
      : Error(join(errors)), errors_(std::move(errors)) {}

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string s;
    for (const auto& e : errors) s += (s.empty() ? "" : "\n") + e;
    return s;
  }
  std::vector<std::string> errors_;
};

/// Rate breakpoints (start_s, rate_vph); each rate holds until the next start.
using DemandBreakpoints = std::vector<std::pair<double, double>>;

struct Scenario {
  std::string name;
  std::vector<std::string> notes;
  Network network;
  std::vector<DemandBreakpoints> demand;  // per OD, in file order
  ModelConfig model;
  SolverMethod method = SolverMethod::kFrankWolfe;
  SolverOptions options;
  std::vector<std::string> warnings;
};

/// Samples the piecewise-constant breakpoints at the left end of each step.
inline std::vector<double> expand_demand(const DemandBreakpoints& bp, TimeGrid grid) {
  std::vector<double> out(grid.steps, 0.0);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double t = grid.time_at(k);
    for (const auto& [start, rate] : bp) {
      if (start <= t + 1e-9 * grid.dt) out[k] = rate;
    }
  }
  return out;
}

inline std::string_view to_string(MergeRule m) {
  return m == MergeRule::kCapacityPriority ? "capacity_priority" : "demand_proportional";
}

inline std::optional<MergeRule> parse_merge_rule(std::string_view s) {
  if (s == "capacity_priority") return MergeRule::kCapacityPriority;
  if (s == "demand_proportional") return MergeRule::kDemandProportional;
  return std::nullopt;
}

/// Cross-field rules that the CLI must re-check after overrides.
inline std::vector<std::string> semantic_errors(const Scenario& sc) {
  std::vector<std::string> errors;
  if (auto e = config_error(sc.model); !e.empty()) errors.push_back("/cost_mode: " + e);
  if (sc.method == SolverMethod::kFrankWolfe && sc.model.model != TrafficModel::kStatic) {
    errors.push_back("/solver/method: FW requires static model");
  }
  if (sc.model.model != TrafficModel::kStatic) {
    const double dt = sc.network.time_grid().dt;
    for (std::size_t l = 0; l < sc.network.num_links(); ++l) {
      const Link& link = sc.network.links()[l];
      if (link.free_flow_speed_mps() * dt > link.length_m * (1.0 + 1e-12)) {
        errors.push_back("/network/links/" + std::to_string(l) +
                         ": CFL condition violated (free-flow speed * dt > length)");
      }
    }
  }
  const SolverOptions& o = sc.options;
  if (!(o.eps > 0)) errors.push_back("/solver/eps: must be positive");
  if (o.max_iters < 1) errors.push_back("/solver/max_iters: must be at least 1");
  if (!(o.tau0 > 0)) errors.push_back("/solver/tau0: must be positive");
  if (!(o.sigma > 0 && o.sigma < 1)) errors.push_back("/solver/sigma: must lie in (0, 1)");
  if (!(o.mu > 0 && o.mu < 1)) errors.push_back("/solver/mu: must lie in (0, 1)");
  if (o.msa_warmup_iters < 1) errors.push_back("/solver/msa_warmup_iters: must be at least 1");
  return errors;
}

namespace detail {

/// Strict reader: every access records a JSON-pointer-located error instead
/// of throwing, and unknown keys are reported.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& where, const std::string& what) {
    errors.push_back((where.empty() ? "/" : where) + ": " + what);
  }

  bool object(const Json& j, const std::string& where, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) {
      fail(where, "expected an object");
      return false;
    }
    for (const auto& [k, v] : j.items()) {
      bool known = false;
      for (auto key : keys) known = known || key == k;
      if (!known) fail(where + "/" + k, "unknown field");
    }
    return true;
  }

  const Json* field(const Json& j, const std::string& where, const char* key, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(where + "/" + key, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const Json& j, const std::string& where, const char* key,
                               bool required) {
    const Json* v = field(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      fail(where + "/" + key, "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<int> integer(const Json& j, const std::string& where, const char* key,
                             bool required) {
    const Json* v = field(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(where + "/" + key, "expected an integer");
      return std::nullopt;
    }
    return v->get<int>();
  }

  std::optional<std::string> string(const Json& j, const std::string& where, const char* key,
                                    bool required) {
    const Json* v = field(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(where + "/" + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  const Json* array(const Json& j, const std::string& where, const char* key, bool required) {
    const Json* v = field(j, where, key, required);
    if (v && !v->is_array()) {
      fail(where + "/" + key, "expected an array");
      return nullptr;
    }
    return v;
  }
};

}  // namespace detail

/// JSON pointer of the entity a network diagnostic refers to.
inline std::string diagnostic_pointer(const Network& net, const Diagnostic& d) {
  if (d.entity == "link") {
    const std::size_t l = net.link_index(d.id);
    if (l != kNoIndex) return "/network/links/" + std::to_string(l);
  }
  for (std::size_t w = 0; w < net.num_ods(); ++w) {
    const ODPair& od = net.ods()[w];
    const std::string at = "/ods/" + std::to_string(w);
    if (d.entity == "od" && od.id == d.id) return at;
    for (std::size_t i = 0; d.entity == "path" && i < od.paths.size(); ++i) {
      if (od.paths[i] == d.id) return at + "/paths/" + std::to_string(i);
    }
  }
  return "/" + d.entity + "/" + std::to_string(d.id);
}

/// Parses and validates a scenario document. Throws ScenarioError listing
/// every problem found.
inline Scenario parse_scenario(const Json& doc) {
  detail::Reader rd;
  Scenario sc;
  if (!rd.object(doc, "", {"name", "notes", "grid", "network", "ods", "model", "cost_mode",
                           "merge_rule", "solver"})) {
    throw ScenarioError(rd.errors);
  }
  sc.name = rd.string(doc, "", "name", false).value_or("scenario");
  if (const Json* notes = rd.array(doc, "", "notes", false)) {
    for (std::size_t i = 0; i < notes->size(); ++i) {
      if ((*notes)[i].is_string()) {
        sc.notes.push_back((*notes)[i].get<std::string>());
      } else {
        rd.fail("/notes/" + std::to_string(i), "expected a string");
      }
    }
  }

  TimeGrid grid;
  if (const Json* g = rd.field(doc, "", "grid", true); g && rd.object(*g, "/grid", {"dt_seconds", "horizon_seconds"})) {
    const auto dt = rd.number(*g, "/grid", "dt_seconds", true);
    const auto horizon = rd.number(*g, "/grid", "horizon_seconds", true);
    if (dt && horizon) {
      if (!(*dt > 0)) rd.fail("/grid/dt_seconds", "must be positive");
      if (!(*horizon > 0)) rd.fail("/grid/horizon_seconds", "must be positive");
      const double ratio = *horizon / *dt;
      if (*dt > 0 && std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        rd.fail("/grid/horizon_seconds", "must be an integer multiple of dt_seconds");
      }
      if (*dt > 0 && *horizon > 0) grid = {*dt, static_cast<std::size_t>(std::llround(ratio))};
    }
  }

  const std::string model_name = rd.string(doc, "", "model", true).value_or("static");
  const auto model = parse_traffic_model(model_name);
  if (!model) rd.fail("/model", "unknown model '" + model_name + "' (static|mn|ctm)");
  sc.model.model = model.value_or(TrafficModel::kStatic);
  const bool dynamic = sc.model.model != TrafficModel::kStatic;
  if (auto cm = rd.string(doc, "", "cost_mode", false)) {
    if (auto parsed = parse_cost_mode(*cm)) {
      sc.model.cost_mode = *parsed;
    } else {
      rd.fail("/cost_mode", "unknown cost mode '" + *cm + "' (bpr|instantaneous|actual)");
    }
  } else {
    sc.model.cost_mode = dynamic ? CostMode::kActual : CostMode::kBpr;
  }
  if (auto mr = rd.string(doc, "", "merge_rule", false)) {
    if (auto parsed = parse_merge_rule(*mr)) {
      sc.model.merge = *parsed;
    } else {
      rd.fail("/merge_rule", "unknown merge rule '" + *mr + "'");
    }
  }

  std::vector<Link> links;
  if (const Json* net = rd.field(doc, "", "network", true);
      net && rd.object(*net, "/network", {"links"})) {
    if (const Json* arr = rd.array(*net, "/network", "links", true)) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string at = "/network/links/" + std::to_string(i);
        const Json& j = (*arr)[i];
        if (!rd.object(j, at, {"id", "from_node", "to_node", "length_m", "capacity_vph",
                               "free_flow_speed_kph", "jam_density_vpkm", "bpr_gamma"})) {
          continue;
        }
        Link l;
        l.id = rd.integer(j, at, "id", true).value_or(0);
        l.from_node = rd.integer(j, at, "from_node", true).value_or(0);
        l.to_node = rd.integer(j, at, "to_node", true).value_or(0);
        l.length_m = rd.number(j, at, "length_m", true).value_or(0.0);
        l.capacity_vph = rd.number(j, at, "capacity_vph", true).value_or(0.0);
        l.free_flow_speed_kph = rd.number(j, at, "free_flow_speed_kph", true).value_or(0.0);
        l.jam_density_vpkm = rd.number(j, at, "jam_density_vpkm", false);
        if (!l.jam_density_vpkm) {
          l.jam_density_vpkm = kDefaultJamDensity;
          if (sc.model.model == TrafficModel::kCellTransmission) {
            sc.warnings.push_back(at + "/jam_density_vpkm: absent, using default 140 veh/km");
          }
        }
        l.bpr_gamma = rd.number(j, at, "bpr_gamma", false).value_or(0.15);
        links.push_back(l);
      }
    }
  }

  std::vector<ODPair> ods;
  std::vector<Path> paths;
  if (const Json* arr = rd.array(doc, "", "ods", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string at = "/ods/" + std::to_string(i);
      const Json& j = (*arr)[i];
      if (!rd.object(j, at, {"id", "origin_node", "destination_node", "demand", "paths"})) {
        continue;
      }
      ODPair od;
      od.id = rd.integer(j, at, "id", true).value_or(0);
      od.origin_node = rd.integer(j, at, "origin_node", true).value_or(0);
      od.destination_node = rd.integer(j, at, "destination_node", true).value_or(0);

      DemandBreakpoints bp;
      if (const Json* d = rd.array(j, at, "demand", true)) {
        double last = -1.0;
        for (std::size_t b = 0; b < d->size(); ++b) {
          const std::string bat = at + "/demand/" + std::to_string(b);
          const Json& e = (*d)[b];
          if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            rd.fail(bat, "expected [start_seconds, rate_vph]");
            continue;
          }
          const double start = e[0].get<double>();
          const double rate = e[1].get<double>();
          if (!(start >= 0)) rd.fail(bat, "start must be nonnegative");
          if (!(start > last)) rd.fail(bat, "breakpoints must be strictly increasing");
          if (!(rate >= 0) || !std::isfinite(rate)) rd.fail(bat, "demand must be nonnegative");
          last = start;
          bp.emplace_back(start, rate);
        }
      }
      od.demand = {expand_demand(bp, grid), grid.dt};
      sc.demand.push_back(std::move(bp));

      if (const Json* ps = rd.array(j, at, "paths", true)) {
        for (std::size_t p = 0; p < ps->size(); ++p) {
          const std::string pat = at + "/paths/" + std::to_string(p);
          const Json& pj = (*ps)[p];
          if (!rd.object(pj, pat, {"id", "links"})) continue;
          Path path;
          path.id = rd.integer(pj, pat, "id", true).value_or(0);
          path.od = od.id;
          if (const Json* ls = rd.array(pj, pat, "links", true)) {
            for (std::size_t q = 0; q < ls->size(); ++q) {
              if ((*ls)[q].is_number_integer()) {
                path.links.push_back((*ls)[q].get<int>());
              } else {
                rd.fail(pat + "/links/" + std::to_string(q), "expected an integer link id");
              }
            }
          }
          od.paths.push_back(path.id);
          paths.push_back(std::move(path));
        }
      }
      ods.push_back(std::move(od));
    }
  }

  if (const Json* s = rd.field(doc, "", "solver", false);
      s && rd.object(*s, "/solver", {"method", "eps", "max_iters", "tau0", "sigma", "mu",
                                     "msa_warmup_iters"})) {
    if (auto m = rd.string(*s, "/solver", "method", false)) {
      if (auto parsed = parse_solver_method(*m)) {
        sc.method = *parsed;
      } else {
        rd.fail("/solver/method", "unknown method '" + *m + "' (fw|msa|epm|msa_then_epm)");
      }
    } else {
      sc.method = dynamic ? SolverMethod::kMsaThenEpm : SolverMethod::kFrankWolfe;
    }
    SolverOptions& o = sc.options;
    o.eps = rd.number(*s, "/solver", "eps", false).value_or(o.eps);
    o.max_iters = rd.integer(*s, "/solver", "max_iters", false).value_or(o.max_iters);
    o.tau0 = rd.number(*s, "/solver", "tau0", false).value_or(o.tau0);
    o.sigma = rd.number(*s, "/solver", "sigma", false).value_or(o.sigma);
    o.mu = rd.number(*s, "/solver", "mu", false).value_or(o.mu);
    o.msa_warmup_iters =
        rd.integer(*s, "/solver", "msa_warmup_iters", false).value_or(o.msa_warmup_iters);
  } else {
    sc.method = dynamic ? SolverMethod::kMsaThenEpm : SolverMethod::kFrankWolfe;
  }

  if (!rd.errors.empty()) throw ScenarioError(rd.errors);

  sc.network = Network(std::move(links), std::move(ods), std::move(paths));
  for (const Diagnostic& d : validate(sc.network)) {
    if (d.severity == Severity::kError) {
      rd.fail(diagnostic_pointer(sc.network, d), d.message);
    } else {
      sc.warnings.push_back(diagnostic_pointer(sc.network, d) + ": " + d.message);
    }
  }
  for (auto& e : semantic_errors(sc)) rd.errors.push_back(std::move(e));
  if (!rd.errors.empty()) throw ScenarioError(rd.errors);
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError({"/: cannot open " + file.string()});
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ScenarioError({std::string("/: parse error: ") + e.what()});
  }
  Scenario sc = parse_scenario(doc);
  if (sc.name == "scenario") sc.name = file.stem().string();
  return sc;
}

/// Effective configuration, defaults included; parse_scenario() of the
/// result reproduces the scenario.
inline Json to_json(const Scenario& sc) {
  Json links = Json::array();
  for (const Link& l : sc.network.links()) {
    links.push_back({{"id", l.id},
                     {"from_node", l.from_node},
                     {"to_node", l.to_node},
                     {"length_m", l.length_m},
                     {"capacity_vph", l.capacity_vph},
                     {"free_flow_speed_kph", l.free_flow_speed_kph},
                     {"jam_density_vpkm", l.jam_density_vpkm.value_or(kDefaultJamDensity)},
                     {"bpr_gamma", l.bpr_gamma}});
  }
  Json ods = Json::array();
  for (std::size_t w = 0; w < sc.network.num_ods(); ++w) {
    const ODPair& od = sc.network.ods()[w];
    Json paths = Json::array();
    for (std::size_t p : sc.network.od_paths(w)) {
      paths.push_back({{"id", sc.network.paths()[p].id}, {"links", sc.network.paths()[p].links}});
    }
    Json demand = Json::array();
    if (w < sc.demand.size()) {
      for (const auto& [start, rate] : sc.demand[w]) demand.push_back({start, rate});
    }
    ods.push_back({{"id", od.id},
                   {"origin_node", od.origin_node},
                   {"destination_node", od.destination_node},
                   {"demand", demand},
                   {"paths", paths}});
  }
  const TimeGrid grid = sc.network.time_grid();
  const SolverOptions& o = sc.options;
  return {{"name", sc.name},
          {"grid", {{"dt_seconds", grid.dt}, {"horizon_seconds", grid.horizon()}}},
          {"network", {{"links", links}}},
          {"ods", ods},
          {"model", to_string(sc.model.model)},
          {"cost_mode", to_string(sc.model.cost_mode)},
          {"merge_rule", to_string(sc.model.merge)},
          {"solver",
           {{"method", to_string(sc.method)},
            {"eps", o.eps},
            {"max_iters", o.max_iters},
            {"tau0", o.tau0},
            {"sigma", o.sigma},
            {"mu", o.mu},
            {"msa_warmup_iters", o.msa_warmup_iters}}}};
}

}  // namespace tasolve

#endif  // TASOLVE_SCENARIO_HPP_
