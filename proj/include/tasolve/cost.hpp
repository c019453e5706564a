#ifndef TASOLVE_COST_HPP_
#define TASOLVE_COST_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "tasolve/assignment.hpp"
#include "tasolve/models.hpp"
#include "tasolve/network.hpp"

namespace tasolve {

enum class CostMode { kBpr, kInstantaneous, kActual };

/// BPR volume-delay function, seconds. `flow` in veh/h.
inline double bpr(double flow, const Link& link) {
  if (flow < 0.0) throw Error("BPR: negative flow on link " + std::to_string(link.id));
  const double r = flow / link.capacity_vph;
  const double r2 = r * r;
  return link.free_flow_time() * (1.0 + link.bpr_gamma * r2 * r2);
}

/// Integral of bpr() from 0 to `flow`: the link's Beckmann potential term.
inline double bpr_integral(double flow, const Link& link) {
  const double r = flow / link.capacity_vph;
  const double r4 = r * r * r * r;
  return link.free_flow_time() * (flow + link.bpr_gamma * flow * r4 / 5.0);
}

inline PathCosts free_flow_costs(const Network& net) {
  const TimeGrid grid = net.time_grid();
  PathCosts c(net.num_paths(), grid.steps, grid.dt);
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    const double t0 = net.free_flow_path_time(p);
    for (std::size_t k = 0; k < grid.steps; ++k) c(p, k) = t0;
  }
  return c;
}

inline PathCosts static_path_costs(const DemandAssignment& h, const Network& net,
                                   const IncidenceMatrix& delta) {
  const Grid flows = static_flows(h, delta);
  PathCosts c(h.paths(), h.steps(), h.dt);
  for (std::size_t k = 0; k < h.steps(); ++k) {
    for (std::size_t p = 0; p < h.paths(); ++p) {
      double sum = 0.0;
      // Clamp -0.0 and rounding noise from projections to zero.
      for (std::size_t l : net.path_links(p)) {
        sum += bpr(std::max(flows(l, k), 0.0), net.links()[l]);
      }
      c(p, k) = sum;
    }
  }
  return c;
}

inline PathCosts static_path_costs(const DemandAssignment& h, const Network& net) {
  return static_path_costs(h, net, build_incidence(net));
}

/// Beckmann objective dt * sum_k sum_l integral_0^{f_l(k)} tau_l(u) du.
inline double beckmann_objective(const DemandAssignment& h, const Network& net) {
  const Grid flows = static_flows(h, build_incidence(net));
  double total = 0.0;
  for (std::size_t l = 0; l < flows.rows(); ++l)
    for (std::size_t k = 0; k < flows.cols(); ++k)
      total += bpr_integral(std::max(flows(l, k), 0.0), net.links()[l]);
  return total * h.dt;
}

/// tau = dt * x / f, seconds; free-flow time when x or f is zero, and never
/// below it. `outflow` is vehicles discharged over the step.
inline double link_travel_time(double vehicles, double outflow, double free_flow_time,
                               double dt) {
  if (vehicles <= 0.0 || outflow <= 0.0) return free_flow_time;
  return std::max(free_flow_time, dt * vehicles / outflow);
}

/// tau_l(k) for every link and step of a loaded trajectory.
inline Grid link_travel_times(const StateTrajectory& traj, const Network& net) {
  Grid tau(traj.links(), traj.steps());
  for (std::size_t l = 0; l < traj.links(); ++l) {
    const double t0 = net.links()[l].free_flow_time();
    for (std::size_t k = 0; k < traj.steps(); ++k) {
      tau(l, k) = link_travel_time(traj.link_occupancy(l, k), traj.link_outflow(l, k), t0,
                                   traj.dt());
    }
  }
  return tau;
}

inline PathCosts instantaneous_path_costs(const StateTrajectory& traj, const Network& net) {
  const Grid tau = link_travel_times(traj, net);
  PathCosts c(net.num_paths(), traj.steps(), traj.dt());
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    for (std::size_t k = 0; k < traj.steps(); ++k) {
      double sum = 0.0;
      for (std::size_t l : net.path_links(p)) sum += tau(l, k);
      c(p, k) = sum;
    }
  }
  return c;
}

/// Travel time of link l entered at time t (seconds), linearly interpolated
/// between grid instants and held at the last value past the horizon.
inline double travel_time_at(const Grid& tau, std::size_t l, double t, double dt) {
  const std::size_t n = tau.cols();
  const double s = t / dt;
  if (s <= 0.0) return tau(l, 0);
  if (s >= static_cast<double>(n - 1)) return tau(l, n - 1);
  const auto i = static_cast<std::size_t>(s);
  const double frac = s - static_cast<double>(i);
  return (1.0 - frac) * tau(l, i) + frac * tau(l, i + 1);
}

/// Experienced travel time: walk the path advancing a clock by each link's
/// travel time at the moment the vehicle enters it.
inline PathCosts actual_path_costs(const StateTrajectory& traj, const Network& net) {
  const Grid tau = link_travel_times(traj, net);
  const double dt = traj.dt();
  PathCosts c(net.num_paths(), traj.steps(), dt);
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    for (std::size_t k = 0; k < traj.steps(); ++k) {
      const double depart = dt * static_cast<double>(k);
      double clock = depart;
      for (std::size_t l : net.path_links(p)) clock += travel_time_at(tau, l, clock, dt);
      c(p, k) = clock - depart;
    }
  }
  return c;
}

struct ModelConfig {
  TrafficModel model = TrafficModel::kStatic;
  CostMode cost_mode = CostMode::kBpr;
  MergeRule merge = MergeRule::kCapacityPriority;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline std::string_view to_string(TrafficModel m) {
  switch (m) {
    case TrafficModel::kStatic: return "static";
    case TrafficModel::kMerchantNemhauser: return "mn";
    case TrafficModel::kCellTransmission: return "ctm";
  }
  return "?";
}

inline std::string_view to_string(CostMode m) {
  switch (m) {
    case CostMode::kBpr: return "bpr";
    case CostMode::kInstantaneous: return "instantaneous";
    case CostMode::kActual: return "actual";
  }
  return "?";
}

inline std::optional<TrafficModel> parse_traffic_model(std::string_view s) {
  if (s == "static") return TrafficModel::kStatic;
  if (s == "mn") return TrafficModel::kMerchantNemhauser;
  if (s == "ctm") return TrafficModel::kCellTransmission;
  return std::nullopt;
}

inline std::optional<CostMode> parse_cost_mode(std::string_view s) {
  if (s == "bpr") return CostMode::kBpr;
  if (s == "instantaneous") return CostMode::kInstantaneous;
  if (s == "actual" || s == "predictive") return CostMode::kActual;
  return std::nullopt;
}

/// Empty string when the combination is usable.
inline std::string config_error(const ModelConfig& cfg) {
  const bool is_static = cfg.model == TrafficModel::kStatic;
  if (is_static && cfg.cost_mode != CostMode::kBpr) {
    return "static model requires the bpr cost mode";
  }
  if (!is_static && cfg.cost_mode == CostMode::kBpr) {
    return "dynamic models require the instantaneous or actual cost mode";
  }
  return {};
}

/// The map F from demand assignments to path costs: network loading (or
/// static flows) composed with link travel times summed along each path.
/// Immutable once built; evaluate() has no hidden state.
class ModelManager {
 public:
  ModelManager(const Network& net, ModelConfig cfg)
      : net_(&net), cfg_(cfg), delta_(build_incidence(net)) {
    if (auto err = config_error(cfg); !err.empty()) throw Error(err);
    if (cfg.model != TrafficModel::kStatic) {
      const SupplyRule rule = cfg.model == TrafficModel::kCellTransmission
                                  ? SupplyRule::kCellTransmission
                                  : SupplyRule::kConstantCapacity;
      loader_.emplace(net, rule, net.time_grid().dt, cfg.merge);
    }
  }

  const Network& network() const { return *net_; }
  const ModelConfig& config() const { return cfg_; }
  bool is_dynamic() const { return loader_.has_value(); }

  /// Network loading; only for dynamic models.
  StateTrajectory load(const DemandAssignment& h) const {
    if (!loader_) throw Error("the static model has no network loading");
    return loader_->run(h);
  }

  PathCosts evaluate(const DemandAssignment& h) const {
    check_dimensions(h, *net_);
    if (!loader_) return static_path_costs(h, *net_, delta_);
    const StateTrajectory traj = loader_->run(h);
    return cfg_.cost_mode == CostMode::kActual ? actual_path_costs(traj, *net_)
                                               : instantaneous_path_costs(traj, *net_);
  }

  PathCosts operator()(const DemandAssignment& h) const { return evaluate(h); }

 private:
  const Network* net_;
  ModelConfig cfg_;
  IncidenceMatrix delta_;
  std::optional<NetworkLoader> loader_;
};

inline PathCosts evaluate_F(const DemandAssignment& h, const Network& net, ModelConfig cfg) {
  return ModelManager(net, cfg).evaluate(h);
}

}  // namespace tasolve

#endif  // TASOLVE_COST_HPP_
