#ifndef TASOLVE_MODELS_HPP_
#define TASOLVE_MODELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tasolve/assignment.hpp"
#include "tasolve/grid.hpp"
#include "tasolve/network.hpp"

namespace tasolve {

enum class TrafficModel { kStatic, kMerchantNemhauser, kCellTransmission };

inline constexpr double kDefaultJamDensity = 140.0;  // veh/km

/// f(t) = Delta * h(t) for every timestep. Rows: links, cols: timesteps (veh/h).
inline Grid static_flows(const DemandAssignment& h, const IncidenceMatrix& delta) {
  if (h.paths() != delta.paths()) throw Error("assignment does not match incidence matrix");
  Grid f(delta.links(), h.steps());
  for (std::size_t l = 0; l < delta.links(); ++l) {
    for (std::size_t p = 0; p < delta.paths(); ++p) {
      if (!delta(l, p)) continue;
      for (std::size_t k = 0; k < h.steps(); ++k) f(l, k) += h(p, k);
    }
  }
  return f;
}

/// Triangular fundamental diagram of a single-cell link, expressed in
/// vehicles per timestep.
///
///   D(x) = min(v dt / L * x, qmax dt)
///   S(X) = min(w dt / L * (xjam - X), qmax dt)
///
/// with xjam = jam density * L and w the congestion wave speed. An infinite
/// jam density makes S constant at qmax dt, which is the Merchant-Nemhauser
/// supply.
struct FundamentalDiagram {
  double length_m = 0.0;
  double capacity_vph = 0.0;
  double free_flow_speed_kph = 0.0;
  double jam_density_vpkm = kDefaultJamDensity;

  static FundamentalDiagram of(const Link& link) {
    return {link.length_m, link.capacity_vph, link.free_flow_speed_kph,
            link.jam_density_vpkm.value_or(kDefaultJamDensity)};
  }

  double critical_density() const { return capacity_vph / free_flow_speed_kph; }
  /// km/h; zero for an infinite jam density.
  double congestion_wave_speed_kph() const {
    if (std::isinf(jam_density_vpkm)) return 0.0;
    return capacity_vph / (jam_density_vpkm - critical_density());
  }
  /// Vehicles.
  double jam_occupancy() const { return jam_density_vpkm * length_m / 1000.0; }
  /// Vehicles per step.
  double capacity_per_step(double dt) const { return capacity_vph * dt / 3600.0; }

  double demand(double x, double dt) const {
    const double v = free_flow_speed_kph / 3.6;
    return std::min(v * dt / length_m * x, capacity_per_step(dt));
  }

  double supply(double occupancy, double dt) const {
    if (std::isinf(jam_density_vpkm)) return capacity_per_step(dt);
    const double w = congestion_wave_speed_kph() / 3.6;
    const double s = w * dt / length_m * (jam_occupancy() - occupancy);
    return std::clamp(s, 0.0, capacity_per_step(dt));
  }
};

/// Link supply rule: full CTM, or Merchant-Nemhauser constant capacity.
enum class SupplyRule { kCellTransmission, kConstantCapacity };

/// How a receiver short of supply shares it among the senders requesting it.
///
/// kDemandProportional: every sender gets supply * request / total request.
/// kCapacityPriority: senders are weighted by capacity; a sender requesting
/// less than its weighted share is served in full and the remainder is
/// re-shared among the others.
enum class MergeRule { kDemandProportional, kCapacityPriority };

/// Node flow for a one-to-one node.
inline double one_to_one_node_flow(std::span<const double> upstream_path_demands,
                                   double downstream_supply) {
  const double total = std::accumulate(upstream_path_demands.begin(),
                                       upstream_path_demands.end(), 0.0);
  return std::min(total, downstream_supply);
}

/// Splits `flow` across paths in proportion to their occupancy (FIFO).
inline std::vector<double> fifo_split(double flow, std::span<const double> occupancy) {
  const double total = std::accumulate(occupancy.begin(), occupancy.end(), 0.0);
  std::vector<double> out(occupancy.size(), 0.0);
  if (total <= 0.0 || flow <= 0.0) return out;
  for (std::size_t i = 0; i < occupancy.size(); ++i) out[i] = flow * occupancy[i] / total;
  return out;
}

/// Network state at one instant.
struct LoadingState {
  Grid x;                     // (link, path) vehicles
  std::vector<double> queue;  // per path, vehicles waiting at the origin

  static LoadingState empty(std::size_t links, std::size_t paths) {
    return {Grid(links, paths), std::vector<double>(paths, 0.0)};
  }
};

/// Flows over one step, in vehicles.
struct StepFlows {
  Grid inflow;                 // (link, path)
  Grid outflow;                // (link, path)
  std::vector<double> exited;  // per path, into the destination
};

/// Path-segregated link occupancies and flows over [0, T].
///
/// Snapshots x are stored for k = 0..steps (steps + 1 instants); flows for
/// each of the `steps` intervals. x(k+1) = x(k) + inflow(k) - outflow(k).
class StateTrajectory {
 public:
  StateTrajectory() = default;
  StateTrajectory(std::size_t links, std::size_t paths, std::size_t steps, double dt)
      : links_(links),
        paths_(paths),
        steps_(steps),
        dt_(dt),
        x_((steps + 1) * links * paths, 0.0),
        inflow_(steps * links * paths, 0.0),
        outflow_(steps * links * paths, 0.0),
        queue_((steps + 1) * paths, 0.0),
        entered_(steps + 1, 0.0),
        exited_(steps + 1, 0.0) {}

  std::size_t links() const { return links_; }
  std::size_t paths() const { return paths_; }
  std::size_t steps() const { return steps_; }
  double dt() const { return dt_; }

  double vehicles(std::size_t l, std::size_t p, std::size_t k) const { return x_[at(l, p, k)]; }
  double inflow(std::size_t l, std::size_t p, std::size_t k) const { return inflow_[at(l, p, k)]; }
  double outflow(std::size_t l, std::size_t p, std::size_t k) const {
    return outflow_[at(l, p, k)];
  }
  double queued(std::size_t p, std::size_t k) const { return queue_[k * paths_ + p]; }
  /// Cumulative vehicles that joined an origin queue by instant k.
  double entered(std::size_t k) const { return entered_[k]; }
  /// Cumulative vehicles that reached their destination by instant k.
  double exited(std::size_t k) const { return exited_[k]; }

  double link_occupancy(std::size_t l, std::size_t k) const {
    double s = 0.0;
    for (std::size_t p = 0; p < paths_; ++p) s += vehicles(l, p, k);
    return s;
  }
  /// Total outflow of link l over step k, vehicles per step.
  double link_outflow(std::size_t l, std::size_t k) const {
    double s = 0.0;
    for (std::size_t p = 0; p < paths_; ++p) s += outflow(l, p, k);
    return s;
  }
  double network_vehicles(std::size_t k) const {
    double s = 0.0;
    for (std::size_t l = 0; l < links_; ++l) s += link_occupancy(l, k);
    return s;
  }
  double queued_vehicles(std::size_t k) const {
    double s = 0.0;
    for (std::size_t p = 0; p < paths_; ++p) s += queued(p, k);
    return s;
  }

  LoadingState state_at(std::size_t k) const {
    LoadingState s = LoadingState::empty(links_, paths_);
    for (std::size_t l = 0; l < links_; ++l)
      for (std::size_t p = 0; p < paths_; ++p) s.x(l, p) = vehicles(l, p, k);
    for (std::size_t p = 0; p < paths_; ++p) s.queue[p] = queued(p, k);
    return s;
  }

  void record_state(std::size_t k, const LoadingState& s) {
    for (std::size_t l = 0; l < links_; ++l)
      for (std::size_t p = 0; p < paths_; ++p) x_[at(l, p, k)] = s.x(l, p);
    for (std::size_t p = 0; p < paths_; ++p) queue_[k * paths_ + p] = s.queue[p];
  }

  void record_flows(std::size_t k, const StepFlows& f, double arrivals) {
    double out = 0.0;
    for (std::size_t l = 0; l < links_; ++l) {
      for (std::size_t p = 0; p < paths_; ++p) {
        inflow_[at(l, p, k)] = f.inflow(l, p);
        outflow_[at(l, p, k)] = f.outflow(l, p);
      }
    }
    for (double e : f.exited) out += e;
    entered_[k + 1] = entered_[k] + arrivals;
    exited_[k + 1] = exited_[k] + out;
  }

 private:
  std::size_t at(std::size_t l, std::size_t p, std::size_t k) const {
    return (k * links_ + l) * paths_ + p;
  }

  std::size_t links_ = 0;
  std::size_t paths_ = 0;
  std::size_t steps_ = 0;
  double dt_ = 0.0;
  std::vector<double> x_;
  std::vector<double> inflow_;
  std::vector<double> outflow_;
  std::vector<double> queue_;
  std::vector<double> entered_;
  std::vector<double> exited_;
};

/// Single-cell-per-link dynamic network loading (CTM or MN).
///
/// Every link end and every origin acts as an upstream "sender"; every link
/// start and the destination act as receivers. For each sender u and receiver
/// j the directed demand r(u,j) is the FIFO share of u's demand bound for j.
/// A receiver whose total request exceeds its supply shares it by the
/// MergeRule; each sender then moves at the tightest allotted
/// fraction over its receivers, applied uniformly to all its paths (FIFO).
/// On a one-to-one node this reduces to min(demand, supply).
class NetworkLoader {
 public:
  NetworkLoader(const Network& net, SupplyRule rule, double dt,
                MergeRule merge = MergeRule::kCapacityPriority)
      : net_(&net), rule_(rule), merge_(merge), dt_(dt) {
    for (const Link& link : net.links()) {
      fd_.push_back(FundamentalDiagram::of(link));
      if (link.free_flow_speed_mps() * dt > link.length_m * (1.0 + 1e-12)) {
        throw Error("CFL condition violated on link " + std::to_string(link.id) +
                    ": free-flow speed * dt exceeds link length");
      }
    }
    const std::size_t links = net.num_links();
    const std::size_t paths = net.num_paths();

    // Origins are senders numbered after the links.
    std::vector<int> origin_nodes;
    source_of_path_.resize(paths);
    for (std::size_t p = 0; p < paths; ++p) {
      const int node = net.links()[net.path_links(p).front()].from_node;
      auto it = std::find(origin_nodes.begin(), origin_nodes.end(), node);
      if (it == origin_nodes.end()) {
        origin_nodes.push_back(node);
        it = origin_nodes.end() - 1;
      }
      source_of_path_[p] = links + static_cast<std::size_t>(it - origin_nodes.begin());
    }
    senders_ = links + origin_nodes.size();
    sink_ = links;
    weight_.resize(senders_, 0.0);
    for (std::size_t l = 0; l < links; ++l) weight_[l] = net.links()[l].capacity_vph;
    for (std::size_t p = 0; p < paths; ++p) {
      const double cap = net.links()[net.path_links(p).front()].capacity_vph;
      weight_[source_of_path_[p]] = std::max(weight_[source_of_path_[p]], cap);
    }

    next_.assign(links * paths, kNoIndex);
    for (std::size_t p = 0; p < paths; ++p) {
      const auto& route = net.path_links(p);
      for (std::size_t i = 0; i < route.size(); ++i) {
        next_[route[i] * paths + p] = i + 1 < route.size() ? route[i + 1] : sink_;
      }
    }
  }

  SupplyRule rule() const { return rule_; }
  MergeRule merge_rule() const { return merge_; }
  double dt() const { return dt_; }
  const FundamentalDiagram& diagram(std::size_t l) const { return fd_[l]; }

  double supply(std::size_t l, double occupancy) const {
    if (rule_ == SupplyRule::kConstantCapacity) return fd_[l].capacity_per_step(dt_);
    return fd_[l].supply(occupancy, dt_);
  }

  /// Advances the state by one step. `arrivals` (vehicles, per path) join the
  /// origin queues before any node flow is computed.
  LoadingState step(const LoadingState& s, std::span<const double> arrivals,
                    StepFlows* flows = nullptr) const {
    const Network& net = *net_;
    const std::size_t links = net.num_links();
    const std::size_t paths = net.num_paths();
    const std::size_t receivers = links + 1;

    std::vector<double> queue(s.queue);
    for (std::size_t p = 0; p < paths; ++p) queue[p] += arrivals[p];

    // Per-(sender, path) demand and the receiver each one heads to.
    Grid demand(senders_, paths);
    std::vector<std::size_t> target(senders_ * paths, kNoIndex);
    std::vector<double> link_supply(links);
    for (std::size_t l = 0; l < links; ++l) {
      double occupancy = 0.0;
      for (std::size_t p = 0; p < paths; ++p) occupancy += s.x(l, p);
      link_supply[l] = supply(l, occupancy);
      if (occupancy <= 0.0) continue;
      const double total = fd_[l].demand(occupancy, dt_);
      for (std::size_t p = 0; p < paths; ++p) {
        if (s.x(l, p) <= 0.0) continue;
        demand(l, p) = total * s.x(l, p) / occupancy;
        target[l * paths + p] = next_[l * paths + p];
      }
    }
    for (std::size_t p = 0; p < paths; ++p) {
      if (queue[p] <= 0.0) continue;
      const std::size_t u = source_of_path_[p];
      demand(u, p) = queue[p];
      target[u * paths + p] = net.path_links(p).front();
    }

    Grid request(senders_, receivers);
    std::vector<double> requested(receivers, 0.0);
    for (std::size_t u = 0; u < senders_; ++u) {
      for (std::size_t p = 0; p < paths; ++p) {
        const std::size_t j = target[u * paths + p];
        if (j == kNoIndex) continue;
        request(u, j) += demand(u, p);
        requested[j] += demand(u, p);
      }
    }

    std::vector<double> fraction(senders_, 1.0);
    std::vector<double> allotted(senders_);
    for (std::size_t j = 0; j < links; ++j) {
      if (requested[j] <= link_supply[j]) continue;
      allot(request, j, link_supply[j], allotted);
      for (std::size_t u = 0; u < senders_; ++u) {
        if (request(u, j) > 0.0) fraction[u] = std::min(fraction[u], allotted[u] / request(u, j));
      }
    }

    LoadingState next{s.x, std::move(queue)};
    StepFlows local{Grid(links, paths), Grid(links, paths), std::vector<double>(paths, 0.0)};
    for (std::size_t u = 0; u < senders_; ++u) {
      for (std::size_t p = 0; p < paths; ++p) {
        const std::size_t j = target[u * paths + p];
        if (j == kNoIndex) continue;
        const double moved = fraction[u] * demand(u, p);
        if (u < links) {
          local.outflow(u, p) = moved;
        } else {
          next.queue[p] -= moved;
        }
        if (j == sink_) {
          local.exited[p] += moved;
        } else {
          local.inflow(j, p) = moved;
        }
      }
    }
    for (std::size_t l = 0; l < links; ++l) {
      for (std::size_t p = 0; p < paths; ++p) {
        next.x(l, p) = s.x(l, p) + local.inflow(l, p) - local.outflow(l, p);
      }
    }
    if (flows) *flows = std::move(local);
    return next;
  }

  /// Loads h over its whole horizon, starting from an empty network.
  StateTrajectory run(const DemandAssignment& h) const {
    const Network& net = *net_;
    check_dimensions(h, net);
    if (std::abs(h.dt - dt_) > 1e-12 * dt_) throw Error("assignment dt differs from loader dt");
    const std::size_t steps = h.steps();
    const std::size_t paths = net.num_paths();
    StateTrajectory traj(net.num_links(), paths, steps, dt_);
    LoadingState s = LoadingState::empty(net.num_links(), paths);
    std::vector<double> arrivals(paths);
    StepFlows flows;
    for (std::size_t k = 0; k < steps; ++k) {
      double total = 0.0;
      for (std::size_t p = 0; p < paths; ++p) {
        arrivals[p] = h(p, k) * dt_ / 3600.0;
        total += arrivals[p];
      }
      s = step(s, arrivals, &flows);
      traj.record_flows(k, flows, total);
      traj.record_state(k + 1, s);
    }
    return traj;
  }

 private:
  /// Shares `supply` of receiver j among its requesting senders.
  void allot(const Grid& request, std::size_t j, double supply,
             std::vector<double>& allotted) const {
    std::fill(allotted.begin(), allotted.end(), 0.0);
    double total = 0.0;
    for (std::size_t u = 0; u < senders_; ++u) total += request(u, j);
    if (merge_ == MergeRule::kDemandProportional) {
      for (std::size_t u = 0; u < senders_; ++u) allotted[u] = supply * request(u, j) / total;
      return;
    }
    std::vector<bool> open(senders_, false);
    double open_weight = 0.0;
    for (std::size_t u = 0; u < senders_; ++u) {
      if (request(u, j) > 0.0) {
        open[u] = true;
        open_weight += weight_[u];
      }
    }
    double remaining = supply;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t u = 0; u < senders_; ++u) {
        if (!open[u] || request(u, j) > remaining * weight_[u] / open_weight) continue;
        allotted[u] = request(u, j);
        remaining -= request(u, j);
        open_weight -= weight_[u];
        open[u] = false;
        changed = true;
      }
    }
    for (std::size_t u = 0; u < senders_; ++u) {
      if (open[u]) allotted[u] = remaining * weight_[u] / open_weight;
    }
  }

  const Network* net_;
  SupplyRule rule_;
  MergeRule merge_;
  double dt_;
  std::vector<double> weight_;  // merge priority per sender
  std::vector<FundamentalDiagram> fd_;
  std::vector<std::size_t> source_of_path_;
  std::vector<std::size_t> next_;  // (link, path) -> next link index, sink_, or kNoIndex
  std::size_t senders_ = 0;
  std::size_t sink_ = 0;
};

inline LoadingState ctm_step(const LoadingState& s, std::span<const double> arrivals,
                             const Network& net, double dt, StepFlows* flows = nullptr) {
  return NetworkLoader(net, SupplyRule::kCellTransmission, dt).step(s, arrivals, flows);
}

inline LoadingState mn_step(const LoadingState& s, std::span<const double> arrivals,
                            const Network& net, double dt, StepFlows* flows = nullptr) {
  return NetworkLoader(net, SupplyRule::kConstantCapacity, dt).step(s, arrivals, flows);
}

inline StateTrajectory run_loading(const DemandAssignment& h, const Network& net,
                                   TrafficModel model) {
  if (model == TrafficModel::kStatic) throw Error("the static model has no network loading");
  const SupplyRule rule = model == TrafficModel::kCellTransmission
                              ? SupplyRule::kCellTransmission
                              : SupplyRule::kConstantCapacity;
  return NetworkLoader(net, rule, h.dt).run(h);
}

}  // namespace tasolve

#endif  // TASOLVE_MODELS_HPP_
