#ifndef TASOLVE_DEMO_NETWORK_HPP_
#define TASOLVE_DEMO_NETWORK_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "tasolve/network.hpp"

namespace tasolve {

/// Six-link, two-OD bottleneck network used throughout the tests and the
/// shipped scenarios.
///
///   node 0 --link 0--> node 2 --link 2 (400 m)--> node 3 --link 4--> node 4 --link 5--> node 5
///   node 1 --link 1--> node 2 --link 3 (200 m)--> node 3
///
/// Links 2 and 3 are parallel. Link 5 (1000 veh/h) is the bottleneck. OD 0
/// (node 0 -> 5) has paths 1 = [0,3,4,5] and 2 = [0,2,4,5]; OD 1 (node 1 -> 5)
/// has path 3 = [1,3,4,5].
struct DemoNetworkParams {
  double d0 = 1300.0;           // veh/h
  double d1 = 300.0;            // veh/h
  double demand_end_s = 300.0;  // demand is zero from here on
  double horizon_s = 600.0;
  double dt = 5.0;
  double bpr_gamma = 0.15;
  std::optional<double> jam_density_vpkm;
};

inline Network make_demo_network(const DemoNetworkParams& prm) {
  auto link = [&](int id, int from, int to, double length, double capacity) {
    return Link{id, from, to, length, capacity, 70.0, prm.jam_density_vpkm, prm.bpr_gamma};
  };
  std::vector<Link> links = {
      link(0, 0, 2, 200.0, 2000.0), link(1, 1, 2, 200.0, 2000.0),
      link(2, 2, 3, 400.0, 2000.0), link(3, 2, 3, 200.0, 2000.0),
      link(4, 3, 4, 200.0, 2000.0), link(5, 4, 5, 200.0, 1000.0),
  };
  const auto steps = static_cast<std::size_t>(std::llround(prm.horizon_s / prm.dt));
  auto profile = [&](double rate) {
    DemandProfile d{std::vector<double>(steps, 0.0), prm.dt};
    for (std::size_t k = 0; k < steps; ++k) {
      if (prm.dt * static_cast<double>(k) < prm.demand_end_s) d.values[k] = rate;
    }
    return d;
  };
  std::vector<ODPair> ods = {
      {0, 0, 5, {1, 2}, profile(prm.d0)},
      {1, 1, 5, {3}, profile(prm.d1)},
  };
  std::vector<Path> paths = {
      {1, {0, 3, 4, 5}, 0},
      {2, {0, 2, 4, 5}, 0},
      {3, {1, 3, 4, 5}, 1},
  };
  return Network(std::move(links), std::move(ods), std::move(paths));
}

/// Single-period static variant: one timestep, constant demand.
inline Network make_static_demo_network(double gamma, double d0 = 1300.0, double d1 = 300.0) {
  DemoNetworkParams prm;
  prm.d0 = d0;
  prm.d1 = d1;
  prm.bpr_gamma = gamma;
  prm.dt = 3600.0;
  prm.horizon_s = 3600.0;
  prm.demand_end_s = 3600.0;
  return make_demo_network(prm);
}

}  // namespace tasolve

#endif  // TASOLVE_DEMO_NETWORK_HPP_
