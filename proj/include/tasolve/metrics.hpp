#ifndef TASOLVE_METRICS_HPP_
#define TASOLVE_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tasolve/assignment.hpp"
#include "tasolve/models.hpp"
#include "tasolve/network.hpp"

namespace tasolve {

/// pi_w(t): cheapest path cost of OD `w` (index) at every step.
inline std::vector<double> min_path_cost(const PathCosts& c, const Network& net, std::size_t w) {
  std::vector<double> pi(c.steps(), std::numeric_limits<double>::infinity());
  for (std::size_t p : net.od_paths(w))
    for (std::size_t k = 0; k < c.steps(); ++k) pi[k] = std::min(pi[k], c(p, k));
  return pi;
}

/// Complementarity residual sum_w sum_p h_p (c_p - pi_w) per step, veh/h * s.
/// Zero exactly at Wardrop equilibria.
inline std::vector<double> wardrop_distance_flow(const DemandAssignment& h, const PathCosts& c,
                                                 const Network& net) {
  if (!h.values.same_shape(c.values)) throw Error("assignment and costs differ in shape");
  std::vector<double> out(h.steps(), 0.0);
  for (std::size_t w = 0; w < net.num_ods(); ++w) {
    const std::vector<double> pi = min_path_cost(c, net, w);
    for (std::size_t p : net.od_paths(w))
      for (std::size_t k = 0; k < h.steps(); ++k) out[k] += h(p, k) * (c(p, k) - pi[k]);
  }
  return out;
}

/// sum over links of the Euclidean norm of the per-path occupancy
/// difference, at every instant k = 0..steps.
inline std::vector<double> wardrop_distance_state(const StateTrajectory& traj,
                                                  const StateTrajectory& reference) {
  if (traj.links() != reference.links() || traj.paths() != reference.paths() ||
      traj.steps() != reference.steps() || traj.dt() != reference.dt()) {
    throw Error("state trajectories do not share a grid");
  }
  std::vector<double> out(traj.steps() + 1, 0.0);
  for (std::size_t k = 0; k <= traj.steps(); ++k) {
    for (std::size_t l = 0; l < traj.links(); ++l) {
      double sq = 0.0;
      for (std::size_t p = 0; p < traj.paths(); ++p) {
        const double d = reference.vehicles(l, p, k) - traj.vehicles(l, p, k);
        sq += d * d;
      }
      out[k] += std::sqrt(sq);
    }
  }
  return out;
}

/// Left Riemann sum of a per-step series.
inline double time_integral(std::span<const double> series, double dt) {
  double s = 0.0;
  for (double v : series) s += v;
  return s * dt;
}

}  // namespace tasolve

#endif  // TASOLVE_METRICS_HPP_
