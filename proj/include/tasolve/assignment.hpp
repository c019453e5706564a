#ifndef TASOLVE_ASSIGNMENT_HPP_
#define TASOLVE_ASSIGNMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tasolve/grid.hpp"
#include "tasolve/network.hpp"

namespace tasolve {

/// A (path x timestep) series on a uniform time grid. The tag keeps demand
/// rates and costs from being mixed up.
template <typename Tag>
struct PathSeries {
  Grid values;  // rows: path index, cols: timestep
  double dt = 5.0;

  PathSeries() = default;
  PathSeries(std::size_t paths, std::size_t steps, double dt_s, double fill = 0.0)
      : values(paths, steps, fill), dt(dt_s) {}

  std::size_t paths() const { return values.rows(); }
  std::size_t steps() const { return values.cols(); }
  double horizon() const { return dt * static_cast<double>(steps()); }

  double& operator()(std::size_t p, std::size_t k) { return values(p, k); }
  double operator()(std::size_t p, std::size_t k) const { return values(p, k); }

  friend bool operator==(const PathSeries&, const PathSeries&) = default;
};

struct DemandTag {};
struct CostTag {};

/// Path demand rates h_p(t), veh/h.
using DemandAssignment = PathSeries<DemandTag>;
/// Path travel costs c_p(t), seconds.
using PathCosts = PathSeries<CostTag>;

inline constexpr double kFeasibilityTolerance = 1e-6;  // veh/h

struct FeasibilityReport {
  bool feasible = false;
  double max_violation = 0.0;  // veh/h
};

inline void check_dimensions(const DemandAssignment& h, const Network& net) {
  const TimeGrid grid = net.time_grid();
  if (h.paths() != net.num_paths() || h.steps() != grid.steps) {
    throw Error("assignment dimensions do not match the network");
  }
}

/// Nonnegativity plus per-OD demand conservation at every timestep.
inline FeasibilityReport is_feasible(const DemandAssignment& h, const Network& net,
                                     double tol = kFeasibilityTolerance) {
  check_dimensions(h, net);
  double worst = 0.0;
  for (double v : h.values.flat()) worst = std::max(worst, -v);
  for (std::size_t w = 0; w < net.num_ods(); ++w) {
    const auto& demand = net.ods()[w].demand.values;
    for (std::size_t k = 0; k < h.steps(); ++k) {
      double sum = 0.0;
      for (std::size_t p : net.od_paths(w)) sum += h(p, k);
      worst = std::max(worst, std::abs(sum - demand[k]));
    }
  }
  return {worst <= tol, worst};
}

/// Euclidean projection of `point` onto {y >= 0, sum(y) = total}, in place.
/// Sort-based: find the threshold theta so that sum(max(x - theta, 0)) = total.
inline void project_simplex(std::span<double> point, double total) {
  const std::size_t n = point.size();
  if (n == 0) return;
  if (total <= 0.0) {
    std::fill(point.begin(), point.end(), 0.0);
    return;
  }
  if (n == 1) {
    point[0] = total;
    return;
  }
  std::vector<double> sorted(point.begin(), point.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - total) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  for (double& v : point) v = std::max(v - theta, 0.0);
}

/// Euclidean projection onto the feasible set. The set is a product of
/// scaled simplices, one per (OD, timestep), so each block projects alone.
inline DemandAssignment project(const Grid& point, double dt, const Network& net) {
  const TimeGrid grid = net.time_grid();
  if (point.rows() != net.num_paths() || point.cols() != grid.steps) {
    throw Error("projection point dimensions do not match the network");
  }
  DemandAssignment h(net.num_paths(), grid.steps, dt);
  std::vector<double> block;
  for (std::size_t w = 0; w < net.num_ods(); ++w) {
    const auto& paths = net.od_paths(w);
    const auto& demand = net.ods()[w].demand.values;
    block.resize(paths.size());
    for (std::size_t k = 0; k < grid.steps; ++k) {
      for (std::size_t i = 0; i < paths.size(); ++i) block[i] = point(paths[i], k);
      project_simplex(block, demand[k]);
      for (std::size_t i = 0; i < paths.size(); ++i) h(paths[i], k) = block[i];
    }
  }
  return h;
}

/// Weighted inner product over (path, timestep) cells: dt * sum(a .* b).
template <typename TagA, typename TagB>
double inner_product(const PathSeries<TagA>& a, const PathSeries<TagB>& b) {
  double s = 0.0;
  const auto fa = a.values.flat();
  const auto fb = b.values.flat();
  for (std::size_t i = 0; i < fa.size(); ++i) s += fa[i] * fb[i];
  return s * a.dt;
}

}  // namespace tasolve

#endif  // TASOLVE_ASSIGNMENT_HPP_
