#ifndef TASOLVE_TESTS_HELPERS_HPP_
#define TASOLVE_TESTS_HELPERS_HPP_

#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "tasolve/assignment.hpp"
#include "tasolve/network.hpp"

namespace tasolve::testing {

/// One link from node 0 to node 1 carrying a single path.
inline Network single_link(std::vector<double> demand, double dt = 5.0, double length = 200.0,
                           double capacity = 2000.0, double speed = 72.0,
                           std::optional<double> jam = 140.0) {
  std::vector<Link> links = {{0, 0, 1, length, capacity, speed, jam, 0.15}};
  std::vector<ODPair> ods = {{0, 0, 1, {7}, {std::move(demand), dt}}};
  std::vector<Path> paths = {{7, {0}, 0}};
  return Network(std::move(links), std::move(ods), std::move(paths));
}

/// A feasible assignment with uniformly random splits.
inline DemandAssignment random_feasible(const Network& net, std::mt19937_64& rng) {
  const TimeGrid grid = net.time_grid();
  DemandAssignment h(net.num_paths(), grid.steps, grid.dt);
  std::exponential_distribution<double> expo(1.0);
  for (std::size_t w = 0; w < net.num_ods(); ++w) {
    const auto& paths = net.od_paths(w);
    for (std::size_t k = 0; k < grid.steps; ++k) {
      std::vector<double> share(paths.size());
      double total = 0.0;
      for (double& s : share) total += (s = expo(rng));
      for (std::size_t i = 0; i < paths.size(); ++i) {
        h(paths[i], k) = net.ods()[w].demand.values[k] * share[i] / total;
      }
    }
  }
  return h;
}

/// Demand rates from a list, path by path, one column per timestep.
inline DemandAssignment assignment(const Network& net, std::vector<std::vector<double>> rows) {
  const TimeGrid grid = net.time_grid();
  DemandAssignment h(net.num_paths(), grid.steps, grid.dt);
  for (std::size_t p = 0; p < rows.size(); ++p)
    for (std::size_t k = 0; k < grid.steps; ++k) h(p, k) = rows[p][rows[p].size() == 1 ? 0 : k];
  return h;
}

/// Euclidean projection onto {x >= 0, sum x = total} by enumerating every
/// support set; exponential, for checking the fast projection only.
inline std::vector<double> brute_force_simplex_projection(const std::vector<double>& y,
                                                          double total) {
  const std::size_t n = y.size();
  std::vector<double> best(n, 0.0);
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        sum += y[i];
        ++count;
      }
    }
    const double shift = (total - sum) / static_cast<double>(count);
    std::vector<double> x(n, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        x[i] = y[i] + shift;
        ok = ok && x[i] >= -1e-12;
      }
    }
    if (!ok) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += (x[i] - y[i]) * (x[i] - y[i]);
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

}  // namespace tasolve::testing

#endif  // TASOLVE_TESTS_HELPERS_HPP_
