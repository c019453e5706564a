#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "tasolve/cost.hpp"
#include "tasolve/demo_network.hpp"
#include "tasolve/metrics.hpp"
#include "tasolve/solvers.hpp"

namespace tasolve {
namespace {

PathCosts costs(double c1, double c2, double c3) {
  PathCosts c(3, 1, 3600.0);
  c(0, 0) = c1;
  c(1, 0) = c2;
  c(2, 0) = c3;
  return c;
}

TEST(MinPathCost, Cases) {
  const Network net = make_static_demo_network(0.15);
  EXPECT_EQ(min_path_cost(costs(40, 50, 45), net, 0)[0], 40.0);
  EXPECT_EQ(min_path_cost(costs(40, 50, 45), net, 1)[0], 45.0);
  EXPECT_EQ(min_path_cost(costs(42, 42, 45), net, 0)[0], 42.0);
}

TEST(WardropDistanceFlow, HandComputed) {
  const Network net = make_static_demo_network(0.15);
  const DemandAssignment h = testing::assignment(net, {{0}, {1300}, {300}});
  EXPECT_DOUBLE_EQ(wardrop_distance_flow(h, costs(40, 50, 45), net)[0], 13000.0);
}

TEST(WardropDistanceFlow, VanishesAtEquilibrium) {
  const Network net = make_static_demo_network(5.0);
  const ModelManager F(net, {});
  SolverOptions o;
  o.eps = 1e-10;
  const SolverReport r = fw_solve(F, o);
  const double d = wardrop_distance_flow(r.final_assignment, r.final_costs, net)[0];
  EXPECT_LT(d, 1e-6 * 1300.0 * r.final_costs(0, 0));
}

TEST(WardropDistanceFlow, MatchesGapNumerator) {
  // <c, h - y> = dt * sum_k D(k), since y sits on the cheapest paths.
  const Network net = make_demo_network({});
  const ModelManager F(net, {TrafficModel::kCellTransmission, CostMode::kInstantaneous});
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const DemandAssignment h = testing::random_feasible(net, rng);
    const PathCosts c = F(h);
    const DemandAssignment y = all_or_nothing(c, net);
    const auto d = wardrop_distance_flow(h, c, net);
    const double numerator = inner_product(h, c) - inner_product(y, c);
    EXPECT_NEAR(time_integral(d, h.dt), numerator, 1e-9 * numerator);
  }
}

TEST(WardropDistanceState, IdentityAndUnitShift) {
  const Network net = make_demo_network({});
  std::mt19937_64 rng(17);
  const DemandAssignment h = testing::random_feasible(net, rng);
  const StateTrajectory t = run_loading(h, net, TrafficModel::kCellTransmission);
  for (double v : wardrop_distance_state(t, t)) EXPECT_EQ(v, 0.0);

  StateTrajectory shifted = t;
  LoadingState s = shifted.state_at(40);
  s.x(4, 2) += 1.0;
  shifted.record_state(40, s);
  const auto d = wardrop_distance_state(t, shifted);
  ASSERT_EQ(d.size(), h.steps() + 1);
  for (std::size_t k = 0; k < d.size(); ++k) EXPECT_NEAR(d[k], k == 40 ? 1.0 : 0.0, 1e-12);
}

TEST(WardropDistanceState, GridMismatchThrows) {
  EXPECT_THROW(wardrop_distance_state(StateTrajectory(6, 3, 10, 5.0), StateTrajectory(6, 3, 11, 5.0)),
               Error);
}

TEST(TimeIntegral, LeftRiemannSum) {
  const std::vector<double> v = {1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(time_integral(v, 5.0), 30.0);
}

}  // namespace
}  // namespace tasolve
