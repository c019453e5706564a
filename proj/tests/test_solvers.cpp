#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "tasolve/cost.hpp"
#include "tasolve/demo_network.hpp"
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

TEST(AllOrNothing, UniqueMinimum) {
  const Network net = make_static_demo_network(0.15);
  const DemandAssignment y = all_or_nothing(costs(40, 50, 45), net);
  EXPECT_EQ(y(0, 0), 1300.0);
  EXPECT_EQ(y(1, 0), 0.0);
  EXPECT_EQ(y(2, 0), 300.0);  // single-path OD
}

TEST(AllOrNothing, TiesSplitEvenly) {
  const Network net = make_static_demo_network(0.15);
  const DemandAssignment y = all_or_nothing(costs(40, 40, 45), net);
  EXPECT_EQ(y(0, 0), 650.0);
  EXPECT_EQ(y(1, 0), 650.0);
}

TEST(RelativeGap, HandComputed) {
  const Network net = make_static_demo_network(0.15, 1300.0, 0.0);
  const DemandAssignment h = testing::assignment(net, {{0}, {1300}, {0}});
  const PathCosts c = costs(40, 50, 45);
  const DemandAssignment y = all_or_nothing(c, net);
  EXPECT_NEAR(relative_gap(c, h, y), 0.25, 1e-15);
  EXPECT_EQ(relative_gap(c, y, y), 0.0);
}

TEST(RelativeGap, InvariantToCostScale) {
  const Network net = make_static_demo_network(0.15);
  const DemandAssignment h = testing::assignment(net, {{500}, {800}, {300}});
  PathCosts c = costs(40, 47, 45);
  const DemandAssignment y = all_or_nothing(c, net);
  const double g = relative_gap(c, h, y);
  for (double& v : c.values.flat()) v *= 3.7;
  EXPECT_EQ(all_or_nothing(c, net), y);
  EXPECT_NEAR(relative_gap(c, h, all_or_nothing(c, net)), g, 1e-15);
}

TEST(RelativeGap, ZeroDemandIsZero) {
  const Network net = make_static_demo_network(0.15, 0.0, 0.0);
  const DemandAssignment h(3, 1, 3600.0);
  EXPECT_EQ(relative_gap(costs(40, 50, 45), h, h), 0.0);
}

TEST(FrankWolfe, ConstantCostsFinishAtOnce) {
  const Network net = make_static_demo_network(0.0);
  const ModelManager F(net, {});
  const SolverReport r = fw_solve(F, {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.final_assignment(0, 0), 1300.0);
  EXPECT_EQ(r.final_assignment(1, 0), 0.0);
}

TEST(FrankWolfe, InteriorEquilibriumEqualizesCosts) {
  const Network net = make_static_demo_network(5.0);
  const ModelManager F(net, {});
  SolverOptions o;
  o.eps = 1e-8;
  const SolverReport r = fw_solve(F, o);
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.final_assignment(1, 0), 1.0);
  EXPECT_NEAR(r.final_costs(0, 0), r.final_costs(1, 0), 1e-4);
  EXPECT_TRUE(is_feasible(r.final_assignment, net).feasible);
}

TEST(FrankWolfe, ObjectiveNeverIncreases) {
  const Network net = make_static_demo_network(20.0);
  const ModelManager F(net, {});
  SolverOptions o;
  o.eps = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 12; ++k) {
    o.max_iters = k;
    const double z = beckmann_objective(fw_solve(F, o).final_assignment, net);
    EXPECT_LE(z, previous + 1e-9 * std::abs(previous));
    previous = z;
  }
}

TEST(FrankWolfe, RejectsDynamicModels) {
  const Network net = make_demo_network({});
  const ModelManager F(net, {TrafficModel::kCellTransmission, CostMode::kActual});
  EXPECT_THROW(fw_solve(F, {}), Error);
}

TEST(Msa, FirstStepJumpsToAllOrNothing) {
  const Network net = make_static_demo_network(20.0);
  const ModelManager F(net, {});
  const DemandAssignment start = testing::assignment(net, {{100}, {1200}, {300}});
  SolverOptions o;
  o.max_iters = 2;
  o.eps = 0.0;
  const SolverReport r = msa_solve(net, F, o, start);
  EXPECT_EQ(r.final_assignment, all_or_nothing(F(start), net));
  EXPECT_EQ(r.iterations.front().step, 1.0);
  EXPECT_EQ(r.iterations.back().step, 0.5);
}

TEST(Msa, FixedPointStaysPut) {
  const Network net = make_static_demo_network(0.0);
  const ModelManager F(net, {});
  const DemandAssignment start = testing::assignment(net, {{1300}, {0}, {300}});
  SolverOptions o;
  o.max_iters = 5;
  o.eps = -1.0;
  const SolverReport r = msa_solve(net, F, o, start);
  EXPECT_EQ(r.final_assignment, start);
}

TEST(Msa, AgreesWithFrankWolfe) {
  const Network net = make_static_demo_network(5.0);
  const ModelManager F(net, {});
  SolverOptions o;
  o.max_iters = 100000;
  const SolverReport fw = fw_solve(F, o);
  const SolverReport msa = msa_solve(net, F, o);
  ASSERT_TRUE(fw.converged);
  ASSERT_TRUE(msa.converged);
  for (std::size_t p = 0; p < 3; ++p) {
    EXPECT_NEAR(msa.final_assignment(p, 0), fw.final_assignment(p, 0),
                1e-2 * fw.final_assignment(p, 0));
  }
}

TEST(Epm, LargeStepOnConstantCostsReachesCorner) {
  const Network net = make_static_demo_network(0.0);
  const ModelManager F(net, {});
  SolverOptions o;
  o.tau0 = 1000.0;
  const SolverReport r = epm_solve(net, F, o, testing::assignment(net, {{650}, {650}, {300}}));
  ASSERT_EQ(r.iterations.size(), 2u);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.final_gap(), 0.0);
  EXPECT_EQ(r.final_assignment(0, 0), 1300.0);
}

TEST(Epm, VanishingStepBarelyMoves) {
  const Network net = make_static_demo_network(5.0);
  const ModelManager F(net, {});
  const DemandAssignment start = testing::assignment(net, {{650}, {650}, {300}});
  SolverOptions o;
  o.tau0 = 1e-9;
  o.max_iters = 2;
  o.eps = 0.0;
  const SolverReport r = epm_solve(net, F, o, start);
  for (std::size_t p = 0; p < 3; ++p) EXPECT_NEAR(r.final_assignment(p, 0), start(p, 0), 1e-4);
}

TEST(Epm, StepSizeNeverGrows) {
  const Network net = make_demo_network({});
  const ModelManager F(net, {TrafficModel::kCellTransmission, CostMode::kInstantaneous});
  SolverOptions o;
  o.tau0 = 100.0;
  o.max_iters = 60;
  const SolverReport r = epm_solve(net, F, o);
  for (std::size_t i = 1; i < r.iterations.size(); ++i) {
    EXPECT_LE(r.iterations[i].step, r.iterations[i - 1].step);
  }
  EXPECT_LT(r.iterations.back().step, 100.0);
}

TEST(Termination, StallIsDetected) {
  const Network net = make_static_demo_network(5.0);
  const ModelManager F(net, {});
  SolverOptions o;
  o.tau0 = 1e-300;
  const SolverReport r = epm_solve(net, F, o, testing::assignment(net, {{650}, {650}, {300}}));
  EXPECT_EQ(r.termination, Termination::kStalled);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations.size(), static_cast<std::size_t>(o.stall_window + 1));
}

TEST(Termination, BudgetExhausted) {
  const Network net = make_static_demo_network(5.0);
  const ModelManager F(net, {});
  SolverOptions o;
  o.max_iters = 3;
  o.eps = 1e-14;
  const SolverReport r = msa_solve(net, F, o);
  EXPECT_EQ(r.termination, Termination::kMaxIters);
  EXPECT_EQ(r.iterations.size(), 3u);
}

TEST(Termination, ZeroDemandConvergesImmediately) {
  DemoNetworkParams prm;
  prm.d0 = prm.d1 = 0.0;
  const Network net = make_demo_network(prm);
  const ModelManager F(net, {TrafficModel::kCellTransmission, CostMode::kActual});
  for (SolverMethod m : {SolverMethod::kMsa, SolverMethod::kEpm, SolverMethod::kMsaThenEpm}) {
    const SolverReport r = solve(F, m, {});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations.size(), 1u);
    EXPECT_EQ(r.final_gap(), 0.0);
  }
}

TEST(Chained, LogIsContiguous) {
  const Network net = make_demo_network({});
  const ModelManager F(net, {TrafficModel::kCellTransmission, CostMode::kActual});
  SolverOptions o;
  o.tau0 = 10.0;
  o.msa_warmup_iters = 20;
  const SolverReport r = msa_then_epm_solve(net, F, o);
  ASSERT_GT(r.iterations.size(), 20u);
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    EXPECT_EQ(r.iterations[i].k, static_cast<int>(i) + 1);
    if (i > 0) {
      EXPECT_GE(r.iterations[i].wall_ms, r.iterations[i - 1].wall_ms);
    }
  }
  EXPECT_DOUBLE_EQ(r.iterations[19].step, 1.0 / 20.0);
  EXPECT_DOUBLE_EQ(r.iterations[20].step, 10.0);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(is_feasible(r.final_assignment, net).feasible);
}

TEST(MethodNames, RoundTrip) {
  for (auto m : {SolverMethod::kFrankWolfe, SolverMethod::kMsa, SolverMethod::kEpm,
                 SolverMethod::kMsaThenEpm}) {
    EXPECT_EQ(parse_solver_method(to_string(m)), m);
  }
  EXPECT_FALSE(parse_solver_method("newton"));
}

}  // namespace
}  // namespace tasolve
