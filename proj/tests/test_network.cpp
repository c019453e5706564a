#include <algorithm>
#include <string>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "tasolve/demo_network.hpp"
#include "tasolve/network.hpp"

namespace tasolve {
namespace {

bool has_message(const std::vector<Diagnostic>& diags, const std::string& text) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const Diagnostic& d) { return d.message == text; });
}

TEST(Incidence, DemoPathOneColumn) {
  const Network net = make_demo_network({});
  const IncidenceMatrix delta = build_incidence(net);
  ASSERT_EQ(delta.links(), 6u);
  ASSERT_EQ(delta.paths(), 3u);
  const std::size_t p1 = net.path_index(1);
  for (std::size_t l = 0; l < 6; ++l) {
    const bool expected = l == 0 || l == 3 || l == 4 || l == 5;
    EXPECT_EQ(delta(l, p1), expected) << "link " << l;
  }
  EXPECT_EQ(delta.column_sum(p1), 4u);
}

TEST(Incidence, SingleLinkIsIdentity) {
  const Network net = testing::single_link({100.0});
  const IncidenceMatrix delta = build_incidence(net);
  ASSERT_EQ(delta.links(), 1u);
  ASSERT_EQ(delta.paths(), 1u);
  EXPECT_TRUE(delta(0, 0));
}

TEST(Validate, DemoNetworkIsClean) {
  EXPECT_TRUE(validate(make_demo_network({})).empty());
}

TEST(Validate, DisconnectedPath) {
  const Network demo = make_demo_network({});
  std::vector<Path> paths = demo.paths();
  paths[0].links = {0, 5};
  const Network net(demo.links(), demo.ods(), paths);
  EXPECT_TRUE(has_message(validate(net), "path not connected"));
}

TEST(Validate, OdWithoutPaths) {
  const Network demo = make_demo_network({});
  std::vector<ODPair> ods = demo.ods();
  ods[1].paths.clear();
  std::vector<Path> paths = demo.paths();
  paths.pop_back();
  const auto diags = validate(Network(demo.links(), ods, paths));
  EXPECT_TRUE(has_message(diags, "OD has no paths"));
  EXPECT_TRUE(has_errors(diags));
}

TEST(Validate, StructuralErrors) {
  const Network demo = make_demo_network({});
  std::vector<Link> links = demo.links();
  links[1].id = 0;
  links[2].length_m = 0.0;
  links[3].jam_density_vpkm = 10.0;
  const auto diags = validate(Network(links, demo.ods(), demo.paths()));
  EXPECT_TRUE(has_message(diags, "duplicate link id"));
  EXPECT_TRUE(has_message(diags, "length must be positive"));
  EXPECT_TRUE(has_message(diags, "jam density must exceed critical density"));
}

TEST(Validate, PathEndpointsAndUnknownLinks) {
  const Network demo = make_demo_network({});
  std::vector<Path> paths = demo.paths();
  paths[0].links = {0, 3, 4};
  paths[1].links = {0, 2, 42};
  paths[2].links = {3, 4, 5};
  const auto diags = validate(Network(demo.links(), demo.ods(), paths));
  EXPECT_TRUE(has_message(diags, "path does not end at OD destination"));
  EXPECT_TRUE(has_message(diags, "unknown link id 42"));
  EXPECT_TRUE(has_message(diags, "path does not start at OD origin"));
}

TEST(Validate, NegativeDemand) {
  const Network demo = make_demo_network({});
  std::vector<ODPair> ods = demo.ods();
  ods[0].demand.values[3] = -1.0;
  EXPECT_TRUE(has_message(validate(Network(demo.links(), ods, demo.paths())),
                          "demand must be finite and nonnegative"));
}

TEST(Validate, UnusedLinkIsOnlyAWarning) {
  const Network demo = make_demo_network({});
  std::vector<Link> links = demo.links();
  links.push_back({9, 5, 6, 200.0, 2000.0, 70.0, 140.0, 0.15});
  const auto diags = validate(Network(links, demo.ods(), demo.paths()));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].severity, Severity::kWarning);
  EXPECT_FALSE(has_errors(diags));
}

TEST(Link, FreeFlowTimes) {
  const Network net = make_demo_network({});
  // 200 m at 70 km/h, and link 2 twice as long.
  EXPECT_NEAR(net.links()[3].free_flow_time(), 200.0 / (70.0 / 3.6), 1e-12);
  EXPECT_NEAR(net.links()[2].free_flow_time(), 2.0 * net.links()[3].free_flow_time(), 1e-12);
}

}  // namespace
}  // namespace tasolve
