#include <gtest/gtest.h>

#include <algorithm>

#include "epcoord/coordinator.hpp"
#include "epcoord/generator.hpp"
#include "epcoord/oracle.hpp"
#include "test_support.hpp"

namespace epcoord {
namespace {

using testing::q;
using testing::row;

TEST(SolveJoint, Examples) {
  EXPECT_EQ(*solve_joint(testing::illustrative()).value, q(17, 2));
  const SystemTree bad = parse_system(R"({"nodes": [{"id": "r"},
    {"id": "a", "parent": "r", "coordination_vars": ["x"],
     "constraints": [{"terms": {"x": 1}, "relation": "<=", "rhs": 0},
                     {"terms": {"x": 1}, "relation": ">=", "rhs": 1}]}]})");
  EXPECT_EQ(solve_joint(bad).status, LpStatus::Infeasible);
}

TEST(EnumerateVertices, ExpectedProjection) {
  const auto vertices = enumerate_vertices(testing::phi1());
  auto has = [&](const Scalar& x, const Scalar& pi) {
    return std::find(vertices.begin(), vertices.end(), Assignment{{"sys1.x1", x}, {"sys1.pi", pi}}) != vertices.end();
  };
  EXPECT_EQ(vertices.size(), 5u);
  EXPECT_TRUE(has(q(1), q(2)));
  EXPECT_TRUE(has(q(1), q(7)));
  EXPECT_TRUE(has(q(3), q(5)));
  EXPECT_TRUE(has(q(3), q(7)));
  EXPECT_TRUE(has(q(2), q(3)));

  Scalar lowest = vertices.front().at("sys1.pi");
  for (const auto& v : vertices) lowest = std::min(lowest, v.at("sys1.pi"));
  EXPECT_EQ(lowest, 2);
  const LpOutcome lp = solve_lp({testing::phi1().variables,
                                 {{{"sys1.pi", q(1)}}, 0, Sense::Minimize},
                                 to_constraints(testing::phi1())});
  EXPECT_EQ(*lp.value, lowest);
}

TEST(EnumerateVertices, UnitBoxAndLimits) {
  const Polytope box{{"a", "b"},
                     {row({{"a", q(1)}}, q(1)), row({{"a", q(-1)}}, q(0)), row({{"b", q(1)}}, q(1)),
                      row({{"b", q(-1)}}, q(0))},
                     false};
  EXPECT_EQ(enumerate_vertices(box).size(), 4u);

  Polytope wide;
  for (int i = 0; i < 7; ++i) wide.variables.push_back("v" + std::to_string(i));
  try {
    enumerate_vertices(wide);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionTooLarge);
  }
  const Polytope empty{{"a"}, {row({{"a", q(1)}}, q(0)), row({{"a", q(-1)}}, q(-1))}, false};
  EXPECT_TRUE(enumerate_vertices(empty).empty());
}

TEST(VerifyProjection, IllustrativeLeaves) {
  const SystemTree tree = testing::illustrative();
  for (const char* id : {"sys1", "sys2"}) {
    const OfrPolytope omega = build_ofr(tree, id, {});
    const VerificationReport report = verify_projection(omega, compute_ep(omega), 200, 1);
    EXPECT_TRUE(report.passed) << id;
    EXPECT_EQ(report.samples_checked, 200u);
    EXPECT_GT(report.vertices_checked, 0u);
    EXPECT_TRUE(report.counterexamples.empty());
  }
}

TEST(VerifyProjection, DetectsTightenedBound) {
  const OfrPolytope omega = build_ofr(testing::illustrative(), "sys1", {});
  EpModel corrupted = compute_ep(omega);
  for (auto& r : corrupted.polytope.rows)
    if (r.coefficients == Terms{{"sys1.pi", q(1)}}) r.rhs = 5;
  const VerificationReport report = verify_projection(omega, corrupted, 200, 1);
  EXPECT_FALSE(report.passed);
  ASSERT_FALSE(report.counterexamples.empty());
  for (const auto& point : report.counterexamples) EXPECT_GT(point.at("sys1.pi"), 5);
}

TEST(VerifyProjection, DetectsLoosenedRow) {
  const OfrPolytope omega = build_ofr(testing::illustrative(), "sys2", {});
  EpModel corrupted = compute_ep(omega);
  corrupted.polytope.rows.pop_back();
  EXPECT_FALSE(verify_projection(omega, corrupted, 200, 3).passed);
}

TEST(VerifyProjection, SameSeedSameReport) {
  const OfrPolytope omega = build_ofr(testing::illustrative(), "sys1", {});
  EpModel corrupted = compute_ep(omega);
  corrupted.polytope.rows.front().rhs -= 1;
  const auto a = verify_projection(omega, corrupted, 100, 9);
  const auto b = verify_projection(omega, corrupted, 100, 9);
  EXPECT_EQ(a.counterexamples, b.counterexamples);
}

TEST(Compare, Illustrative) {
  const ComparisonReport report = compare(testing::illustrative());
  EXPECT_TRUE(report.values_equal);
  EXPECT_TRUE(report.outcomes_agree);
  EXPECT_TRUE(report.jod_assignment_feasible_for_tree);
  EXPECT_TRUE(report.coordinated_assignment_feasible_for_flat_lp);
  EXPECT_EQ(*report.jod_value, q(17, 2));
  for (const auto& [id, delta] : report.cost_deltas) EXPECT_EQ(delta, 0) << id;
  const Json json = comparison_to_json(report, false);
  EXPECT_EQ(json.at("jod_value").at("exact"), "17/2");
  EXPECT_TRUE(json.at("values_equal").get<bool>());
}

TEST(Compare, InfeasibleTree) {
  const SystemTree bad = parse_system(R"({"nodes": [{"id": "r"},
    {"id": "a", "parent": "r", "coordination_vars": ["x"], "cost_bound": 1,
     "constraints": [{"terms": {"x": 1}, "relation": "<=", "rhs": 0},
                     {"terms": {"x": 1}, "relation": ">=", "rhs": 1}]}]})");
  const ComparisonReport report = compare(bad);
  EXPECT_EQ(report.jod_status, LpStatus::Infeasible);
  EXPECT_EQ(report.coordinated_status, LpStatus::Infeasible);
  EXPECT_TRUE(report.outcomes_agree);
  EXPECT_FALSE(report.values_equal);
  EXPECT_TRUE(report.jod_assignment_feasible_for_tree);
  EXPECT_TRUE(report.coordinated_assignment_feasible_for_flat_lp);
  EXPECT_FALSE(report.coordinated_diagnostic.empty());
}

class RandomCompare : public ::testing::TestWithParam<int> {};

TEST_P(RandomCompare, TwoLevelTreesAgree) {
  const SystemTree tree = generate_tree(GeneratorOptions{}, static_cast<std::uint64_t>(GetParam()));
  const ComparisonReport report = compare(tree);
  EXPECT_TRUE(report.values_equal);
  EXPECT_TRUE(report.jod_assignment_feasible_for_tree);
  EXPECT_TRUE(report.coordinated_assignment_feasible_for_flat_lp);
  for (const auto& [id, ep] : report.dispatch->eps) {
    const OfrPolytope omega = build_ofr(tree, id, detail::child_eps_of(tree, id, report.dispatch->eps));
    EXPECT_TRUE(verify_projection(omega, ep, 50, 1).passed) << id;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomCompare, ::testing::Range(500, 520));

TEST(Benchmark, IllustrativeStructure) {
  const SystemTree tree = testing::illustrative();
  const TimingReport report = benchmark(tree, 3);
  EXPECT_EQ(report.repetitions, 3u);
  ASSERT_EQ(report.nodes.size(), 2u);
  for (const auto& n : report.nodes) {
    EXPECT_EQ(n.scale.variables, 3u);
    EXPECT_EQ(n.scale.constraints, 8u);
    EXPECT_GE(n.projection_seconds, 0);
  }
  EXPECT_EQ(report.jod_scale.variables, 4u);
  EXPECT_EQ(report.jod_scale.constraints, 14u);
  EXPECT_EQ(report.upper_scale.variables, 4u);
  const Json json = timing_to_json(report);
  EXPECT_TRUE(json.contains("t_coor"));
  EXPECT_TRUE(json.contains("t_jod"));
}

TEST(Benchmark, WideTreeUsesMaximumNotSum) {
  const SystemTree tree = generate_wide_tree(8, 3);
  const TimingReport report = benchmark(tree, 1);
  ASSERT_EQ(report.nodes.size(), 8u);
  double slowest_projection = 0;
  double slowest_dispatch = 0;
  double total_projection = 0;
  for (const auto& n : report.nodes) {
    slowest_projection = std::max(slowest_projection, n.projection_seconds);
    slowest_dispatch = std::max(slowest_dispatch, n.dispatch_seconds);
    total_projection += n.projection_seconds;
  }
  EXPECT_DOUBLE_EQ(report.projection_critical_seconds, slowest_projection);
  EXPECT_DOUBLE_EQ(report.dispatch_critical_seconds, slowest_dispatch);
  EXPECT_DOUBLE_EQ(report.t_coor, slowest_projection + report.upper_seconds + slowest_dispatch);
  EXPECT_LT(report.projection_critical_seconds, total_projection);
}

TEST(Benchmark, DeeperTreeSumsAlongChains) {
  GeneratorOptions options;
  options.levels = 3;
  options.min_children = options.max_children = 2;
  const SystemTree tree = generate_tree(options, 4);
  const TimingReport report = benchmark(tree, 1);
  std::map<std::string, double> projection;
  for (const auto& n : report.nodes) projection[n.id] = n.projection_seconds;
  double expected = 0;
  for (const auto& mid : tree.children(tree.root())) {
    double below = 0;
    for (const auto& leaf : tree.children(mid)) below = std::max(below, projection.at(leaf));
    expected = std::max(expected, projection.at(mid) + below);
  }
  EXPECT_DOUBLE_EQ(report.projection_critical_seconds, expected);
}

}  // namespace
}  // namespace epcoord
