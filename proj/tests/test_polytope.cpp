#include <gtest/gtest.h>

#include "epcoord/oracle.hpp"
#include "epcoord/polytope.hpp"
#include "epcoord/projection.hpp"
#include "test_support.hpp"

namespace epcoord {
namespace {

using testing::phi1;
using testing::phi2;
using testing::q;
using testing::row;

std::vector<Halfspace> rows_of(const Polytope& p) { return p.rows; }

Polytope sys_region(const std::string& id) {
  const SystemTree tree = testing::illustrative();
  return build_ofr(tree, id, {}).polytope;
}

TEST(Fme, SinglePairCombination) {
  const Polytope p{{"x", "y"}, {row({{"x", q(1)}, {"y", q(-1)}}, q(0)), row({{"y", q(1)}}, q(2))}, false};
  const Polytope out = fme_eliminate(p, "y");
  EXPECT_EQ(out.variables, std::vector<std::string>{"x"});
  EXPECT_EQ(rows_of(canonicalize(out)), rows_of(canonicalize(Polytope{{"x"}, {row({{"x", q(1)}}, q(2))}, false})));
}

TEST(Fme, UnknownVariable) {
  const Polytope p{{"x"}, {row({{"x", q(1)}}, q(2))}, false};
  try {
    fme_eliminate(p, "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownVariable);
  }
}

TEST(Fme, FirstAreaProjectsToExpectedRows) {
  const Polytope omega = sys_region("sys1");
  const Polytope out = canonicalize(remove_redundant(fme_eliminate(omega, "sys1.y1")));
  EXPECT_EQ(out.variables, (std::vector<std::string>{"sys1.x1", "sys1.pi"}));
  EXPECT_EQ(rows_of(out), rows_of(phi1()));
  EXPECT_EQ(out.rows.size(), 5u);
}

TEST(RemoveRedundant, DominatedBound) {
  const Polytope p{{"x"}, {row({{"x", q(1)}}, q(1)), row({{"x", q(1)}}, q(2))}, false};
  const Polytope out = remove_redundant(p);
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_EQ(out.rows[0].rhs, 1);
}

TEST(RemoveRedundant, SecondAreaRawEliminationMatchesExpectedRows) {
  const Polytope raw = fme_eliminate(sys_region("sys2"), "sys2.y2");
  EXPECT_GT(raw.rows.size(), 5u);
  const Polytope out = canonicalize(remove_redundant(raw));
  EXPECT_EQ(rows_of(out), rows_of(phi2()));
  // Printed form keeps the even coefficient on the cost variable.
  bool found = false;
  for (const auto& r : out.rows)
    found |= r.coefficients == Terms{{"sys2.x2", q(3)}, {"sys2.pi", q(-2)}} && r.rhs == -3;
  EXPECT_TRUE(found);
}

TEST(RemoveRedundant, EmptyInputIsFlagged) {
  const Polytope p{{"x"}, {row({{"x", q(1)}}, q(1)), row({{"x", q(-1)}}, q(-2))}, false};
  const Polytope out = remove_redundant(p);
  EXPECT_TRUE(out.empty);
  EXPECT_TRUE(out.rows.empty());
}

TEST(RemoveRedundant, KeepsBothRowsOfAnEquality) {
  const Polytope p{{"x", "y"},
                   {row({{"x", q(1)}, {"y", q(1)}}, q(1)), row({{"x", q(-1)}, {"y", q(-1)}}, q(-1)),
                    row({{"x", q(-1)}}, q(0)), row({{"y", q(-1)}}, q(0)), row({{"x", q(1)}}, q(5))},
                   false};
  const Polytope out = remove_redundant(p);
  EXPECT_EQ(out.rows.size(), 4u);
}

TEST(Canonicalize, Scaling) {
  const Polytope out = canonicalize(Polytope{{"x"}, {row({{"x", q(2)}}, q(4))}, false});
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_EQ(out.rows[0].coefficients.at("x"), 1);
  EXPECT_EQ(out.rows[0].rhs, 2);
}

TEST(Canonicalize, OrderAndDuplicatesDoNotMatter) {
  Polytope a = phi1();
  Polytope b = a;
  std::reverse(b.rows.begin(), b.rows.end());
  for (auto& [name, c] : b.rows[0].coefficients) c *= q(7, 3);
  b.rows[0].rhs *= q(7, 3);
  b.rows.push_back(b.rows[1]);
  EXPECT_EQ(rows_of(canonicalize(b)), rows_of(a));
  EXPECT_EQ(rows_of(canonicalize(a)), rows_of(a));
}

TEST(Contains, ExpectedProjection) {
  EXPECT_TRUE(contains(phi1(), {{"sys1.x1", q(5, 2)}, {"sys1.pi", q(4)}}));
  EXPECT_FALSE(contains(phi1(), {{"sys1.x1", q(3)}, {"sys1.pi", q(4)}}));
  try {
    contains(phi1(), {{"sys1.x1", q(1)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingCoordinate);
  }
}

TEST(Contains, FeasibilityWitness) {
  testing::PolytopeGen gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Polytope p = gen.polytope(3, 4);
    const auto witness = check_feasible(to_constraints(p), p.variables);
    ASSERT_TRUE(witness.has_value());
    EXPECT_TRUE(contains(p, *witness));
  }
}

TEST(BoundingBox, ExpectedProjection) {
  const auto box = bounding_box(phi1());
  EXPECT_EQ(box.at("sys1.x1").lower, q(1));
  EXPECT_EQ(box.at("sys1.x1").upper, q(3));
  EXPECT_EQ(box.at("sys1.pi").lower, q(2));
  EXPECT_EQ(box.at("sys1.pi").upper, q(7));
}

TEST(BoundingBox, HalfLineAndEmpty) {
  const auto box = bounding_box(Polytope{{"x"}, {row({{"x", q(1)}}, q(1))}, false});
  EXPECT_FALSE(box.at("x").lower.has_value());
  EXPECT_EQ(box.at("x").upper, q(1));
  const Polytope empty{{"x"}, {row({{"x", q(1)}}, q(1)), row({{"x", q(-1)}}, q(-2))}, false};
  try {
    bounding_box(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyPolytope);
  }
}

// Random polytopes: one elimination step is an exact projection.
class RandomFme : public ::testing::TestWithParam<int> {};

TEST_P(RandomFme, MembershipMatchesFeasibilityOracle) {
  testing::PolytopeGen gen(static_cast<std::uint64_t>(1000 + GetParam()));
  const Polytope p = gen.polytope(3, static_cast<std::size_t>(gen.uniform(1, 5)), GetParam() % 4 == 0);
  const Polytope out = fme_eliminate(p, "z1");
  const Polytope pruned = remove_redundant(out);
  for (int s = 0; s < 100; ++s) {
    const Assignment point = gen.point(out.variables);
    const bool expected = testing::completion_exists(p, point);
    EXPECT_EQ(contains(out, point), expected);
    EXPECT_EQ(contains(pruned, point), expected);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomFme, ::testing::Range(0, 20));

// Every surviving row of remove_redundant is needed: dropping it enlarges
// the set, which an LP over the remaining rows certifies.
class RandomRedundancy : public ::testing::TestWithParam<int> {};

TEST_P(RandomRedundancy, SurvivorsAreIrredundantAndSetIsUnchanged) {
  testing::PolytopeGen gen(static_cast<std::uint64_t>(2000 + GetParam()));
  Polytope p = gen.polytope(static_cast<std::size_t>(gen.uniform(2, 4)), static_cast<std::size_t>(gen.uniform(2, 6)));
  // Add implied rows: loosened sums of existing rows.
  const std::size_t original = p.rows.size();
  for (int extra = 0; extra < 3; ++extra) {
    const Halfspace& a = p.rows[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(original) - 1))];
    const Halfspace& b = p.rows[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(original) - 1))];
    Halfspace sum = a;
    add_scaled(sum.coefficients, b.coefficients, q(1));
    sum.rhs += b.rhs + gen.grid(0, 1);
    if (!sum.coefficients.empty()) p.rows.push_back(sum);
  }
  const Polytope out = remove_redundant(p);
  ASSERT_FALSE(out.empty);
  EXPECT_LE(out.rows.size(), p.rows.size());

  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    LinearProgram lp{out.variables, {out.rows[i].coefficients, 0, Sense::Maximize}, {}};
    for (std::size_t k = 0; k < out.rows.size(); ++k)
      if (k != i) lp.rows.push_back({out.rows[k].coefficients, Relation::LessEqual, out.rows[k].rhs});
    const LpOutcome outcome = solve_lp(lp);
    EXPECT_TRUE(outcome.status == LpStatus::Unbounded || *outcome.value > out.rows[i].rhs) << "row " << i;
  }
  for (int s = 0; s < 100; ++s) {
    const Assignment point = gen.point(p.variables);
    EXPECT_EQ(contains(out, point), contains(p, point));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomRedundancy, ::testing::Range(0, 20));

class RandomProjection : public ::testing::TestWithParam<int> {};

TEST_P(RandomProjection, MultiStepProjectionIsExact) {
  testing::PolytopeGen gen(static_cast<std::uint64_t>(3000 + GetParam()));
  const Polytope p = gen.polytope(4, static_cast<std::size_t>(gen.uniform(2, 5)), GetParam() % 3 == 0);
  const std::vector<std::string> keep{"z0", "z3"};
  const Polytope out = project_onto(p, keep);
  EXPECT_EQ(out.variables, keep);
  for (int s = 0; s < 100; ++s) {
    const Assignment point = gen.point(keep);
    EXPECT_EQ(contains(out, point), testing::completion_exists(p, point));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomProjection, ::testing::Range(0, 20));

TEST(ProjectOnto, RejectsUnknownKeep) {
  const Polytope p{{"x"}, {row({{"x", q(1)}}, q(1))}, false};
  EXPECT_THROW(project_onto(p, {"ghost"}), Error);
}

// A region and anything with the same projection export the same EP:
// the projection alone, and the projection times an unrelated interval.
TEST(Privacy, DifferentRegionsWithSameProjectionExportIdenticalBytes) {
  for (const char* id : {"sys1", "sys2"}) {
    const SystemTree tree = testing::illustrative();
    const OfrPolytope omega = build_ofr(tree, id, {});
    const EpModel ep = compute_ep(omega);

    OfrPolytope bare = omega;
    bare.polytope = ep.polytope;
    std::reverse(bare.polytope.rows.begin(), bare.polytope.rows.end());

    OfrPolytope padded = omega;
    padded.polytope = ep.polytope;
    const std::string dummy = std::string(id) + ".secret";
    padded.polytope.variables.push_back(dummy);
    padded.polytope.rows.push_back(row({{dummy, q(1)}}, q(1)));
    padded.polytope.rows.push_back(row({{dummy, q(-1)}}, q(0)));

    const std::string a = ep_to_json(ep).dump();
    EXPECT_EQ(ep_to_json(compute_ep(bare)).dump(), a);
    EXPECT_EQ(ep_to_json(compute_ep(padded)).dump(), a);
    EXPECT_EQ(a.find("y1"), std::string::npos);
    EXPECT_EQ(a.find("y2"), std::string::npos);
  }
}

}  // namespace
}  // namespace epcoord
