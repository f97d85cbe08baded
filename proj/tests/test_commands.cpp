#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "epcoord/commands.hpp"
#include "test_support.hpp"

namespace epcoord::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

template <typename Command>
Outcome run(Command command, const RunConfig& config) {
  std::ostringstream out, err;
  const int code = command(config, out, err);
  return {code, out.str(), err.str()};
}

RunConfig illustrative_config() {
  RunConfig config;
  config.input = testing::data_path("illustrative.json");
  config.timing = false;
  return config;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "epcoord-tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path path = scratch(name);
  std::ofstream(path) << text;
  return path;
}

TEST(Validate, Illustrative) {
  const Outcome r = run(cmd_validate, illustrative_config());
  EXPECT_EQ(r.code, kSuccess);
  const Json report = Json::parse(r.out);
  EXPECT_TRUE(report.at("valid").get<bool>());
  EXPECT_EQ(report.at("root_children"), 2);
  EXPECT_EQ(report.at("depth"), 2);
}

TEST(Validate, ErrorsAreStructuredOnStderr) {
  RunConfig config;
  config.input = write_file("cycle.json", R"({"nodes": [{"id": "a", "parent": "b"}, {"id": "b", "parent": "a"}]})").string();
  const Outcome r = run(cmd_validate, config);
  EXPECT_EQ(r.code, kInputError);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(Json::parse(r.err).at("error").at("kind"), "CycleDetected");

  config.input = scratch("missing.json").string();
  EXPECT_EQ(run(cmd_validate, config).code, kInputError);
  config.input.clear();
  EXPECT_EQ(run(cmd_validate, config).code, kInputError);
}

TEST(Project, EmitsExpectedRowsAndVerification) {
  RunConfig config = illustrative_config();
  config.samples = 50;
  const Outcome r = run(cmd_project, config);
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const Json report = Json::parse(r.out);
  ASSERT_EQ(report.at("eps").size(), 2u);
  const EpModel first = ep_from_json(report.at("eps")[0]);
  const EpModel second = ep_from_json(report.at("eps")[1]);
  EXPECT_EQ(first.polytope.rows, testing::phi1().rows);
  EXPECT_EQ(second.polytope.rows, testing::phi2().rows);
  for (const auto& check : report.at("verification")) EXPECT_TRUE(check.at("passed").get<bool>());

  config.samples = 0;
  EXPECT_FALSE(Json::parse(run(cmd_project, config).out).contains("verification"));
}

TEST(Project, InfeasibleLeafExitCode) {
  RunConfig config;
  config.input = write_file("infeasible.json", R"({"nodes": [{"id": "r"},
    {"id": "a", "parent": "r", "coordination_vars": ["x"], "cost_bound": 1,
     "constraints": [{"terms": {"x": 1}, "relation": "<=", "rhs": 0},
                     {"terms": {"x": 1}, "relation": ">=", "rhs": 1}]}]})")
                     .string();
  const Outcome r = run(cmd_project, config);
  EXPECT_EQ(r.code, kInfeasible);
  const Json error = Json::parse(r.err).at("error");
  EXPECT_EQ(error.at("kind"), "InfeasibleSubsystem");
  EXPECT_EQ(error.at("node"), "a");
  config.mode = "compare";
  EXPECT_EQ(run(cmd_solve, config).code, kInfeasible);
}

TEST(Solve, ModesAgreeOnIllustrative) {
  RunConfig config = illustrative_config();
  for (const char* mode : {"joint", "coordinated", "compare"}) {
    config.mode = mode;
    const Outcome r = run(cmd_solve, config);
    ASSERT_EQ(r.code, kSuccess) << mode << r.err;
    const Json report = Json::parse(r.out);
    const Json& value = report.contains("objective") ? report.at("objective") : report.at("jod_value");
    EXPECT_EQ(value.at("exact"), "17/2") << mode;
    EXPECT_DOUBLE_EQ(value.at("approx").get<double>(), 8.5);
  }
  config.mode = "sideways";
  EXPECT_EQ(run(cmd_solve, config).code, kInputError);
}

TEST(Solve, CoordinatedReport) {
  RunConfig config = illustrative_config();
  config.emit_eps = true;
  const Outcome r = run(cmd_solve, config);
  ASSERT_EQ(r.code, kSuccess);
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report.at("eps").size(), 2u);
  EXPECT_FALSE(report.contains("timing_seconds"));
  EXPECT_EQ(report.at("message_log").size(), 4u);
  for (const auto& node : report.at("nodes")) {
    if (node.at("id") == "sys1") {
      EXPECT_EQ(node.at("coordination").at("x1").at("exact"), "5/2");
      EXPECT_EQ(node.at("internal").at("y1").at("exact"), "3/2");
      EXPECT_EQ(node.at("pi").at("exact"), "4");
    }
  }
  // Byte-stable when timing is off.
  EXPECT_EQ(run(cmd_solve, config).out, r.out);
}

TEST(Solve, WritesOutputFile) {
  RunConfig config = illustrative_config();
  config.output = scratch("solve.json").string();
  const Outcome r = run(cmd_solve, config);
  ASSERT_EQ(r.code, kSuccess);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(config.output);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(Json::parse(text.str()).at("objective").at("exact"), "17/2");
}

TEST(Bench, GeneratedTree) {
  RunConfig config;
  config.gen = "leaves=8";
  config.reps = 1;
  const Outcome r = run(cmd_bench, config);
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report.at("nodes").size(), 8u);
  EXPECT_TRUE(report.contains("t_coor"));
  config.reps = 0;
  EXPECT_EQ(run(cmd_bench, config).code, kInputError);
}

TEST(Gen, DeterministicAndParsable) {
  RunConfig config;
  config.gen = "levels=3,leaves=2";
  config.seed = 11;
  const Outcome a = run(cmd_gen, config);
  const Outcome b = run(cmd_gen, config);
  ASSERT_EQ(a.code, kSuccess);
  EXPECT_EQ(a.out, b.out);
  const SystemTree tree = parse_system(a.out);
  EXPECT_EQ(tree.depth(), 3u);
  EXPECT_EQ(tree.nodes().size(), 7u);
}

TEST(GenSpec, Parsing) {
  const GeneratorOptions o = parse_gen_spec("leaves=4,levels=3,coordination=1,internal=2,rows=8");
  EXPECT_EQ(o.min_children, 4u);
  EXPECT_EQ(o.max_children, 4u);
  EXPECT_EQ(o.levels, 3u);
  EXPECT_EQ(o.max_coordination, 1u);
  EXPECT_EQ(o.max_internal, 2u);
  EXPECT_EQ(o.max_rows, 8u);
  for (const char* bad : {"leaves", "leaves=x", "colour=3", "leaves=0", "min_children=3,max_children=2"})
    EXPECT_THROW(parse_gen_spec(bad), Error) << bad;
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::ParseError), kInputError);
  EXPECT_EQ(exit_code_for(ErrorKind::UnknownReference), kInputError);
  EXPECT_EQ(exit_code_for(ErrorKind::UpperInfeasible), kInfeasible);
  EXPECT_EQ(exit_code_for(ErrorKind::InternalInconsistency), kInternalError);
}

}  // namespace
}  // namespace epcoord::cli
