// Command-line front end: validate, project, solve, bench, gen.

#include <CLI11.hpp>

#include <iostream>

#include "epcoord/commands.hpp"

int main(int argc, char** argv) {
  using namespace epcoord::cli;

  CLI::App app{"Single-round coordinated dispatch via equivalent projection"};
  app.require_subcommand(1);

  RunConfig config;
  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* input = sub->add_option("--input,-i", config.input, "Model file (JSON)");
    if (needs_input) input->check(CLI::ExistingFile);
    sub->add_option("--output,-o", config.output, "Write the report here instead of stdout");
    sub->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Parse and validate a model file");
  add_common(validate, true);

  auto* project = app.add_subcommand("project", "Compute every node's equivalent projection");
  add_common(project, true);
  project->add_option("--samples", config.samples, "Verification samples per projection (0 disables)")
      ->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Solve jointly, by coordination, or both and compare");
  add_common(solve, true);
  solve->add_option("--mode", config.mode, "joint | coordinated | compare")
      ->check(CLI::IsMember({"joint", "coordinated", "compare"}))
      ->capture_default_str();
  solve->add_flag("--emit-eps", config.emit_eps, "Include the projections in the report");
  solve->add_flag("!--no-timing", config.timing, "Omit wall-clock fields");

  auto* bench = app.add_subcommand("bench", "Time each stage and the joint solve");
  add_common(bench, false);
  bench->add_option("--reps", config.reps, "Repetitions (median is reported)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--gen", config.gen, "Benchmark a generated tree, e.g. leaves=8");

  auto* gen = app.add_subcommand("gen", "Write a random feasible model");
  add_common(gen, false);
  gen->add_option("--gen,--spec", config.gen, "Shape, e.g. leaves=3 or levels=3,leaves=2")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kInputError;
  }

  if (validate->parsed()) return cmd_validate(config, std::cout, std::cerr);
  if (project->parsed()) return cmd_project(config, std::cout, std::cerr);
  if (solve->parsed()) return cmd_solve(config, std::cout, std::cerr);
  if (bench->parsed()) return cmd_bench(config, std::cout, std::cerr);
  if (gen->parsed()) return cmd_gen(config, std::cout, std::cerr);
  return kInputError;
}
