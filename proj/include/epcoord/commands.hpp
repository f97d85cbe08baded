#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "epcoord/coordinator.hpp"
#include "epcoord/error.hpp"
#include "epcoord/generator.hpp"
#include "epcoord/json_io.hpp"
#include "epcoord/oracle.hpp"
#include "epcoord/projection.hpp"
#include "epcoord/system_model.hpp"

namespace epcoord::cli {

enum ExitCode : int { kSuccess = 0, kInfeasible = 1, kInputError = 2, kInternalError = 3 };

struct RunConfig {
  std::string input;
  /// Empty means the output stream passed to the command.
  std::string output;
  std::string mode = "coordinated";
  /// Generator spec such as "leaves=8" or "levels=3,leaves=2".
  std::string gen;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  std::size_t reps = 5;
  bool emit_eps = false;
  bool timing = true;
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InfeasibleSubsystem:
    case ErrorKind::UpperInfeasible:
    case ErrorKind::UnboundedProblem: return kInfeasible;
    case ErrorKind::InternalInconsistency: return kInternalError;
    default: return kInputError;
  }
}

inline Json error_to_json(const Error& e) {
  Json out{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (!e.node().empty()) out["node"] = e.node();
  return out;
}

/// Parses "key=value,key=value" into generator options.
inline GeneratorOptions parse_gen_spec(const std::string& spec) {
  GeneratorOptions options;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "generator option '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    std::size_t value = 0;
    try {
      value = std::stoul(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "generator option '" + item + "' needs a non-negative integer");
    }
    if (key == "leaves") {
      options.min_children = options.max_children = value;
    } else if (key == "levels") {
      options.levels = value;
    } else if (key == "min_children") {
      options.min_children = value;
    } else if (key == "max_children") {
      options.max_children = value;
    } else if (key == "coordination") {
      options.max_coordination = value;
    } else if (key == "internal") {
      options.max_internal = value;
    } else if (key == "rows") {
      options.max_rows = value;
    } else {
      throw Error(ErrorKind::ParseError, "unknown generator option '" + key + "'");
    }
  }
  if (options.levels < 1 || options.min_children < 1 || options.min_children > options.max_children ||
      options.max_coordination < 1)
    throw Error(ErrorKind::ParseError, "generator options out of range: '" + spec + "'");
  return options;
}

namespace detail {

inline SystemTree load_input(const RunConfig& config) {
  if (!config.gen.empty()) return generate_tree(parse_gen_spec(config.gen), config.seed);
  if (config.input.empty()) throw Error(ErrorKind::ParseError, "no --input given");
  return load_system(config.input);
}

inline void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (config.output.empty()) {
    out << text << '\n';
    return;
  }
  std::ofstream file(config.output);
  if (!file) throw Error(ErrorKind::ParseError, "cannot write '" + config.output + "'");
  file << text << '\n';
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << Json{{"error", error_to_json(e)}}.dump(2) << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << Json{{"error", {{"kind", "InternalInconsistency"}, {"message", e.what()}}}}.dump(2) << '\n';
    return kInternalError;
  }
}

}  // namespace detail

inline int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const SystemTree tree = detail::load_input(config);
    Json report{{"valid", true},
                {"name", tree.name()},
                {"nodes", tree.nodes().size()},
                {"edges", tree.edge_count()},
                {"depth", tree.depth()},
                {"root", tree.root()},
                {"root_children", tree.children(tree.root()).size()}};
    detail::emit(config, report.dump(2), out);
    return int(kSuccess);
  });
}

inline int cmd_project(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const SystemTree tree = detail::load_input(config);
    const Stage1Result stage1 = stage1_project(tree);
    Json eps = Json::array();
    Json checks = Json::array();
    bool all_passed = true;
    for (const auto& id : tree.post_order()) {
      auto it = stage1.eps.find(id);
      if (it == stage1.eps.end()) continue;
      eps.push_back(ep_to_json(it->second));
      if (config.samples == 0) continue;
      const OfrPolytope ofr = build_ofr(tree, id, epcoord::detail::child_eps_of(tree, id, stage1.eps));
      const VerificationReport check = verify_projection(ofr, it->second, config.samples, config.seed);
      all_passed = all_passed && check.passed;
      checks.push_back({{"node", id},
                        {"passed", check.passed},
                        {"samples", check.samples_checked},
                        {"vertices", check.vertices_checked},
                        {"counterexamples", check.counterexamples.size()}});
    }
    Json report{{"name", tree.name()}, {"eps", std::move(eps)}};
    if (config.samples > 0) report["verification"] = std::move(checks);
    detail::emit(config, report.dump(2), out);
    return int(all_passed ? kSuccess : kInternalError);
  });
}

inline int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const SystemTree tree = detail::load_input(config);
    if (config.mode == "joint") {
      const LpOutcome outcome = solve_joint(tree);
      Json report{{"mode", "joint"}, {"status", std::string(to_string(outcome.status))}};
      if (outcome.optimal()) {
        report["objective"] = scalar_report(*outcome.value);
        Json assignment = Json::object();
        for (const auto& [name, value] : *outcome.assignment) assignment[name] = scalar_report(value);
        report["assignment"] = std::move(assignment);
      }
      detail::emit(config, report.dump(2), out);
      return int(outcome.optimal() ? kSuccess : kInfeasible);
    }
    if (config.mode == "coordinated") {
      const DispatchResult result = run_coordinated(tree);
      Json report = dispatch_to_json(result, config.timing, config.emit_eps);
      report["mode"] = "coordinated";
      detail::emit(config, report.dump(2), out);
      return int(kSuccess);
    }
    if (config.mode == "compare") {
      const ComparisonReport comparison = compare(tree);
      Json report = comparison_to_json(comparison, config.timing);
      report["mode"] = "compare";
      detail::emit(config, report.dump(2), out);
      const bool ok = comparison.outcomes_agree && comparison.jod_status == LpStatus::Optimal &&
                      comparison.jod_assignment_feasible_for_tree &&
                      comparison.coordinated_assignment_feasible_for_flat_lp;
      return int(ok ? kSuccess : kInfeasible);
    }
    throw Error(ErrorKind::ParseError, "unknown mode '" + config.mode + "' (joint, coordinated, compare)");
  });
}

inline int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (config.reps < 1) throw Error(ErrorKind::ParseError, "--reps must be at least 1");
    const SystemTree tree = detail::load_input(config);
    Json report = timing_to_json(benchmark(tree, config.reps));
    report["name"] = tree.name();
    detail::emit(config, report.dump(2), out);
    return int(kSuccess);
  });
}

inline int cmd_gen(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const GeneratorOptions options = parse_gen_spec(config.gen);
    detail::emit(config, serialize_system(generate_tree(options, config.seed)), out);
    return int(kSuccess);
  });
}

}  // namespace epcoord::cli
