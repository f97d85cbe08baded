#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epcoord/error.hpp"
#include "epcoord/json_io.hpp"
#include "epcoord/lp.hpp"
#include "epcoord/polytope.hpp"
#include "epcoord/projection.hpp"
#include "epcoord/system_model.hpp"

namespace epcoord {

enum class MessageKind { EpUp, CommandDown };

inline std::string_view to_string(MessageKind kind) { return kind == MessageKind::EpUp ? "EpUp" : "CommandDown"; }

/// One in-process exchange between a node and its parent.
struct Message {
  std::string from;
  std::string to;
  MessageKind kind;
  /// Rows for an EpUp, scalars for a CommandDown.
  std::size_t payload_size = 0;
  /// Every variable name that crossed the edge.
  std::vector<std::string> payload_variables;
};

/// Dispatch command published to a child: values for its coordination
/// variables plus the cost it is allowed to incur.
struct Command {
  Assignment coordination;
  Scalar cost;
};

struct NodeDispatch {
  std::string id;
  Assignment coordination;
  std::optional<Scalar> cost_command;
  Assignment internal;
  /// C_r at the dispatched point.
  Scalar own_cost;
  /// own_cost plus the children's commanded costs; equals the command at
  /// the optimum.
  Scalar realized_cost;
};

struct DispatchResult {
  std::vector<NodeDispatch> nodes;
  Scalar objective;
  std::vector<Message> message_log;
  std::map<std::string, EpModel> eps;
  double stage1_seconds = 0;
  double stage2_seconds = 0;
  double stage3_seconds = 0;

  const NodeDispatch& node(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return n;
    throw Error(ErrorKind::UnknownReference, "no dispatch for '" + id + "'");
  }

  /// Every node's own variables under their global names.
  Assignment flat_assignment() const {
    Assignment out;
    for (const auto& n : nodes) {
      out.insert(n.coordination.begin(), n.coordination.end());
      out.insert(n.internal.begin(), n.internal.end());
    }
    return out;
  }
};

struct Stage1Result {
  std::map<std::string, EpModel> eps;
  std::vector<Message> log;
  std::map<std::string, double> seconds;
};

/// Solution of one node's local coordination problem.
struct LocalSolution {
  Assignment coordination;
  Assignment internal;
  std::map<std::string, Command> child_commands;
  Scalar own_cost;
  Scalar objective;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::vector<EpModel> child_eps_of(const SystemTree& tree, const std::string& id,
                                         const std::map<std::string, EpModel>& eps) {
  std::vector<EpModel> out;
  for (const auto& child : tree.children(id)) {
    auto it = eps.find(child);
    if (it == eps.end()) throw Error(ErrorKind::InternalInconsistency, "no projection for '" + child + "'", id);
    out.push_back(it->second);
  }
  return out;
}

}  // namespace detail

/// Bottom-up pass: every non-root node builds its region from its
/// children's projections and exports its own projection.
inline Stage1Result stage1_project(const SystemTree& tree) {
  Stage1Result result;
  for (const auto& id : tree.post_order()) {
    if (id == tree.root()) continue;
    const auto start = std::chrono::steady_clock::now();
    const OfrPolytope ofr = build_ofr(tree, id, detail::child_eps_of(tree, id, result.eps));
    EpModel ep = compute_ep(ofr);
    result.seconds[id] = detail::seconds_since(start);

    Message message{id, *tree.node(id).parent, MessageKind::EpUp, ep.polytope.rows.size(), {}};
    for (const auto& v : ep.polytope.variables) message.payload_variables.push_back(v);
    result.log.push_back(std::move(message));
    result.eps.emplace(id, std::move(ep));
  }
  return result;
}

/// Minimizes `C_r + Σ π_c` over the node's rows and its children's
/// projections. With a command the node's coordination variables are fixed
/// and the total is capped by the commanded cost; without one (the root)
/// the problem is the upper-level coordination problem.
inline LocalSolution solve_local(const SystemTree& tree, const std::string& id, const std::map<std::string, EpModel>& eps,
                                 const std::optional<Command>& command) {
  const auto& node = tree.node(id);
  detail::LocalSystem local = detail::local_system(tree, id, detail::child_eps_of(tree, id, eps));
  std::erase(local.variables, cost_variable(id));
  const AffineCost total = detail::aggregated_cost(tree, id);
  if (command) {
    for (const auto& v : coordination_variables(node)) {
      auto it = command->coordination.find(v);
      if (it == command->coordination.end())
        throw Error(ErrorKind::InternalInconsistency, "command lacks '" + v + "'", id);
      local.rows.push_back({{{v, Scalar(1)}}, Relation::Equal, it->second});
    }
    local.rows.push_back({total.terms, Relation::LessEqual, command->cost - total.constant});
  }

  const LpOutcome outcome = solve_lp({local.variables, {total.terms, total.constant, Sense::Minimize}, local.rows});
  if (!outcome.optimal()) {
    if (command)
      throw Error(ErrorKind::InternalInconsistency,
                  "local dispatch of '" + id + "' is " + std::string(to_string(outcome.status)) + " under its command", id);
    if (outcome.status == LpStatus::Infeasible)
      throw Error(ErrorKind::UpperInfeasible, "upper-level problem at '" + id + "' is infeasible", id);
    throw Error(ErrorKind::UnboundedProblem, "upper-level problem at '" + id + "' is unbounded", id);
  }

  const Assignment& point = *outcome.assignment;
  LocalSolution solution;
  for (const auto& v : coordination_variables(node)) solution.coordination[v] = point.at(v);
  for (const auto& v : node.internal_vars) solution.internal[qualified(id, v)] = point.at(qualified(id, v));
  for (const auto& child : tree.children(id)) {
    Command down;
    for (const auto& v : coordination_variables(tree.node(child))) down.coordination[v] = point.at(v);
    down.cost = point.at(cost_variable(child));
    solution.child_commands.emplace(child, std::move(down));
  }
  const AffineCost own = node_cost(node);
  solution.own_cost = evaluate(own.terms, point) + own.constant;
  solution.objective = *outcome.value;
  return solution;
}

/// The root's coordination problem with the children's projections as
/// constraints.
inline LocalSolution stage2_solve_upper(const SystemTree& tree, const std::map<std::string, EpModel>& eps) {
  return solve_local(tree, tree.root(), eps, std::nullopt);
}

/// Top-down pass: every node receives its command, solves its local dispatch
/// and forwards commands to its own children.
inline DispatchResult stage3_disaggregate(const SystemTree& tree, const std::map<std::string, EpModel>& eps,
                                          const LocalSolution& upper, std::map<std::string, double>* node_seconds = nullptr) {
  DispatchResult result;
  result.objective = upper.objective;

  std::map<std::string, Command> pending;
  auto record = [&](const std::string& id, const LocalSolution& solution, std::optional<Scalar> command_cost) {
    NodeDispatch dispatch{id, solution.coordination, command_cost, solution.internal, solution.own_cost, solution.own_cost};
    for (const auto& [child, command] : solution.child_commands) {
      dispatch.realized_cost += command.cost;
      Message message{id, child, MessageKind::CommandDown, command.coordination.size() + 1, {}};
      for (const auto& [name, value] : command.coordination) message.payload_variables.push_back(name);
      message.payload_variables.push_back(cost_variable(child));
      result.message_log.push_back(std::move(message));
      pending[child] = command;
    }
    result.nodes.push_back(std::move(dispatch));
  };

  for (const auto& id : tree.pre_order()) {
    if (id == tree.root()) {
      record(id, upper, std::nullopt);
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    const Command command = pending.at(id);
    LocalSolution local = solve_local(tree, id, eps, command);
    if (node_seconds) (*node_seconds)[id] = detail::seconds_since(start);
    record(id, local, command.cost);
  }
  return result;
}

/// Single-round coordination: one projection pass up, one command pass down.
inline DispatchResult run_coordinated(const SystemTree& tree) {
  auto start = std::chrono::steady_clock::now();
  Stage1Result stage1 = stage1_project(tree);
  const double stage1_seconds = detail::seconds_since(start);

  start = std::chrono::steady_clock::now();
  const LocalSolution upper = stage2_solve_upper(tree, stage1.eps);
  const double stage2_seconds = detail::seconds_since(start);

  start = std::chrono::steady_clock::now();
  DispatchResult result = stage3_disaggregate(tree, stage1.eps, upper);
  result.stage3_seconds = detail::seconds_since(start);
  result.stage1_seconds = stage1_seconds;
  result.stage2_seconds = stage2_seconds;

  std::vector<Message> log = std::move(stage1.log);
  for (auto& m : result.message_log) log.push_back(std::move(m));
  result.message_log = std::move(log);
  result.eps = std::move(stage1.eps);
  return result;
}

namespace detail {

inline Json assignment_report(const Assignment& point, const std::string& owner) {
  Json out = Json::object();
  for (const auto& [name, value] : point) out[local_name(owner, name)] = scalar_report(value);
  return out;
}

}  // namespace detail

/// Structured report. `with_timing` off gives byte-stable output.
inline Json dispatch_to_json(const DispatchResult& result, bool with_timing = true, bool with_eps = false) {
  Json nodes = Json::array();
  for (const auto& n : result.nodes) {
    Json entry{{"id", n.id},
               {"coordination", detail::assignment_report(n.coordination, n.id)},
               {"internal", detail::assignment_report(n.internal, n.id)},
               {"own_cost", scalar_report(n.own_cost)},
               {"realized_cost", scalar_report(n.realized_cost)}};
    if (n.cost_command) entry["pi"] = scalar_report(*n.cost_command);
    nodes.push_back(std::move(entry));
  }
  Json log = Json::array();
  for (const auto& m : result.message_log)
    log.push_back({{"from", m.from},
                   {"to", m.to},
                   {"kind", std::string(to_string(m.kind))},
                   {"payload_size", m.payload_size},
                   {"payload_variables", m.payload_variables}});
  Json out{{"objective", scalar_report(result.objective)}, {"nodes", std::move(nodes)}, {"message_log", std::move(log)}};
  if (with_eps) {
    Json eps = Json::array();
    for (const auto& [id, ep] : result.eps) eps.push_back(ep_to_json(ep));
    out["eps"] = std::move(eps);
  }
  if (with_timing)
    out["timing_seconds"] = {
        {"stage1", result.stage1_seconds}, {"stage2", result.stage2_seconds}, {"stage3", result.stage3_seconds}};
  return out;
}

}  // namespace epcoord
