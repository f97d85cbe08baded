#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "epcoord/error.hpp"
#include "epcoord/json_io.hpp"
#include "epcoord/lp.hpp"
#include "epcoord/polytope.hpp"
#include "epcoord/system_model.hpp"

namespace epcoord {

/// Operation feasible region of one node: its own rows, its epigraph and,
/// for an inner node, the equivalent projections of its children.
struct OfrPolytope {
  Polytope polytope;
  std::string owner;
  /// Coordination variables followed by the cost variable.
  std::vector<std::string> exported;
  Scalar bound_used;
};

/// The equivalent projection of a node: a polytope over exactly its
/// coordination variables and its cost variable.
struct EpModel {
  Polytope polytope;
  std::string owner;
  Scalar bound_used;
};

namespace detail {

inline const EpModel& find_child_ep(const std::vector<EpModel>& child_eps, const std::string& child,
                                    const std::string& parent) {
  auto it = std::find_if(child_eps.begin(), child_eps.end(), [&](const EpModel& ep) { return ep.owner == child; });
  if (it == child_eps.end())
    throw Error(ErrorKind::InternalInconsistency, "missing projection of child '" + child + "'", parent);
  return *it;
}

/// Variables and rows a node sees before its own cost cap is added.
struct LocalSystem {
  std::vector<std::string> variables;
  std::vector<Constraint> rows;
};

inline LocalSystem local_system(const SystemTree& tree, const std::string& id, const std::vector<EpModel>& child_eps) {
  const auto& node = tree.node(id);
  if (child_eps.size() != tree.children(id).size())
    throw Error(ErrorKind::InternalInconsistency, "expected one projection per child", id);
  LocalSystem local;
  for (auto& v : coordination_variables(node)) local.variables.push_back(std::move(v));
  if (id != tree.root()) local.variables.push_back(cost_variable(id));
  for (const auto& v : node.internal_vars) local.variables.push_back(qualified(id, v));
  local.rows = node_rows(node);
  for (const auto& child : tree.children(id)) {
    const EpModel& ep = find_child_ep(child_eps, child, id);
    for (const auto& v : ep.polytope.variables) local.variables.push_back(v);
    for (auto& row : to_constraints(ep.polytope)) local.rows.push_back(std::move(row));
  }
  return local;
}

/// Left side of the epigraph: own cost plus the children's cost variables.
inline AffineCost aggregated_cost(const SystemTree& tree, const std::string& id) {
  AffineCost cost = node_cost(tree.node(id));
  for (const auto& child : tree.children(id)) cost.terms[cost_variable(child)] += 1;
  return cost;
}

}  // namespace detail

/// The cap on a node's cost variable: the explicit `cost_bound` when the
/// model gives one, otherwise the exact supremum of the epigraph's left
/// side over the node's feasible region.
inline Scalar cost_upper_bound(const SystemTree& tree, const std::string& id, const std::vector<EpModel>& child_eps) {
  const auto& node = tree.node(id);
  if (node.cost_bound) return *node.cost_bound;

  detail::LocalSystem local = detail::local_system(tree, id, child_eps);
  std::erase(local.variables, cost_variable(id));
  const AffineCost cost = detail::aggregated_cost(tree, id);
  const LpOutcome outcome = solve_lp({local.variables, {cost.terms, cost.constant, Sense::Maximize}, local.rows});
  switch (outcome.status) {
    case LpStatus::Infeasible: throw Error(ErrorKind::InfeasibleSubsystem, "constraints of '" + id + "' are infeasible", id);
    case LpStatus::Unbounded:
      throw Error(ErrorKind::UnboundedCost, "cost of '" + id + "' is unbounded above; give an explicit cost_bound", id);
    case LpStatus::Optimal: break;
  }
  return *outcome.value;
}

inline OfrPolytope build_ofr(const SystemTree& tree, const std::string& id, const std::vector<EpModel>& child_eps) {
  if (id == tree.root()) throw Error(ErrorKind::InvalidModel, "the root exports no projection", id);
  const auto& node = tree.node(id);
  OfrPolytope ofr;
  ofr.owner = id;
  ofr.exported = coordination_variables(node);
  ofr.exported.push_back(cost_variable(id));
  ofr.bound_used = cost_upper_bound(tree, id, child_eps);

  detail::LocalSystem local = detail::local_system(tree, id, child_eps);
  for (auto& row : epigraph_reform(tree, id, ofr.bound_used)) local.rows.push_back(std::move(row));
  ofr.polytope = polytope_from_constraints(local.variables, local.rows);
  if (ofr.polytope.empty || !check_feasible(to_constraints(ofr.polytope), ofr.polytope.variables))
    throw Error(ErrorKind::InfeasibleSubsystem, "operation feasible region of '" + id + "' is empty", id);
  return ofr;
}

/// Eliminates every internal variable of the region and returns the
/// irredundant canonical projection onto the exported variables.
inline EpModel compute_ep(const OfrPolytope& ofr) {
  Polytope projected = project_onto(ofr.polytope, ofr.exported);
  if (projected.empty)
    throw Error(ErrorKind::InfeasibleSubsystem, "projection of '" + ofr.owner + "' is empty", ofr.owner);
  return {canonicalize(projected), ofr.owner, ofr.bound_used};
}

/// Strips the owner prefix: "sys1.x1" becomes "x1", "sys1.pi" becomes "pi".
inline std::string local_name(const std::string& owner, const std::string& name) {
  const std::string prefix = owner + ".";
  return name.starts_with(prefix) ? name.substr(prefix.size()) : name;
}

/// Wire form of an EP: this is everything a child ever sends upward.
inline Json ep_to_json(const EpModel& ep) {
  Json variables = Json::array();
  for (const auto& v : ep.polytope.variables) variables.push_back(local_name(ep.owner, v));
  Json rows = Json::array();
  for (const auto& row : ep.polytope.rows) {
    Json terms = Json::object();
    for (const auto& [name, c] : row.coefficients) terms[local_name(ep.owner, name)] = scalar_to_json(c);
    rows.push_back({{"terms", std::move(terms)}, {"relation", "<="}, {"rhs", scalar_to_json(row.rhs)}});
  }
  return Json{{"node", ep.owner}, {"variables", std::move(variables)}, {"cost_bound", scalar_to_json(ep.bound_used)},
              {"rows", std::move(rows)}};
}

/// Inverse of ep_to_json: names are re-qualified with the owning node.
inline EpModel ep_from_json(const Json& value) {
  EpModel ep;
  ep.owner = value.at("node").get<std::string>();
  ep.bound_used = scalar_from_json(value.at("cost_bound"), "cost_bound");
  for (const auto& v : value.at("variables")) ep.polytope.variables.push_back(qualified(ep.owner, v.get<std::string>()));
  for (const auto& row : value.at("rows")) {
    Halfspace h;
    for (const auto& [name, c] : row.at("terms").items())
      h.coefficients.emplace(qualified(ep.owner, name), scalar_from_json(c, name));
    h.rhs = scalar_from_json(row.at("rhs"), "rhs");
    ep.polytope.rows.push_back(std::move(h));
  }
  return ep;
}

}  // namespace epcoord
