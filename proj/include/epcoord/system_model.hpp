#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "epcoord/error.hpp"
#include "epcoord/json_io.hpp"
#include "epcoord/lp.hpp"
#include "epcoord/scalar.hpp"

namespace epcoord {

/// Name of the implicit cost variable every non-root node exports.
inline constexpr std::string_view kCostVariable = "pi";

struct AffineCost {
  Terms terms;
  Scalar constant;

  friend bool operator==(const AffineCost&, const AffineCost&) = default;
};

/// One subsystem as written in the model file. Term names are local:
/// a bare name is one of the node's own variables, `child.var` is a direct
/// child's coordination variable and `child.pi` a child's cost variable.
struct SubsystemNode {
  std::string id;
  std::optional<std::string> parent;
  std::vector<std::string> coordination_vars;
  std::vector<std::string> internal_vars;
  AffineCost cost;
  std::vector<Constraint> constraints;
  std::optional<Scalar> cost_bound;

  bool operator==(const SubsystemNode& other) const {
    if (id != other.id || parent != other.parent || coordination_vars != other.coordination_vars ||
        internal_vars != other.internal_vars || cost != other.cost || cost_bound != other.cost_bound ||
        constraints.size() != other.constraints.size())
      return false;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& a = constraints[i];
      const auto& b = other.constraints[i];
      if (a.terms != b.terms || a.relation != b.relation || a.rhs != b.rhs) return false;
    }
    return true;
  }
};

inline std::string qualified(const std::string& node, const std::string& var) { return node + "." + var; }
inline std::string cost_variable(const std::string& node) { return qualified(node, std::string(kCostVariable)); }

/// Validated tree of subsystems. Construction checks every structural and
/// naming invariant, so a SystemTree in hand is always well formed.
class SystemTree {
 public:
  SystemTree(std::string name, std::vector<SubsystemNode> nodes);

  const std::string& name() const { return name_; }
  const std::vector<SubsystemNode>& nodes() const { return nodes_; }
  const std::string& root() const { return root_; }
  const SubsystemNode& node(const std::string& id) const;
  const std::vector<std::string>& children(const std::string& id) const { return children_.at(id); }
  bool is_leaf(const std::string& id) const { return children(id).empty(); }

  std::size_t edge_count() const { return nodes_.size() - 1; }
  /// Number of levels; a lone root has depth 1.
  std::size_t depth() const;
  /// Children before parents; siblings in declaration order.
  std::vector<std::string> post_order() const;
  std::vector<std::string> pre_order() const;

  friend bool operator==(const SystemTree& a, const SystemTree& b) { return a.name_ == b.name_ && a.nodes_ == b.nodes_; }

 private:
  void validate_structure();
  void validate_names() const;
  void walk_post(const std::string& id, std::vector<std::string>& out) const;
  void walk_pre(const std::string& id, std::vector<std::string>& out) const;

  std::string name_;
  std::vector<SubsystemNode> nodes_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> children_;
  std::string root_;
};

namespace detail {

inline bool is_identifier(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '[' || c == ']';
  });
}

inline bool looks_nonlinear(const std::string& term) {
  return term.find_first_of("*^()/ ") != std::string::npos;
}

}  // namespace detail

inline SystemTree::SystemTree(std::string name, std::vector<SubsystemNode> nodes)
    : name_(std::move(name)), nodes_(std::move(nodes)) {
  validate_structure();
  validate_names();
}

inline const SubsystemNode& SystemTree::node(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::UnknownReference, "no node '" + id + "'");
  return nodes_[it->second];
}

inline void SystemTree::validate_structure() {
  if (nodes_.empty()) throw Error(ErrorKind::InvalidModel, "model has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!detail::is_identifier(n.id)) throw Error(ErrorKind::InvalidModel, "invalid node id '" + n.id + "'");
    if (!index_.emplace(n.id, i).second) throw Error(ErrorKind::DuplicateVariable, "duplicate node id '" + n.id + "'", n.id);
    children_[n.id];
  }
  std::vector<std::string> roots;
  for (const auto& n : nodes_) {
    if (!n.parent) {
      roots.push_back(n.id);
      continue;
    }
    if (!index_.contains(*n.parent))
      throw Error(ErrorKind::UnknownReference, "parent '" + *n.parent + "' of '" + n.id + "' does not exist", n.id);
    children_[*n.parent].push_back(n.id);
  }
  if (roots.size() > 1) throw Error(ErrorKind::MultipleRoots, "several nodes without parent: " + roots[0] + ", " + roots[1]);

  // Every node must reach the root within |nodes| steps.
  for (const auto& n : nodes_) {
    const SubsystemNode* cursor = &n;
    for (std::size_t steps = 0; cursor->parent; ++steps) {
      if (steps > nodes_.size()) throw Error(ErrorKind::CycleDetected, "parent links of '" + n.id + "' form a cycle", n.id);
      cursor = &nodes_[index_.at(*cursor->parent)];
    }
  }
  if (roots.empty()) throw Error(ErrorKind::CycleDetected, "no root: parent links form a cycle");
  root_ = roots.front();

  const auto& root = node(root_);
  if (!root.coordination_vars.empty())
    throw Error(ErrorKind::InvalidModel, "root '" + root_ + "' cannot have coordination variables", root_);
  if (root.cost_bound) throw Error(ErrorKind::InvalidModel, "root '" + root_ + "' cannot have a cost bound", root_);
}

inline void SystemTree::validate_names() const {
  for (const auto& n : nodes_) {
    std::set<std::string> own;
    for (const auto* list : {&n.coordination_vars, &n.internal_vars}) {
      for (const auto& var : *list) {
        if (!detail::is_identifier(var) || var == kCostVariable)
          throw Error(ErrorKind::InvalidModel, "invalid variable name '" + var + "' in '" + n.id + "'", n.id);
        if (!own.insert(var).second)
          throw Error(ErrorKind::DuplicateVariable, "variable '" + var + "' declared twice in '" + n.id + "'", n.id);
      }
    }

    auto check_term = [&](const std::string& term, bool allow_child_cost) {
      if (detail::looks_nonlinear(term))
        throw Error(ErrorKind::NonAffineTerm, "term '" + term + "' in '" + n.id + "' is not affine", n.id);
      auto dot = term.find('.');
      if (dot == std::string::npos) {
        if (!own.contains(term))
          throw Error(ErrorKind::UnknownReference, "'" + term + "' is not a variable of '" + n.id + "'", n.id);
        return;
      }
      const std::string child = term.substr(0, dot);
      const std::string var = term.substr(dot + 1);
      const auto& kids = children_.at(n.id);
      if (std::find(kids.begin(), kids.end(), child) == kids.end())
        throw Error(ErrorKind::UnknownReference, "'" + term + "' in '" + n.id + "' does not name a direct child", n.id);
      const auto& child_node = node(child);
      const bool is_cost = var == kCostVariable;
      const bool is_coordination =
          std::find(child_node.coordination_vars.begin(), child_node.coordination_vars.end(), var) !=
          child_node.coordination_vars.end();
      if (!(is_coordination || (is_cost && allow_child_cost)))
        throw Error(ErrorKind::UnknownReference,
                    "'" + term + "' in '" + n.id + "' is not a coordination variable of '" + child + "'", n.id);
    };

    for (const auto& [term, coefficient] : n.cost.terms) check_term(term, false);
    for (const auto& row : n.constraints)
      for (const auto& [term, coefficient] : row.terms) check_term(term, true);
  }
}

inline std::size_t SystemTree::depth() const {
  std::size_t deepest = 0;
  for (const auto& n : nodes_) {
    std::size_t level = 1;
    for (const SubsystemNode* cursor = &n; cursor->parent; cursor = &node(*cursor->parent)) ++level;
    deepest = std::max(deepest, level);
  }
  return deepest;
}

inline void SystemTree::walk_post(const std::string& id, std::vector<std::string>& out) const {
  for (const auto& child : children(id)) walk_post(child, out);
  out.push_back(id);
}

inline void SystemTree::walk_pre(const std::string& id, std::vector<std::string>& out) const {
  out.push_back(id);
  for (const auto& child : children(id)) walk_pre(child, out);
}

inline std::vector<std::string> SystemTree::post_order() const {
  std::vector<std::string> out;
  walk_post(root_, out);
  return out;
}

inline std::vector<std::string> SystemTree::pre_order() const {
  std::vector<std::string> out;
  walk_pre(root_, out);
  return out;
}

// ---------------------------------------------------------------------------
// Global naming: every variable is addressed as "<node>.<var>". A child
// reference written "child.x" in a parent is already in that form.

inline std::string global_name(const SubsystemNode& node, const std::string& term) {
  return term.find('.') == std::string::npos ? qualified(node.id, term) : term;
}

inline Terms global_terms(const SubsystemNode& node, const Terms& terms) {
  Terms out;
  for (const auto& [term, coefficient] : terms) out[global_name(node, term)] += coefficient;
  return out;
}

/// The node's own coordination then internal variables, globally named.
inline std::vector<std::string> own_variables(const SubsystemNode& node) {
  std::vector<std::string> out;
  for (const auto& v : node.coordination_vars) out.push_back(qualified(node.id, v));
  for (const auto& v : node.internal_vars) out.push_back(qualified(node.id, v));
  return out;
}

inline std::vector<std::string> coordination_variables(const SubsystemNode& node) {
  std::vector<std::string> out;
  for (const auto& v : node.coordination_vars) out.push_back(qualified(node.id, v));
  return out;
}

inline std::vector<Constraint> node_rows(const SubsystemNode& node) {
  std::vector<Constraint> out;
  for (const auto& row : node.constraints) out.push_back({global_terms(node, row.terms), row.relation, row.rhs});
  return out;
}

inline AffineCost node_cost(const SubsystemNode& node) { return {global_terms(node, node.cost.terms), node.cost.constant}; }

/// Epigraph rows of a non-root node: `C_r + Σ_children π_c − π_r <= 0` and
/// `π_r <= bound`. Child costs are aggregated so that the root objective
/// telescopes to the total cost at any depth.
inline std::vector<Constraint> epigraph_reform(const SystemTree& tree, const std::string& id, const Scalar& bound) {
  const auto& node = tree.node(id);
  const AffineCost cost = node_cost(node);
  Terms lhs = cost.terms;
  for (const auto& child : tree.children(id)) lhs[cost_variable(child)] += 1;
  lhs[cost_variable(id)] -= 1;
  std::erase_if(lhs, [](const auto& entry) { return sgn(entry.second) == 0; });
  return {
      {lhs, Relation::LessEqual, -cost.constant},
      {{{cost_variable(id), Scalar(1)}}, Relation::LessEqual, bound},
  };
}

/// The flat joint dispatch LP: every node's variables, the sum of all node
/// costs, and every node's rows.
inline LinearProgram assemble_jod(const SystemTree& tree) {
  LinearProgram lp;
  lp.objective.sense = Sense::Minimize;
  for (const auto& node : tree.nodes()) {
    for (auto& v : own_variables(node)) lp.variables.push_back(std::move(v));
    const AffineCost cost = node_cost(node);
    add_scaled(lp.objective.terms, cost.terms, 1);
    lp.objective.constant += cost.constant;
    for (auto& row : node_rows(node)) lp.rows.push_back(std::move(row));
  }
  return lp;
}

/// The flat LP after epigraph reformulation: one cost variable per non-root
/// node bounded by `bounds`, objective `C_root + Σ_{root children} π`.
inline LinearProgram assemble_epigraph_jod(const SystemTree& tree, const std::map<std::string, Scalar>& bounds) {
  LinearProgram lp;
  lp.objective.sense = Sense::Minimize;
  for (const auto& node : tree.nodes()) {
    for (auto& v : own_variables(node)) lp.variables.push_back(std::move(v));
    for (auto& row : node_rows(node)) lp.rows.push_back(std::move(row));
    if (node.id == tree.root()) {
      const AffineCost cost = node_cost(node);
      add_scaled(lp.objective.terms, cost.terms, 1);
      lp.objective.constant += cost.constant;
      for (const auto& child : tree.children(node.id)) lp.objective.terms[cost_variable(child)] += 1;
      continue;
    }
    lp.variables.push_back(cost_variable(node.id));
    auto bound = bounds.find(node.id);
    if (bound == bounds.end()) throw Error(ErrorKind::InvalidModel, "no cost bound for '" + node.id + "'", node.id);
    for (auto& row : epigraph_reform(tree, node.id, bound->second)) lp.rows.push_back(std::move(row));
  }
  return lp;
}

// ---------------------------------------------------------------------------
// File format

namespace detail {

inline const Json& require_field(const Json& object, const char* field, const std::string& where) {
  if (!object.is_object() || !object.contains(field))
    throw Error(ErrorKind::InvalidModel, where + ": missing field '" + field + "'");
  return object.at(field);
}

inline std::vector<std::string> string_list(const Json& value, const std::string& where) {
  if (!value.is_array()) throw Error(ErrorKind::InvalidModel, where + ": expected a list of names");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) throw Error(ErrorKind::InvalidModel, where + ": expected a list of names");
    out.push_back(item.get<std::string>());
  }
  return out;
}

inline Terms terms_from_json(const Json& value, const std::string& where) {
  if (!value.is_object()) throw Error(ErrorKind::InvalidModel, where + ": 'terms' must be an object");
  Terms out;
  for (const auto& [name, coefficient] : value.items()) {
    if (!coefficient.is_number() && !coefficient.is_string())
      throw Error(ErrorKind::NonAffineTerm, where + ": coefficient of '" + name + "' is not a number");
    out[name] += scalar_from_json(coefficient, where + "." + name);
  }
  return out;
}

inline Relation relation_from_json(const Json& value, const std::string& where) {
  const std::string text = value.is_string() ? value.get<std::string>() : std::string();
  if (text == "<=") return Relation::LessEqual;
  if (text == "=" || text == "==") return Relation::Equal;
  if (text == ">=") return Relation::GreaterEqual;
  throw Error(ErrorKind::InvalidModel, where + ": relation must be \"<=\", \"=\" or \">=\"");
}

inline Json terms_to_json(const Terms& terms) {
  Json out = Json::object();
  for (const auto& [name, coefficient] : terms) out[name] = scalar_to_json(coefficient);
  return out;
}

inline SubsystemNode node_from_json(const Json& value, std::size_t position) {
  const std::string where = "nodes[" + std::to_string(position) + "]";
  SubsystemNode node;
  const Json& id = require_field(value, "id", where);
  if (!id.is_string()) throw Error(ErrorKind::InvalidModel, where + ": 'id' must be a string");
  node.id = id.get<std::string>();
  const std::string at = "node '" + node.id + "'";

  if (value.contains("parent") && !value.at("parent").is_null()) {
    if (!value.at("parent").is_string()) throw Error(ErrorKind::InvalidModel, at + ": 'parent' must be a string or null");
    node.parent = value.at("parent").get<std::string>();
  }
  if (value.contains("coordination_vars")) node.coordination_vars = string_list(value.at("coordination_vars"), at);
  if (value.contains("internal_vars")) node.internal_vars = string_list(value.at("internal_vars"), at);
  if (value.contains("cost")) {
    const Json& cost = value.at("cost");
    if (!cost.is_object()) throw Error(ErrorKind::InvalidModel, at + ": 'cost' must be an object");
    if (cost.contains("terms")) node.cost.terms = terms_from_json(cost.at("terms"), at + ".cost");
    if (cost.contains("constant")) node.cost.constant = scalar_from_json(cost.at("constant"), at + ".cost.constant");
  }
  if (value.contains("constraints")) {
    const Json& rows = value.at("constraints");
    if (!rows.is_array()) throw Error(ErrorKind::InvalidModel, at + ": 'constraints' must be a list");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string row_at = at + ".constraints[" + std::to_string(i) + "]";
      Constraint row;
      row.terms = terms_from_json(require_field(rows[i], "terms", row_at), row_at);
      row.relation = relation_from_json(require_field(rows[i], "relation", row_at), row_at);
      row.rhs = scalar_from_json(require_field(rows[i], "rhs", row_at), row_at + ".rhs");
      node.constraints.push_back(std::move(row));
    }
  }
  if (value.contains("cost_bound") && !value.at("cost_bound").is_null())
    node.cost_bound = scalar_from_json(value.at("cost_bound"), at + ".cost_bound");
  return node;
}

}  // namespace detail

/// Parses and validates a model document. Decimal literals are read exactly.
inline SystemTree parse_system(const std::string& text) {
  const Json document = parse_json_exact(text);
  if (!document.is_object()) throw Error(ErrorKind::InvalidModel, "model document must be a JSON object");
  std::string name = document.contains("name") && document.at("name").is_string() ? document.at("name").get<std::string>()
                                                                                   : std::string("model");
  const Json& nodes = detail::require_field(document, "nodes", "model");
  if (!nodes.is_array()) throw Error(ErrorKind::InvalidModel, "'nodes' must be a list");
  std::vector<SubsystemNode> parsed;
  for (std::size_t i = 0; i < nodes.size(); ++i) parsed.push_back(detail::node_from_json(nodes[i], i));
  return SystemTree(std::move(name), std::move(parsed));
}

inline SystemTree load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_system(buffer.str());
}

inline Json system_to_json(const SystemTree& tree) {
  Json nodes = Json::array();
  for (const auto& node : tree.nodes()) {
    Json rows = Json::array();
    for (const auto& row : node.constraints)
      rows.push_back({{"terms", detail::terms_to_json(row.terms)},
                      {"relation", std::string(to_string(row.relation))},
                      {"rhs", scalar_to_json(row.rhs)}});
    Json out{{"id", node.id},
             {"parent", node.parent ? Json(*node.parent) : Json(nullptr)},
             {"coordination_vars", node.coordination_vars},
             {"internal_vars", node.internal_vars},
             {"cost", {{"terms", detail::terms_to_json(node.cost.terms)}, {"constant", scalar_to_json(node.cost.constant)}}},
             {"constraints", std::move(rows)}};
    if (node.cost_bound) out["cost_bound"] = scalar_to_json(*node.cost_bound);
    nodes.push_back(std::move(out));
  }
  return Json{{"name", tree.name()}, {"nodes", std::move(nodes)}};
}

inline std::string serialize_system(const SystemTree& tree) { return system_to_json(tree).dump(2); }

}  // namespace epcoord
