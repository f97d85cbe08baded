#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "epcoord/lp.hpp"
#include "epcoord/scalar.hpp"
#include "epcoord/system_model.hpp"

namespace epcoord {

/// Shape limits for random instances.
struct GeneratorOptions {
  std::size_t levels = 2;
  std::size_t min_children = 1;
  std::size_t max_children = 3;
  std::size_t max_coordination = 2;
  std::size_t max_internal = 4;
  /// Upper limit on rows per node; must leave room for the bounding rows.
  std::size_t max_rows = 10;
};

namespace detail {

class InstanceGenerator {
 public:
  InstanceGenerator(const GeneratorOptions& options, std::uint64_t seed) : options_(options), rng_(seed) {}

  SystemTree generate(const std::string& name) {
    grow("root", std::nullopt, 1);
    for (auto& node : nodes_) add_rows(node);
    return SystemTree(name, std::move(nodes_));
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int percent) { return uniform(1, 100) <= percent; }

  /// Small value on a half-integer grid.
  Scalar small_value(int lo, int hi) {
    Scalar v = uniform(lo, hi);
    if (chance(30)) v += ratio(1, 2);
    return v;
  }

  void grow(const std::string& id, std::optional<std::string> parent, std::size_t level) {
    SubsystemNode node;
    node.id = id;
    node.parent = parent;
    const bool is_root = !parent;
    const bool is_leaf = level == options_.levels;
    const std::size_t coordination = is_root ? 0 : uniform(1, static_cast<int>(options_.max_coordination));
    const std::size_t max_internal = is_root || !is_leaf ? std::min<std::size_t>(2, options_.max_internal) : options_.max_internal;
    const std::size_t internal = uniform(is_leaf && !is_root ? 1 : 0, static_cast<int>(max_internal));
    for (std::size_t i = 1; i <= coordination; ++i) node.coordination_vars.push_back("x" + std::to_string(i));
    for (std::size_t i = 1; i <= internal; ++i) node.internal_vars.push_back("y" + std::to_string(i));
    for (const auto& v : node.coordination_vars) point_[qualified(id, v)] = small_value(0, 4);
    for (const auto& v : node.internal_vars) point_[qualified(id, v)] = small_value(0, 4);

    for (const auto& v : node.coordination_vars)
      if (int c = uniform(-1, 4); c != 0) node.cost.terms[v] = c;
    for (const auto& v : node.internal_vars)
      if (int c = uniform(-1, 4); c != 0) node.cost.terms[v] = c;
    if (chance(30)) node.cost.constant = uniform(0, 3);

    const std::size_t index = nodes_.size();
    nodes_.push_back(std::move(node));
    if (is_leaf) return;
    const int count = uniform(static_cast<int>(options_.min_children), static_cast<int>(options_.max_children));
    for (int c = 1; c <= count; ++c) {
      const std::string child = is_root ? (options_.levels == 2 ? "leaf" : "mid") + std::to_string(c)
                                        : id + "_leaf" + std::to_string(c);
      grow(child, nodes_[index].id, level + 1);
      children_[nodes_[index].id].push_back(child);
    }
  }

  /// Every row is satisfied at the planted point, so the instance is
  /// feasible; lower bounds plus one sum cap keep every node bounded.
  void add_rows(SubsystemNode& node) {
    std::vector<std::string> own;
    for (const auto& v : node.coordination_vars) own.push_back(v);
    for (const auto& v : node.internal_vars) own.push_back(v);
    std::vector<std::string> linked = own;
    for (const auto& child : children_[node.id]) {
      // Children's coordination variables are visible to the parent.
      for (const auto& v : child_coordination(child)) linked.push_back(child + "." + v);
    }
    auto value_of = [&](const std::string& local) { return point_.at(global_name(node, local)); };

    if (!own.empty()) {
      Scalar total = 0;
      Terms sum;
      for (const auto& v : own) {
        node.constraints.push_back({{{v, Scalar(1)}}, Relation::GreaterEqual, value_of(v) - small_value(0, 2)});
        sum[v] = 1;
        total += value_of(v);
      }
      node.constraints.push_back({sum, Relation::LessEqual, total + small_value(0, 3)});
    }

    const std::size_t used = node.constraints.size();
    const std::size_t room = options_.max_rows > used ? options_.max_rows - used : 0;
    std::size_t extra = std::min<std::size_t>(room, static_cast<std::size_t>(uniform(1, 3)));
    const bool couples_children = !children_[node.id].empty();
    for (std::size_t r = 0; r < extra && !linked.empty(); ++r) {
      Terms terms;
      for (const auto& v : linked)
        if (chance(60))
          if (int c = uniform(-3, 3); c != 0) terms[v] = c;
      if (couples_children && r == 0) {
        // Make sure the upper level actually constrains its children.
        for (const auto& child : children_[node.id])
          for (const auto& v : child_coordination(child)) terms[child + "." + v] = uniform(1, 2);
      }
      if (terms.empty()) continue;
      Scalar lhs = 0;
      for (const auto& [v, c] : terms) lhs += c * value_of(v);
      const int kind = uniform(1, 10);
      if (kind <= 2 || (couples_children && r == 0 && chance(50)))
        node.constraints.push_back({terms, Relation::Equal, lhs});
      else if (kind <= 6)
        node.constraints.push_back({terms, Relation::LessEqual, lhs + small_value(0, 2)});
      else
        node.constraints.push_back({terms, Relation::GreaterEqual, lhs - small_value(0, 2)});
    }
  }

  const std::vector<std::string>& child_coordination(const std::string& child) const {
    for (const auto& n : nodes_)
      if (n.id == child) return n.coordination_vars;
    static const std::vector<std::string> none;
    return none;
  }

  GeneratorOptions options_;
  std::mt19937_64 rng_;
  std::vector<SubsystemNode> nodes_;
  std::map<std::string, std::vector<std::string>> children_;
  Assignment point_;
};

}  // namespace detail

/// Random feasible, bounded tree. The same options and seed always give
/// the same tree.
inline SystemTree generate_tree(const GeneratorOptions& options, std::uint64_t seed) {
  return detail::InstanceGenerator(options, seed).generate("generated-" + std::to_string(seed));
}

/// `leaves` identical-shape leaves under one root.
inline SystemTree generate_wide_tree(std::size_t leaves, std::uint64_t seed) {
  GeneratorOptions options;
  options.levels = 2;
  options.min_children = options.max_children = leaves;
  return generate_tree(options, seed);
}

}  // namespace epcoord
