#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "epcoord/coordinator.hpp"
#include "epcoord/error.hpp"
#include "epcoord/json_io.hpp"
#include "epcoord/lp.hpp"
#include "epcoord/polytope.hpp"
#include "epcoord/projection.hpp"
#include "epcoord/system_model.hpp"

namespace epcoord {

inline constexpr std::size_t kMaxVertexDimension = 6;

/// Ground truth: the flat joint dispatch LP solved in one piece.
inline LpOutcome solve_joint(const SystemTree& tree) { return solve_lp(assemble_jod(tree)); }

namespace detail {

/// Solves the square system `matrix · z = rhs` exactly; nullopt if singular.
inline std::optional<std::vector<Scalar>> solve_square(std::vector<std::vector<Scalar>> matrix, std::vector<Scalar> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && sgn(matrix[pivot][col]) == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(matrix[pivot], matrix[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || sgn(matrix[r][col]) == 0) continue;
      const Scalar factor = matrix[r][col] / matrix[col][col];
      for (std::size_t c = col; c < n; ++c) matrix[r][c] -= factor * matrix[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<Scalar> solution(n);
  for (std::size_t i = 0; i < n; ++i) solution[i] = rhs[i] / matrix[i][i];
  return solution;
}

}  // namespace detail

/// Brute-force vertex list: every basic point obtained by making `dim` rows
/// tight with an invertible coefficient block, filtered by membership.
inline std::vector<Assignment> enumerate_vertices(const Polytope& p) {
  const std::size_t dim = p.variables.size();
  if (dim > kMaxVertexDimension)
    throw Error(ErrorKind::DimensionTooLarge, "vertex enumeration is limited to " + std::to_string(kMaxVertexDimension) +
                                                  " variables, got " + std::to_string(dim));
  if (p.empty) return {};
  if (dim == 0) return contains(p, {}) ? std::vector<Assignment>{Assignment{}} : std::vector<Assignment>{};

  std::vector<std::vector<Scalar>> dense;
  for (const auto& row : p.rows) {
    std::vector<Scalar> coefficients(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (auto it = row.coefficients.find(p.variables[j]); it != row.coefficients.end()) coefficients[j] = it->second;
    }
    dense.push_back(std::move(coefficients));
  }

  std::set<std::vector<Scalar>> seen;
  std::vector<Assignment> vertices;
  const std::size_t m = p.rows.size();
  if (m < dim) return vertices;
  std::vector<std::size_t> pick(dim);
  for (std::size_t i = 0; i < dim; ++i) pick[i] = i;
  for (;;) {
    std::vector<std::vector<Scalar>> matrix;
    std::vector<Scalar> rhs;
    for (std::size_t i : pick) {
      matrix.push_back(dense[i]);
      rhs.push_back(p.rows[i].rhs);
    }
    if (auto solution = detail::solve_square(std::move(matrix), std::move(rhs)); solution && !seen.contains(*solution)) {
      Assignment point;
      for (std::size_t j = 0; j < dim; ++j) point.emplace(p.variables[j], (*solution)[j]);
      if (contains(p, point)) {
        seen.insert(*solution);
        vertices.push_back(std::move(point));
      }
    }
    // Next combination in lexicographic order.
    std::size_t k = dim;
    while (k > 0 && pick[k - 1] == m - dim + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t i = k; i < dim; ++i) pick[i] = pick[i - 1] + 1;
  }
  return vertices;
}

struct VerificationReport {
  bool passed = true;
  std::size_t samples_checked = 0;
  std::size_t vertices_checked = 0;
  /// Points where membership in the projection and feasibility of the
  /// region disagree.
  std::vector<Assignment> counterexamples;
};

namespace detail {

inline bool feasible_with_fixed(const Polytope& region, const Assignment& point) {
  const Polytope rest = fix_variables(region, point);
  if (rest.empty) return false;
  if (rest.variables.empty()) return true;
  return check_feasible(to_constraints(rest), rest.variables).has_value();
}

/// Sampling window for one coordinate: the exact extent widened by 10% of
/// its width on each side, with a fallback width for flat or open sides.
inline std::pair<Scalar, Scalar> sampling_window(const Interval& extent) {
  Scalar lo = extent.lower.value_or(extent.upper ? *extent.upper - 10 : Scalar(-10));
  Scalar hi = extent.upper.value_or(lo + 10);
  Scalar width = hi - lo;
  if (sgn(width) == 0) width = 1;
  const Scalar margin = width / 10;
  return {lo - margin, hi + margin};
}

}  // namespace detail

/// Checks both directions of the projection property on sampled points:
/// a point lies in `ep` iff the region admits internal values for it.
/// Vertices of small regions are also projected and tested against `ep`.
/// Samples are rational points on a jittered grid with denominators <= 64.
inline VerificationReport verify_projection(const OfrPolytope& ofr, const EpModel& ep, std::size_t samples,
                                            std::uint64_t seed) {
  VerificationReport report;
  const Polytope& region = ofr.polytope;
  const std::vector<std::string>& space = ep.polytope.variables;

  std::map<std::string, Interval> box;
  try {
    box = bounding_box(ep.polytope.empty ? project_onto(region, space) : ep.polytope);
  } catch (const Error&) {
    for (const auto& v : space) box[v] = Interval{};
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> denominator(1, 64);
  for (std::size_t s = 0; s < samples; ++s) {
    Assignment point;
    for (const auto& v : space) {
      const auto [lo, hi] = detail::sampling_window(box.at(v));
      const int q = denominator(rng);
      const int k = std::uniform_int_distribution<int>(0, q)(rng);
      point[v] = lo + (hi - lo) * ratio(k, q);
    }
    ++report.samples_checked;
    if (contains(ep.polytope, point) != detail::feasible_with_fixed(region, point)) {
      report.passed = false;
      report.counterexamples.push_back(std::move(point));
    }
  }

  if (region.variables.size() <= kMaxVertexDimension) {
    for (const auto& vertex : enumerate_vertices(region)) {
      Assignment shadow;
      for (const auto& v : space) shadow[v] = vertex.at(v);
      ++report.vertices_checked;
      if (!contains(ep.polytope, shadow)) {
        report.passed = false;
        report.counterexamples.push_back(std::move(shadow));
      }
    }
  }
  return report;
}

struct ComparisonReport {
  LpStatus jod_status = LpStatus::Infeasible;
  LpStatus coordinated_status = LpStatus::Infeasible;
  std::optional<Scalar> jod_value;
  std::optional<Scalar> coordinated_value;
  /// Exact equality of the two optimal values.
  bool values_equal = false;
  /// Same status, and equal values when optimal.
  bool outcomes_agree = false;
  bool jod_assignment_feasible_for_tree = false;
  bool coordinated_assignment_feasible_for_flat_lp = false;
  /// Coordinated minus joint own cost, per node.
  std::map<std::string, Scalar> cost_deltas;
  std::optional<DispatchResult> dispatch;
  std::string coordinated_diagnostic;
};

namespace detail {

/// Cost variable values implied by a flat point, filled bottom-up.
inline std::map<std::string, Scalar> implied_costs(const SystemTree& tree, const Assignment& point) {
  std::map<std::string, Scalar> costs;
  for (const auto& id : tree.post_order()) {
    const AffineCost own = node_cost(tree.node(id));
    Scalar total = evaluate(own.terms, point) + own.constant;
    for (const auto& child : tree.children(id)) total += costs.at(child);
    costs[id] = total;
  }
  return costs;
}

inline bool joint_point_fits_tree(const SystemTree& tree, const Assignment& point,
                                  const std::map<std::string, EpModel>& eps) {
  for (const auto& node : tree.nodes())
    for (const auto& row : node_rows(node))
      if (!row.holds_at(point)) return false;
  const auto costs = implied_costs(tree, point);
  for (const auto& [id, ep] : eps) {
    Assignment shadow;
    for (const auto& v : coordination_variables(tree.node(id))) shadow[v] = point.at(v);
    shadow[cost_variable(id)] = costs.at(id);
    if (!contains(ep.polytope, shadow)) return false;
  }
  return true;
}

}  // namespace detail

/// Runs the joint solve and the coordinated protocol on the same tree and
/// cross-checks their values and assignments.
inline ComparisonReport compare(const SystemTree& tree) {
  ComparisonReport report;
  const LinearProgram flat = assemble_jod(tree);
  const LpOutcome joint = solve_lp(flat);
  report.jod_status = joint.status;
  report.jod_value = joint.value;

  try {
    report.dispatch = run_coordinated(tree);
    report.coordinated_status = LpStatus::Optimal;
    report.coordinated_value = report.dispatch->objective;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::InfeasibleSubsystem:
      case ErrorKind::UpperInfeasible: report.coordinated_status = LpStatus::Infeasible; break;
      case ErrorKind::UnboundedProblem: report.coordinated_status = LpStatus::Unbounded; break;
      default: throw;
    }
    report.coordinated_diagnostic = e.what();
  }

  report.values_equal = report.jod_value && report.coordinated_value && *report.jod_value == *report.coordinated_value;
  report.outcomes_agree =
      report.jod_status == report.coordinated_status && (report.jod_status != LpStatus::Optimal || report.values_equal);

  if (report.jod_status != LpStatus::Optimal || report.coordinated_status != LpStatus::Optimal) {
    // Nothing to cross-check.
    report.jod_assignment_feasible_for_tree = true;
    report.coordinated_assignment_feasible_for_flat_lp = true;
    return report;
  }

  const Assignment coordinated = report.dispatch->flat_assignment();
  report.coordinated_assignment_feasible_for_flat_lp =
      std::all_of(flat.rows.begin(), flat.rows.end(), [&](const Constraint& row) { return row.holds_at(coordinated); }) &&
      evaluate(flat.objective.terms, coordinated) + flat.objective.constant == *report.coordinated_value;
  report.jod_assignment_feasible_for_tree = detail::joint_point_fits_tree(tree, *joint.assignment, report.dispatch->eps);

  for (const auto& node : tree.nodes()) {
    const AffineCost own = node_cost(node);
    const Scalar joint_cost = evaluate(own.terms, *joint.assignment) + own.constant;
    report.cost_deltas[node.id] = report.dispatch->node(node.id).own_cost - joint_cost;
  }
  return report;
}

inline Json comparison_to_json(const ComparisonReport& report, bool with_timing = true) {
  auto value = [](const std::optional<Scalar>& v) { return v ? scalar_report(*v) : Json(nullptr); };
  Json deltas = Json::object();
  for (const auto& [id, delta] : report.cost_deltas) deltas[id] = scalar_report(delta);
  Json out{{"jod_status", std::string(to_string(report.jod_status))},
           {"coordinated_status", std::string(to_string(report.coordinated_status))},
           {"jod_value", value(report.jod_value)},
           {"coordinated_value", value(report.coordinated_value)},
           {"values_equal", report.values_equal},
           {"outcomes_agree", report.outcomes_agree},
           {"jod_assignment_feasible_for_tree", report.jod_assignment_feasible_for_tree},
           {"coordinated_assignment_feasible_for_flat_lp", report.coordinated_assignment_feasible_for_flat_lp},
           {"cost_deltas", std::move(deltas)}};
  if (!report.coordinated_diagnostic.empty()) out["coordinated_diagnostic"] = report.coordinated_diagnostic;
  if (report.dispatch) out["dispatch"] = dispatch_to_json(*report.dispatch, with_timing);
  return out;
}

// ---------------------------------------------------------------------------
// Timing

/// Problem scale: variables × constraints.
struct ModelScale {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t size() const { return variables * constraints; }
};

struct NodeTiming {
  std::string id;
  double projection_seconds = 0;
  double dispatch_seconds = 0;
  ModelScale scale;
};

/// Medians over repetitions, composed into the coordinated critical path
/// (`max` over parallel subtrees, summed along each root-to-leaf chain) and
/// compared with a single joint solve.
struct TimingReport {
  std::size_t repetitions = 0;
  std::vector<NodeTiming> nodes;
  double upper_seconds = 0;
  ModelScale upper_scale;
  double projection_critical_seconds = 0;
  double dispatch_critical_seconds = 0;
  double t_coor = 0;
  double t_jod = 0;
  ModelScale jod_scale;
};

namespace detail {

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
}

/// Longest chain of sequential per-node work below (and excluding) `id`.
inline double critical_path(const SystemTree& tree, const std::string& id, const std::map<std::string, double>& seconds) {
  double longest = 0;
  for (const auto& child : tree.children(id))
    longest = std::max(longest, seconds.at(child) + critical_path(tree, child, seconds));
  return longest;
}

inline std::size_t row_count(const std::vector<Constraint>& rows) {
  std::size_t n = 0;
  for (const auto& row : rows) n += row.relation == Relation::Equal ? 2 : 1;
  return n;
}

}  // namespace detail

inline TimingReport benchmark(const SystemTree& tree, std::size_t repetitions) {
  if (repetitions == 0) repetitions = 1;
  std::map<std::string, std::vector<double>> projection;
  std::map<std::string, std::vector<double>> dispatch;
  std::vector<double> upper;
  std::vector<double> joint;
  Stage1Result last;

  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    last = stage1_project(tree);
    for (const auto& [id, s] : last.seconds) projection[id].push_back(s);

    auto start = std::chrono::steady_clock::now();
    const LocalSolution solution = stage2_solve_upper(tree, last.eps);
    upper.push_back(detail::seconds_since(start));

    std::map<std::string, double> node_seconds;
    stage3_disaggregate(tree, last.eps, solution, &node_seconds);
    for (const auto& [id, s] : node_seconds) dispatch[id].push_back(s);

    start = std::chrono::steady_clock::now();
    solve_joint(tree);
    joint.push_back(detail::seconds_since(start));
  }

  TimingReport report;
  report.repetitions = repetitions;
  std::map<std::string, double> projection_median;
  std::map<std::string, double> dispatch_median;
  for (const auto& node : tree.nodes()) {
    if (node.id == tree.root()) continue;
    NodeTiming timing{node.id, detail::median(projection.at(node.id)), detail::median(dispatch.at(node.id)), {}};
    const OfrPolytope ofr = build_ofr(tree, node.id, detail::child_eps_of(tree, node.id, last.eps));
    timing.scale = {ofr.polytope.variables.size(), ofr.polytope.rows.size()};
    projection_median[node.id] = timing.projection_seconds;
    dispatch_median[node.id] = timing.dispatch_seconds;
    report.nodes.push_back(std::move(timing));
  }
  report.upper_seconds = detail::median(upper);
  const detail::LocalSystem root_system =
      detail::local_system(tree, tree.root(), detail::child_eps_of(tree, tree.root(), last.eps));
  report.upper_scale = {root_system.variables.size(), detail::row_count(root_system.rows)};
  report.projection_critical_seconds = detail::critical_path(tree, tree.root(), projection_median);
  report.dispatch_critical_seconds = detail::critical_path(tree, tree.root(), dispatch_median);
  report.t_coor = report.projection_critical_seconds + report.upper_seconds + report.dispatch_critical_seconds;
  report.t_jod = detail::median(joint);
  const LinearProgram flat = assemble_jod(tree);
  report.jod_scale = {flat.variables.size(), detail::row_count(flat.rows)};
  return report;
}

inline Json timing_to_json(const TimingReport& report) {
  auto scale = [](const ModelScale& s) {
    return Json{{"variables", s.variables}, {"constraints", s.constraints}, {"size", s.size()}};
  };
  Json nodes = Json::array();
  for (const auto& n : report.nodes)
    nodes.push_back({{"id", n.id},
                     {"projection_seconds", n.projection_seconds},
                     {"dispatch_seconds", n.dispatch_seconds},
                     {"scale", scale(n.scale)}});
  return Json{{"repetitions", report.repetitions},
              {"nodes", std::move(nodes)},
              {"upper_seconds", report.upper_seconds},
              {"upper_scale", scale(report.upper_scale)},
              {"projection_critical_seconds", report.projection_critical_seconds},
              {"dispatch_critical_seconds", report.dispatch_critical_seconds},
              {"t_coor", report.t_coor},
              {"t_jod", report.t_jod},
              {"jod_scale", scale(report.jod_scale)}};
}

}  // namespace epcoord
