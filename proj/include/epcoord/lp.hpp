#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "epcoord/error.hpp"
#include "epcoord/scalar.hpp"

namespace epcoord {

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };

inline std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
  }
  return "?";
}

/// One linear relation `terms (relation) rhs`.
struct Constraint {
  Terms terms;
  Relation relation = Relation::LessEqual;
  Scalar rhs;

  bool holds_at(const Assignment& point) const {
    const Scalar lhs = evaluate(terms, point);
    switch (relation) {
      case Relation::LessEqual: return lhs <= rhs;
      case Relation::Equal: return lhs == rhs;
      case Relation::GreaterEqual: return lhs >= rhs;
    }
    return false;
  }
};

struct Objective {
  Terms terms;
  Scalar constant;
  Sense sense = Sense::Minimize;
};

struct LinearProgram {
  std::vector<std::string> variables;
  Objective objective;
  std::vector<Constraint> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  std::optional<Scalar> value;
  std::optional<Assignment> assignment;

  bool optimal() const { return status == LpStatus::Optimal; }
};

namespace detail {

/// Dense two-phase simplex tableau over exact rationals.
///
/// Every declared variable is free and is split into a nonnegative pair.
/// Inequalities get one slack column each; rows whose slack cannot start in
/// the basis get an artificial column. Pivoting follows Bland's rule
/// (lowest-index entering column, lowest-index leaving basic variable among
/// ratio ties), which rules out cycling.
class SimplexTableau {
 public:
  enum class PhaseResult { Optimal, Unbounded };

  SimplexTableau(const std::vector<std::vector<Scalar>>& coefficients, const std::vector<Relation>& relations,
                 const std::vector<Scalar>& rhs, std::size_t num_vars)
      : num_vars_(num_vars) {
    const std::size_t m = coefficients.size();
    std::size_t num_slacks = 0;
    for (Relation r : relations)
      if (r != Relation::Equal) ++num_slacks;

    // Decide per row whether the slack can seed the basis after making rhs >= 0.
    std::vector<int> sign(m, 1);
    std::vector<bool> needs_artificial(m, true);
    for (std::size_t i = 0; i < m; ++i) {
      if (sgn(rhs[i]) < 0) sign[i] = -1;
      int slack_coefficient = relations[i] == Relation::LessEqual ? 1 : relations[i] == Relation::GreaterEqual ? -1 : 0;
      if (slack_coefficient * sign[i] == 1) needs_artificial[i] = false;
    }
    std::size_t num_artificial = 0;
    for (bool need : needs_artificial)
      if (need) ++num_artificial;

    first_slack_ = 2 * num_vars_;
    first_artificial_ = first_slack_ + num_slacks;
    num_cols_ = first_artificial_ + num_artificial;

    table_.assign(m, std::vector<Scalar>(num_cols_ + 1));
    basis_.assign(m, 0);
    std::size_t slack = first_slack_;
    std::size_t artificial = first_artificial_;
    for (std::size_t i = 0; i < m; ++i) {
      auto& row = table_[i];
      for (std::size_t j = 0; j < num_vars_; ++j) {
        if (sgn(coefficients[i][j]) == 0) continue;
        row[2 * j] = sign[i] * coefficients[i][j];
        row[2 * j + 1] = -row[2 * j];
      }
      if (relations[i] != Relation::Equal) {
        row[slack] = (relations[i] == Relation::LessEqual ? 1 : -1) * sign[i];
        if (!needs_artificial[i]) basis_[i] = slack;
        ++slack;
      }
      if (needs_artificial[i]) {
        row[artificial] = 1;
        basis_[i] = artificial++;
      }
      row[num_cols_] = sign[i] * rhs[i];
    }
  }

  /// Phase one. Returns false when the constraint system is infeasible.
  bool find_feasible_basis() {
    std::vector<Scalar> cost(num_cols_);
    for (std::size_t j = first_artificial_; j < num_cols_; ++j) cost[j] = 1;
    run_phase(cost, num_cols_);
    Scalar infeasibility = 0;
    for (std::size_t i = 0; i < table_.size(); ++i)
      if (basis_[i] >= first_artificial_) infeasibility += table_[i][num_cols_];
    if (sgn(infeasibility) > 0) return false;

    // Drive zero-valued artificials out; rows where that is impossible are
    // linearly dependent on the others and can be dropped.
    for (std::size_t i = 0; i < table_.size();) {
      if (basis_[i] < first_artificial_) {
        ++i;
        continue;
      }
      std::size_t entering = num_cols_;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (sgn(table_[i][j]) != 0) {
          entering = j;
          break;
        }
      }
      if (entering == num_cols_) {
        table_.erase(table_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      pivot(i, entering);
      ++i;
    }
    return true;
  }

  /// Phase two for `min Σ cost_j x_j` over the structural variables.
  PhaseResult minimize(const std::vector<Scalar>& structural_cost) {
    std::vector<Scalar> cost(num_cols_);
    for (std::size_t j = 0; j < num_vars_; ++j) {
      cost[2 * j] = structural_cost[j];
      cost[2 * j + 1] = -structural_cost[j];
    }
    return run_phase(cost, first_artificial_);
  }

  std::vector<Scalar> structural_values() const {
    std::vector<Scalar> column_value(num_cols_);
    for (std::size_t i = 0; i < table_.size(); ++i) column_value[basis_[i]] = table_[i][num_cols_];
    std::vector<Scalar> values(num_vars_);
    for (std::size_t j = 0; j < num_vars_; ++j) values[j] = column_value[2 * j] - column_value[2 * j + 1];
    return values;
  }

 private:
  PhaseResult run_phase(const std::vector<Scalar>& cost, std::size_t allowed_cols) {
    const std::size_t m = table_.size();
    std::vector<Scalar> reduced(allowed_cols);
    for (;;) {
      std::size_t entering = allowed_cols;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        reduced[j] = cost[j];
        for (std::size_t i = 0; i < m; ++i) {
          if (sgn(table_[i][j]) != 0 && sgn(cost[basis_[i]]) != 0) reduced[j] -= cost[basis_[i]] * table_[i][j];
        }
        if (sgn(reduced[j]) < 0) {
          entering = j;
          break;
        }
      }
      if (entering == allowed_cols) return PhaseResult::Optimal;

      std::size_t leaving = m;
      Scalar best_ratio;
      for (std::size_t i = 0; i < m; ++i) {
        if (sgn(table_[i][entering]) <= 0) continue;
        Scalar ratio = table_[i][num_cols_] / table_[i][entering];
        if (leaving == m || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leaving])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving == m) return PhaseResult::Unbounded;
      pivot(leaving, entering);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    auto& pivot_row = table_[row];
    const Scalar inverse = 1 / pivot_row[col];
    for (auto& entry : pivot_row)
      if (sgn(entry) != 0) entry *= inverse;
    for (std::size_t i = 0; i < table_.size(); ++i) {
      if (i == row) continue;
      auto& target = table_[i];
      if (sgn(target[col]) == 0) continue;
      const Scalar factor = target[col];
      for (std::size_t j = 0; j <= num_cols_; ++j)
        if (sgn(pivot_row[j]) != 0) target[j] -= factor * pivot_row[j];
    }
    basis_[row] = col;
  }

  std::size_t num_vars_;
  std::size_t first_slack_ = 0;
  std::size_t first_artificial_ = 0;
  std::size_t num_cols_ = 0;
  std::vector<std::vector<Scalar>> table_;
  std::vector<std::size_t> basis_;
};

inline std::unordered_map<std::string, std::size_t> index_variables(const std::vector<std::string>& variables) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < variables.size(); ++j) {
    if (!index.emplace(variables[j], j).second)
      throw Error(ErrorKind::MalformedProgram, "variable '" + variables[j] + "' declared twice");
  }
  return index;
}

inline std::vector<Scalar> dense_row(const Terms& terms, const std::unordered_map<std::string, std::size_t>& index,
                                     std::size_t width) {
  std::vector<Scalar> row(width);
  for (const auto& [name, coefficient] : terms) {
    auto it = index.find(name);
    if (it == index.end()) throw Error(ErrorKind::MalformedProgram, "undeclared variable '" + name + "'");
    row[it->second] += coefficient;
  }
  return row;
}

inline SimplexTableau make_tableau(const std::vector<Constraint>& rows, const std::vector<std::string>& variables,
                                   const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<std::vector<Scalar>> coefficients;
  std::vector<Relation> relations;
  std::vector<Scalar> rhs;
  coefficients.reserve(rows.size());
  for (const auto& row : rows) {
    coefficients.push_back(dense_row(row.terms, index, variables.size()));
    relations.push_back(row.relation);
    rhs.push_back(row.rhs);
  }
  return SimplexTableau(coefficients, relations, rhs, variables.size());
}

inline Assignment to_assignment(const std::vector<std::string>& variables, const std::vector<Scalar>& values) {
  Assignment point;
  for (std::size_t j = 0; j < variables.size(); ++j) point.emplace(variables[j], values[j]);
  return point;
}

}  // namespace detail

/// Solves `lp` exactly. Any optimal vertex may be returned when the optimum
/// is not unique.
inline LpOutcome solve_lp(const LinearProgram& lp) {
  const auto index = detail::index_variables(lp.variables);
  auto cost = detail::dense_row(lp.objective.terms, index, lp.variables.size());
  auto tableau = detail::make_tableau(lp.rows, lp.variables, index);

  LpOutcome outcome;
  if (!tableau.find_feasible_basis()) {
    outcome.status = LpStatus::Infeasible;
    return outcome;
  }
  if (lp.objective.sense == Sense::Maximize)
    for (auto& c : cost) c = -c;
  if (tableau.minimize(cost) == detail::SimplexTableau::PhaseResult::Unbounded) {
    outcome.status = LpStatus::Unbounded;
    return outcome;
  }
  outcome.status = LpStatus::Optimal;
  outcome.assignment = detail::to_assignment(lp.variables, tableau.structural_values());
  outcome.value = evaluate(lp.objective.terms, *outcome.assignment) + lp.objective.constant;
  return outcome;
}

/// Phase one only: a witness point if the rows admit one, otherwise nullopt.
inline std::optional<Assignment> check_feasible(const std::vector<Constraint>& rows,
                                                const std::vector<std::string>& variables) {
  const auto index = detail::index_variables(variables);
  auto tableau = detail::make_tableau(rows, variables, index);
  if (!tableau.find_feasible_basis()) return std::nullopt;
  return detail::to_assignment(variables, tableau.structural_values());
}

}  // namespace epcoord
