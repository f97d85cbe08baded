#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epcoord/error.hpp"
#include "epcoord/lp.hpp"
#include "epcoord/scalar.hpp"

namespace epcoord {

/// Half-space `Σ coefficients·z <= rhs`.
struct Halfspace {
  Terms coefficients;
  Scalar rhs;

  friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

/// H-representation over named variables. Equalities are stored as a pair of
/// opposite half-spaces. An empty set is flagged explicitly rather than being
/// encoded as a contradictory row.
struct Polytope {
  std::vector<std::string> variables;
  std::vector<Halfspace> rows;
  bool empty = false;

  friend bool operator==(const Polytope&, const Polytope&) = default;
};

/// Per-variable extent; a missing end means unbounded in that direction.
struct Interval {
  std::optional<Scalar> lower;
  std::optional<Scalar> upper;
};

namespace detail {

inline void require_declared(const Polytope& p, const Terms& terms) {
  for (const auto& [name, coefficient] : terms) {
    if (std::find(p.variables.begin(), p.variables.end(), name) == p.variables.end())
      throw Error(ErrorKind::UnknownVariable, "'" + name + "' is not a variable of the polytope");
  }
}

inline void strip_zero_coefficients(Terms& terms) {
  std::erase_if(terms, [](const auto& entry) { return sgn(entry.second) == 0; });
}

/// Drops rows `0 <= c` with c >= 0; flags the polytope empty on `0 <= c < 0`.
inline void drop_trivial_rows(Polytope& p) {
  std::vector<Halfspace> kept;
  kept.reserve(p.rows.size());
  for (auto& row : p.rows) {
    strip_zero_coefficients(row.coefficients);
    if (row.coefficients.empty()) {
      if (sgn(row.rhs) < 0) p.empty = true;
      continue;
    }
    kept.push_back(std::move(row));
  }
  p.rows = std::move(kept);
  if (p.empty) p.rows.clear();
}

/// Scales a row by a positive factor so its coefficients are coprime
/// integers. With `include_rhs` the rhs joins the integrality and gcd
/// condition, so `6x - 2y <= 3` stays as written.
inline Halfspace integer_scaled(const Halfspace& row, bool include_rhs = false) {
  mpz_class lcm_den = 1;
  mpz_class gcd_num = 0;
  auto absorb = [&](const Scalar& c) {
    if (sgn(c) == 0) return;
    mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), c.get_den_mpz_t());
    mpz_gcd(gcd_num.get_mpz_t(), gcd_num.get_mpz_t(), c.get_num_mpz_t());
  };
  for (const auto& [name, c] : row.coefficients) absorb(c);
  if (gcd_num == 0) return row;
  if (include_rhs) absorb(row.rhs);
  const Scalar scale = ratio(lcm_den, gcd_num);
  Halfspace out;
  for (const auto& [name, c] : row.coefficients)
    if (sgn(c) != 0) out.coefficients.emplace(name, c * scale);
  out.rhs = row.rhs * scale;
  return out;
}

inline Terms negated(const Terms& terms) {
  Terms out;
  for (const auto& [name, c] : terms) out.emplace(name, -c);
  return out;
}

inline std::vector<Constraint> as_constraints(const std::vector<Halfspace>& rows) {
  std::vector<Constraint> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back({row.coefficients, Relation::LessEqual, row.rhs});
  return out;
}

inline std::optional<Scalar> coefficient_of(const Halfspace& row, const std::string& var) {
  auto it = row.coefficients.find(var);
  if (it == row.coefficients.end() || sgn(it->second) == 0) return std::nullopt;
  return it->second;
}

}  // namespace detail

/// Builds a polytope from arbitrary relations: `>=` rows are negated and
/// equalities become opposite pairs.
inline Polytope polytope_from_constraints(std::vector<std::string> variables, const std::vector<Constraint>& constraints) {
  Polytope p;
  p.variables = std::move(variables);
  for (const auto& c : constraints) {
    detail::require_declared(p, c.terms);
    if (c.relation != Relation::GreaterEqual) p.rows.push_back({c.terms, c.rhs});
    if (c.relation != Relation::LessEqual) p.rows.push_back({detail::negated(c.terms), -c.rhs});
  }
  detail::drop_trivial_rows(p);
  return p;
}

inline std::vector<Constraint> to_constraints(const Polytope& p) { return detail::as_constraints(p.rows); }

/// True iff every row holds at `point`. The point must assign every variable.
inline bool contains(const Polytope& p, const Assignment& point) {
  for (const auto& name : p.variables)
    if (!point.contains(name)) throw Error(ErrorKind::MissingCoordinate, "no value for '" + name + "'");
  if (p.empty) return false;
  return std::all_of(p.rows.begin(), p.rows.end(),
                     [&](const Halfspace& row) { return evaluate(row.coefficients, point) <= row.rhs; });
}

/// Substitutes fixed values for some variables; the result lives over the rest.
inline Polytope fix_variables(const Polytope& p, const Assignment& values) {
  Polytope out;
  out.empty = p.empty;
  for (const auto& name : p.variables)
    if (!values.contains(name)) out.variables.push_back(name);
  for (const auto& row : p.rows) {
    Halfspace reduced{{}, row.rhs};
    for (const auto& [name, c] : row.coefficients) {
      if (auto it = values.find(name); it != values.end())
        reduced.rhs -= c * it->second;
      else
        reduced.coefficients.emplace(name, c);
    }
    out.rows.push_back(std::move(reduced));
  }
  detail::drop_trivial_rows(out);
  return out;
}

/// One Fourier-Motzkin step: the exact projection of `p` along `var`.
/// Output rows may be redundant.
inline Polytope fme_eliminate(const Polytope& p, const std::string& var) {
  auto it = std::find(p.variables.begin(), p.variables.end(), var);
  if (it == p.variables.end()) throw Error(ErrorKind::UnknownVariable, "cannot eliminate undeclared '" + var + "'");

  Polytope out;
  out.variables = p.variables;
  out.variables.erase(out.variables.begin() + (it - p.variables.begin()));
  out.empty = p.empty;
  if (p.empty) return out;

  std::vector<const Halfspace*> positive;
  std::vector<const Halfspace*> negative;
  for (const auto& row : p.rows) {
    auto c = detail::coefficient_of(row, var);
    if (!c) {
      Halfspace copy = row;
      copy.coefficients.erase(var);
      out.rows.push_back(std::move(copy));
    } else if (sgn(*c) > 0) {
      positive.push_back(&row);
    } else {
      negative.push_back(&row);
    }
  }
  for (const Halfspace* pos : positive) {
    const Scalar a_pos = pos->coefficients.at(var);
    for (const Halfspace* neg : negative) {
      const Scalar a_neg = -neg->coefficients.at(var);
      Halfspace combined;
      add_scaled(combined.coefficients, pos->coefficients, a_neg);
      add_scaled(combined.coefficients, neg->coefficients, a_pos);
      combined.coefficients.erase(var);
      combined.rhs = a_neg * pos->rhs + a_pos * neg->rhs;
      out.rows.push_back(detail::integer_scaled(combined));
    }
  }
  detail::drop_trivial_rows(out);
  return out;
}

/// Drops every implied row. The result describes the same set and each
/// surviving row is certified irredundant: maximizing its left side over the
/// remaining rows exceeds its rhs. Returns an Empty-flagged polytope when the
/// set is empty.
inline Polytope remove_redundant(const Polytope& p) {
  Polytope out;
  out.variables = p.variables;
  out.rows = p.rows;
  out.empty = p.empty;
  detail::drop_trivial_rows(out);
  if (out.empty) return out;

  if (!check_feasible(to_constraints(out), out.variables)) {
    out.rows.clear();
    out.empty = true;
    return out;
  }

  // Parallel rows: only the tightest survives, lowest index on ties.
  {
    std::map<Terms, std::size_t> tightest;
    std::vector<Halfspace> scaled;
    scaled.reserve(out.rows.size());
    for (const auto& row : out.rows) scaled.push_back(detail::integer_scaled(row));
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      auto [it, inserted] = tightest.emplace(scaled[i].coefficients, i);
      if (!inserted && scaled[i].rhs < scaled[it->second].rhs) it->second = i;
    }
    std::vector<bool> keep(scaled.size(), false);
    for (const auto& [direction, index] : tightest) keep[index] = true;
    std::vector<Halfspace> rows;
    for (std::size_t i = 0; i < out.rows.size(); ++i)
      if (keep[i]) rows.push_back(std::move(out.rows[i]));
    out.rows = std::move(rows);
  }

  std::vector<bool> alive(out.rows.size(), true);
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    LinearProgram lp;
    lp.variables = out.variables;
    lp.objective = {out.rows[i].coefficients, 0, Sense::Maximize};
    for (std::size_t k = 0; k < out.rows.size(); ++k)
      if (k != i && alive[k]) lp.rows.push_back({out.rows[k].coefficients, Relation::LessEqual, out.rows[k].rhs});
    const LpOutcome outcome = solve_lp(lp);
    if (outcome.status == LpStatus::Optimal && *outcome.value <= out.rows[i].rhs) alive[i] = false;
  }
  std::vector<Halfspace> rows;
  for (std::size_t i = 0; i < out.rows.size(); ++i)
    if (alive[i]) rows.push_back(std::move(out.rows[i]));
  out.rows = std::move(rows);
  return out;
}

/// Normal form for exact comparison: each row scaled by a positive factor
/// to coprime integers (coefficients and rhs together), rows sorted lexicographically by coefficient vector in variable
/// order then by rhs, duplicates merged.
inline Polytope canonicalize(const Polytope& p) {
  Polytope out;
  out.variables = p.variables;
  out.rows = p.rows;
  out.empty = p.empty;
  detail::drop_trivial_rows(out);
  if (out.empty) return out;

  struct Keyed {
    std::vector<Scalar> dense;
    Halfspace row;
  };
  std::vector<Keyed> keyed;
  for (const auto& row : out.rows) {
    Halfspace scaled = detail::integer_scaled(row, true);
    std::vector<Scalar> dense(out.variables.size() + 1);
    for (std::size_t j = 0; j < out.variables.size(); ++j) {
      if (auto c = detail::coefficient_of(scaled, out.variables[j])) dense[j] = *c;
    }
    dense.back() = scaled.rhs;
    keyed.push_back({std::move(dense), std::move(scaled)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return a.dense < b.dense; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return a.dense == b.dense; }),
              keyed.end());
  out.rows.clear();
  for (auto& k : keyed) out.rows.push_back(std::move(k.row));
  return out;
}

/// Exact per-variable extent via 2·|variables| LPs.
inline std::map<std::string, Interval> bounding_box(const Polytope& p) {
  if (p.empty || !check_feasible(to_constraints(p), p.variables))
    throw Error(ErrorKind::EmptyPolytope, "bounding box of an empty polytope");
  std::map<std::string, Interval> box;
  for (const auto& name : p.variables) {
    LinearProgram lp{p.variables, {{{name, Scalar(1)}}, 0, Sense::Minimize}, to_constraints(p)};
    Interval extent;
    if (auto low = solve_lp(lp); low.optimal()) extent.lower = *low.value;
    lp.objective.sense = Sense::Maximize;
    if (auto high = solve_lp(lp); high.optimal()) extent.upper = *high.value;
    box.emplace(name, std::move(extent));
  }
  return box;
}

namespace detail {

struct EqualityPair {
  std::size_t row;
  std::string variable;
};

/// Finds an equality (two opposite rows) that involves one of `targets`.
inline std::optional<EqualityPair> find_equality(const Polytope& p, const std::vector<std::string>& targets) {
  std::map<std::pair<Terms, Scalar>, std::size_t> seen;
  std::vector<Halfspace> scaled;
  for (const auto& row : p.rows) scaled.push_back(integer_scaled(row));
  for (std::size_t i = 0; i < scaled.size(); ++i) seen.emplace(std::pair{scaled[i].coefficients, scaled[i].rhs}, i);
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (!seen.contains({negated(scaled[i].coefficients), -scaled[i].rhs})) continue;
    for (const auto& target : targets)
      if (coefficient_of(scaled[i], target)) return EqualityPair{i, target};
  }
  return std::nullopt;
}

/// Replaces `var` everywhere using the equality carried by `p.rows[row]`.
inline Polytope substitute_equality(const Polytope& p, std::size_t row, const std::string& var) {
  const Halfspace equality = p.rows[row];
  const Scalar pivot = equality.coefficients.at(var);
  Polytope out;
  out.variables = p.variables;
  std::erase(out.variables, var);
  for (const auto& r : p.rows) {
    Halfspace reduced = r;
    if (auto c = coefficient_of(r, var)) {
      const Scalar factor = -*c / pivot;
      add_scaled(reduced.coefficients, equality.coefficients, factor);
      reduced.coefficients.erase(var);
      reduced.rhs += factor * equality.rhs;
    }
    out.rows.push_back(std::move(reduced));
  }
  drop_trivial_rows(out);
  return out;
}

inline std::size_t fill_cost(const Polytope& p, const std::string& var) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& row : p.rows) {
    if (auto c = coefficient_of(row, var)) (sgn(*c) > 0 ? pos : neg) += 1;
  }
  return pos * neg;
}

}  // namespace detail

/// Projects `p` onto `keep` by eliminating every other variable. Variables
/// tied up in an equality are substituted out first; the rest go by FME in
/// order of least pair fill. Redundant rows are pruned after every step.
/// The result keeps the surviving variables in their original order.
inline Polytope project_onto(const Polytope& p, const std::vector<std::string>& keep) {
  for (const auto& name : keep)
    if (std::find(p.variables.begin(), p.variables.end(), name) == p.variables.end())
      throw Error(ErrorKind::UnknownVariable, "cannot keep undeclared '" + name + "'");

  Polytope current = remove_redundant(p);
  std::vector<std::string> pending;
  for (const auto& name : p.variables)
    if (std::find(keep.begin(), keep.end(), name) == keep.end()) pending.push_back(name);

  while (!pending.empty()) {
    if (current.empty) {
      for (const auto& name : pending) std::erase(current.variables, name);
      return current;
    }
    if (auto equality = detail::find_equality(current, pending)) {
      current = detail::substitute_equality(current, equality->row, equality->variable);
      std::erase(pending, equality->variable);
    } else {
      auto best = std::min_element(pending.begin(), pending.end(), [&](const auto& a, const auto& b) {
        return detail::fill_cost(current, a) < detail::fill_cost(current, b);
      });
      const std::string var = *best;
      current = fme_eliminate(current, var);
      pending.erase(best);
    }
    current = remove_redundant(current);
  }
  return current;
}

}  // namespace epcoord
