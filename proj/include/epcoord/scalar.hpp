#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include "epcoord/error.hpp"

namespace epcoord {

/// Exact rational number. GMP keeps every result in lowest terms with a
/// positive denominator, so equality is structural.
using Scalar = mpq_class;

/// Sparse linear form over named variables.
using Terms = std::map<std::string, Scalar>;

/// A point: variable name to exact value.
using Assignment = std::map<std::string, Scalar>;

/// `num/den` in lowest terms. The two-argument mpq_class constructor does
/// not reduce, so build fractions through this.
inline Scalar ratio(const mpz_class& num, const mpz_class& den) {
  if (den == 0) throw Error(ErrorKind::ParseError, "zero denominator");
  Scalar value(num, den);
  value.canonicalize();
  return value;
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline mpz_class parse_integer(std::string_view text, std::string_view whole) {
  std::string_view digits = text;
  bool negative = false;
  if (!digits.empty() && (digits.front() == '+' || digits.front() == '-')) {
    negative = digits.front() == '-';
    digits.remove_prefix(1);
  }
  if (!all_digits(digits))
    throw Error(ErrorKind::ParseError, "not a number: '" + std::string(whole) + "'");
  mpz_class value(std::string(digits), 10);
  return negative ? mpz_class(-value) : value;
}

inline mpz_class pow10(unsigned long exponent) {
  mpz_class result;
  mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
  return result;
}

}  // namespace detail

/// Parses an integer ("-3"), a fraction ("7/2") or a finite decimal
/// ("1.5", "-0.25e2") into its exact rational value.
inline Scalar parse_scalar(std::string_view text) {
  const std::string_view whole = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw Error(ErrorKind::ParseError, "empty number");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = detail::parse_integer(text.substr(0, slash), whole);
    mpz_class den = detail::parse_integer(text.substr(slash + 1), whole);
    if (den == 0) throw Error(ErrorKind::ParseError, "zero denominator in '" + std::string(whole) + "'");
    return ratio(num, den);
  }

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mpz_class exp = detail::parse_integer(text.substr(e + 1), whole);
    if (!exp.fits_slong_p() || abs(exp) > 100000)
      throw Error(ErrorKind::ParseError, "exponent out of range in '" + std::string(whole) + "'");
    exponent = exp.get_si();
    text = text.substr(0, e);
  }
  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !detail::all_digits(int_part)) ||
      (!frac_part.empty() && !detail::all_digits(frac_part)))
    throw Error(ErrorKind::ParseError, "not a number: '" + std::string(whole) + "'");

  mpz_class num(std::string(int_part.empty() ? "0" : int_part) + std::string(frac_part), 10);
  mpz_class den = detail::pow10(frac_part.size());
  if (exponent > 0) num *= detail::pow10(static_cast<unsigned long>(exponent));
  if (exponent < 0) den *= detail::pow10(static_cast<unsigned long>(-exponent));
  return ratio(negative ? mpz_class(-num) : num, den);
}

/// "p/q" in lowest terms, or just "p" for integers.
inline std::string to_string(const Scalar& value) { return value.get_str(); }

inline double to_double(const Scalar& value) { return value.get_d(); }

/// Evaluates Σ coefficient·value; every referenced variable must be assigned.
inline Scalar evaluate(const Terms& terms, const Assignment& point) {
  Scalar sum = 0;
  for (const auto& [name, coefficient] : terms) {
    auto it = point.find(name);
    if (it == point.end()) throw Error(ErrorKind::MissingCoordinate, "no value for '" + name + "'");
    sum += coefficient * it->second;
  }
  return sum;
}

/// Adds `scale * other` into `into`, dropping coefficients that cancel.
inline void add_scaled(Terms& into, const Terms& other, const Scalar& scale) {
  for (const auto& [name, coefficient] : other) {
    Scalar& slot = into[name];
    slot += scale * coefficient;
    if (sgn(slot) == 0) into.erase(name);
  }
}

}  // namespace epcoord
