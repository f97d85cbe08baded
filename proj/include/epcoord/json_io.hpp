#pragma once

#include <json.hpp>

#include <string>

#include "epcoord/error.hpp"
#include "epcoord/scalar.hpp"

namespace epcoord {

using Json = nlohmann::ordered_json;

namespace detail {

/// SAX adapter that keeps the source text of floating-point literals as
/// strings, so that "4.5" or "0.1" can be read back as exact rationals
/// instead of going through a double.
class ExactNumberSax {
 public:
  explicit ExactNumberSax(Json& target) : dom_(target, true) {}

  bool null() { return dom_.null(); }
  bool boolean(bool value) { return dom_.boolean(value); }
  bool number_integer(Json::number_integer_t value) { return dom_.number_integer(value); }
  bool number_unsigned(Json::number_unsigned_t value) { return dom_.number_unsigned(value); }
  bool number_float(Json::number_float_t, const Json::string_t& text) {
    Json::string_t copy = text;
    return dom_.string(copy);
  }
  bool string(Json::string_t& value) { return dom_.string(value); }
  bool binary(Json::binary_t& value) { return dom_.binary(value); }
  bool start_object(std::size_t size) { return dom_.start_object(size); }
  bool key(Json::string_t& value) { return dom_.key(value); }
  bool end_object() { return dom_.end_object(); }
  bool start_array(std::size_t size) { return dom_.start_array(size); }
  bool end_array() { return dom_.end_array(); }
  bool parse_error(std::size_t position, const std::string& token, const nlohmann::detail::exception& ex) {
    throw Error(ErrorKind::ParseError, "invalid JSON at byte " + std::to_string(position) + " near '" + token +
                                           "': " + ex.what());
  }

 private:
  nlohmann::detail::json_sax_dom_parser<Json> dom_;
};

}  // namespace detail

/// Parses JSON text; non-integer number literals arrive as their source strings.
inline Json parse_json_exact(const std::string& text) {
  Json document;
  detail::ExactNumberSax sax(document);
  Json::sax_parse(text, &sax);
  return document;
}

/// Reads a JSON integer, a decimal literal, or a "p/q" string as a rational.
inline Scalar scalar_from_json(const Json& value, const std::string& where) {
  if (value.is_number_integer()) return Scalar(std::to_string(value.get<long long>()), 10);
  if (value.is_number_unsigned()) return Scalar(std::to_string(value.get<unsigned long long>()), 10);
  if (value.is_string()) {
    try {
      return parse_scalar(value.get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }
  }
  if (value.is_number_float()) return Scalar(value.get<double>());
  throw Error(ErrorKind::ParseError, where + ": expected a number");
}

/// Integers that fit in 64 bits stay JSON numbers; everything else is "p/q".
inline Json scalar_to_json(const Scalar& value) {
  if (value.get_den() == 1 && value.get_num().fits_slong_p()) return Json(value.get_num().get_si());
  return Json(to_string(value));
}

/// Report form: the exact value next to a decimal approximation.
inline Json scalar_report(const Scalar& value) {
  return Json{{"exact", to_string(value)}, {"approx", to_double(value)}};
}

}  // namespace epcoord
