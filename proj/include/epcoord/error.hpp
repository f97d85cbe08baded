#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epcoord {

enum class ErrorKind {
  ParseError,
  InvalidModel,
  MalformedProgram,
  UnknownVariable,
  MissingCoordinate,
  EmptyPolytope,
  CycleDetected,
  UnknownReference,
  DuplicateVariable,
  NonAffineTerm,
  MultipleRoots,
  UnboundedCost,
  InfeasibleSubsystem,
  UpperInfeasible,
  UnboundedProblem,
  InternalInconsistency,
  DimensionTooLarge,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::MalformedProgram: return "MalformedProgram";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::MissingCoordinate: return "MissingCoordinate";
    case ErrorKind::EmptyPolytope: return "EmptyPolytope";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::UnknownReference: return "UnknownReference";
    case ErrorKind::DuplicateVariable: return "DuplicateVariable";
    case ErrorKind::NonAffineTerm: return "NonAffineTerm";
    case ErrorKind::MultipleRoots: return "MultipleRoots";
    case ErrorKind::UnboundedCost: return "UnboundedCost";
    case ErrorKind::InfeasibleSubsystem: return "InfeasibleSubsystem";
    case ErrorKind::UpperInfeasible: return "UpperInfeasible";
    case ErrorKind::UnboundedProblem: return "UnboundedProblem";
    case ErrorKind::InternalInconsistency: return "InternalInconsistency";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
  }
  return "Unknown";
}

/// Exception carried by every failing operation in the library.
///
/// `node()` names the subsystem responsible when one is known, so that a
/// failed coordination run can point at the offending part of the tree.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string node = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        node_(std::move(node)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& node() const noexcept { return node_; }

 private:
  ErrorKind kind_;
  std::string node_;
};

}  // namespace epcoord
