#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ceg {

enum class ErrorCode {
  // tree / graph construction
  InvalidVertex,
  EmptyTree,
  CycleDetected,
  MultipleParents,
  DisconnectedVertex,
  DuplicateSiblingLabel,
  ProbSumNotOne,
  NonpositiveProb,
  InvalidStructure,
  // probability queries
  RouteNotInTree,
  ZeroDenominator,
  NoSuchSubpath,
  // CEG queries
  UnknownPosition,
  UnknownEdge,
  AtomLimitExceeded,
  NotAFrontier,
  // conditioning
  EmptyEvent,
  NotIntrinsic,
  AtomNotRetained,
  // separation
  SinkNotAllowed,
  NotAPositionCut,
  // io
  SyntaxError,
  SemanticError,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidVertex: return "InvalidVertex";
    case ErrorCode::EmptyTree: return "EmptyTree";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::MultipleParents: return "MultipleParents";
    case ErrorCode::DisconnectedVertex: return "DisconnectedVertex";
    case ErrorCode::DuplicateSiblingLabel: return "DuplicateSiblingLabel";
    case ErrorCode::ProbSumNotOne: return "ProbSumNotOne";
    case ErrorCode::NonpositiveProb: return "NonpositiveProb";
    case ErrorCode::InvalidStructure: return "InvalidStructure";
    case ErrorCode::RouteNotInTree: return "RouteNotInTree";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::NoSuchSubpath: return "NoSuchSubpath";
    case ErrorCode::UnknownPosition: return "UnknownPosition";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::AtomLimitExceeded: return "AtomLimitExceeded";
    case ErrorCode::NotAFrontier: return "NotAFrontier";
    case ErrorCode::EmptyEvent: return "EmptyEvent";
    case ErrorCode::NotIntrinsic: return "NotIntrinsic";
    case ErrorCode::AtomNotRetained: return "AtomNotRetained";
    case ErrorCode::SinkNotAllowed: return "SinkNotAllowed";
    case ErrorCode::NotAPositionCut: return "NotAPositionCut";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SemanticError: return "SemanticError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ceg
