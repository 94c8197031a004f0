#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iamod {

enum class ErrorCode {
  // network
  DuplicateNodeId,
  DuplicateArcId,
  DanglingArcEndpoint,
  IllegalModeSwitch,
  InternalArcInTerminalLayer,
  ArcLayerMismatch,
  NegativeTravelTime,
  SelfLoop,
  // scenario
  UnknownNode,
  InvalidDemand,
  DemandRateNonPositive,
  UnitTagMissing,
  RegionlessDemand,
  InvalidParameter,
  // I/O
  ParseError,
  MissingFile,
  // lp
  ModelInvalid,
  NameCollisionAfterSanitize,
  UnknownVariableName,
  Infeasible,
  Unbounded,
  IterationLimit,
  // path allocation
  EmptySupport,
  CyclicSupport,
  PathExplosion,
  ReconstructionInfeasible,
  // report
  EmptyInput,
  BinMismatch,
  Internal,
};

std::string_view to_string(ErrorCode code);

/// Coarse classification used for CLI exit codes.
enum class ErrorCategory { Data, Infeasible, Internal };

ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iamod
