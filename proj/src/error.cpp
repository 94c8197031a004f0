#include "iamod/error.hpp"

namespace iamod {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::DuplicateArcId: return "DuplicateArcId";
    case ErrorCode::DanglingArcEndpoint: return "DanglingArcEndpoint";
    case ErrorCode::IllegalModeSwitch: return "IllegalModeSwitch";
    case ErrorCode::InternalArcInTerminalLayer: return "InternalArcInTerminalLayer";
    case ErrorCode::ArcLayerMismatch: return "ArcLayerMismatch";
    case ErrorCode::NegativeTravelTime: return "NegativeTravelTime";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidDemand: return "InvalidDemand";
    case ErrorCode::DemandRateNonPositive: return "DemandRateNonPositive";
    case ErrorCode::UnitTagMissing: return "UnitTagMissing";
    case ErrorCode::RegionlessDemand: return "RegionlessDemand";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ModelInvalid: return "ModelInvalid";
    case ErrorCode::NameCollisionAfterSanitize: return "NameCollisionAfterSanitize";
    case ErrorCode::UnknownVariableName: return "UnknownVariableName";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::CyclicSupport: return "CyclicSupport";
    case ErrorCode::PathExplosion: return "PathExplosion";
    case ErrorCode::ReconstructionInfeasible: return "ReconstructionInfeasible";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BinMismatch: return "BinMismatch";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible:
    case ErrorCode::Unbounded:
      return ErrorCategory::Infeasible;
    case ErrorCode::IterationLimit:
    case ErrorCode::CyclicSupport:
    case ErrorCode::ReconstructionInfeasible:
    case ErrorCode::Internal:
      return ErrorCategory::Internal;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace iamod
