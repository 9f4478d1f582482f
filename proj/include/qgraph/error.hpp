#ifndef QGRAPH_ERROR_HPP
#define QGRAPH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qgraph {

enum class ErrorCode {
  RankDeficient,
  NotSelfAdjoint,
  DegenerateDiagonalPair,
  DimensionMismatch,
  InvalidPotential,
  InvalidGraph,
  CutOnVertex,
  CutsOutOfOrder,
  InvalidSplit,
  OutOfDomain,
  MismatchedEvaluationPoint,
  StepSizeUnderflow,
  PoleAtLambda,
  PoleOnBoundary,
  EndpointOnSpectrum,
  GridTooCoarse,
  NoIndependentPartner,
  QuadratureFailure,
  OnSpectrum,
  SingularDeltaCombination,
  InvalidScenario,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorCode::DegenerateDiagonalPair: return "DegenerateDiagonalPair";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidPotential: return "InvalidPotential";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::CutOnVertex: return "CutOnVertex";
    case ErrorCode::CutsOutOfOrder: return "CutsOutOfOrder";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::MismatchedEvaluationPoint: return "MismatchedEvaluationPoint";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::PoleAtLambda: return "PoleAtLambda";
    case ErrorCode::PoleOnBoundary: return "PoleOnBoundary";
    case ErrorCode::EndpointOnSpectrum: return "EndpointOnSpectrum";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NoIndependentPartner: return "NoIndependentPartner";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::OnSpectrum: return "OnSpectrum";
    case ErrorCode::SingularDeltaCombination: return "SingularDeltaCombination";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
  }
  return "Unknown";
}

// Validation-type failures map to CLI exit code 2, endpoint problems to 4,
// everything else is numerical (3).
inline bool is_validation_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::RankDeficient:
    case ErrorCode::NotSelfAdjoint:
    case ErrorCode::DegenerateDiagonalPair:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidPotential:
    case ErrorCode::InvalidGraph:
    case ErrorCode::CutOnVertex:
    case ErrorCode::CutsOutOfOrder:
    case ErrorCode::InvalidSplit:
    case ErrorCode::OutOfDomain:
    case ErrorCode::InvalidScenario:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qgraph

#endif  // QGRAPH_ERROR_HPP
