#pragma once

#include <stdexcept>
#include <string>

namespace hesslab {

enum class ErrorCode {
  OutOfDomain,
  NotConvexHere,
  StencilOutOfDomain,
  EquivalenceViolation,
  Singular,
  NotOrthogonalColumns,
  SignatureMismatch,
  CurveLeavesDomain,
  IntegratorToleranceExceeded,
  NotOrthonormalFrame,
  NotInC,
  NoConvergence,
  ConvexityCertificateFailed,
  RegionOverlap,
  BasePointHit,
  UnexpectedStratum,
  BadSpec,
};

inline const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotConvexHere: return "NotConvexHere";
    case ErrorCode::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorCode::EquivalenceViolation: return "EquivalenceViolation";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NotOrthogonalColumns: return "NotOrthogonalColumns";
    case ErrorCode::SignatureMismatch: return "SignatureMismatch";
    case ErrorCode::CurveLeavesDomain: return "CurveLeavesDomain";
    case ErrorCode::IntegratorToleranceExceeded: return "IntegratorToleranceExceeded";
    case ErrorCode::NotOrthonormalFrame: return "NotOrthonormalFrame";
    case ErrorCode::NotInC: return "NotInC";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConvexityCertificateFailed: return "ConvexityCertificateFailed";
    case ErrorCode::RegionOverlap: return "RegionOverlap";
    case ErrorCode::BasePointHit: return "BasePointHit";
    case ErrorCode::UnexpectedStratum: return "UnexpectedStratum";
    case ErrorCode::BadSpec: return "BadSpec";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hesslab
