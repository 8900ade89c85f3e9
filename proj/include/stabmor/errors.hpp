#ifndef STABMOR_ERRORS_HPP
#define STABMOR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stabmor {

enum class ErrorKind {
  SingularMatrix,
  SymmetryViolation,
  ConvergenceFailure,
  DenseCapExceeded,
  SingularE,
  PoleHit,
  SingularReducedMass,
  Breakdown,
  RankDeficient,
  AlreadyDissipative,
  UnstablePencil,
  ShiftFailure,
  LowRankAssumption,
  NotIdentityMass,
  EquilibriumResidualTooLarge,
  UnstableOperand,
  StepSizeUnderflow,
  FactorizationFailure,
  GridMismatch,
  ResampleExhausted,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` lets the
// CLI map them onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double best_residual)
      : Error(ErrorKind::ConvergenceFailure,
              what + " (best residual " + std::to_string(best_residual) + ")"),
        best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::SymmetryViolation: return "SymmetryViolation";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::DenseCapExceeded: return "DenseCapExceeded";
    case ErrorKind::SingularE: return "SingularE";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::SingularReducedMass: return "SingularReducedMass";
    case ErrorKind::Breakdown: return "Breakdown";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::AlreadyDissipative: return "AlreadyDissipative";
    case ErrorKind::UnstablePencil: return "UnstablePencil";
    case ErrorKind::ShiftFailure: return "ShiftFailure";
    case ErrorKind::LowRankAssumption: return "LowRankAssumption";
    case ErrorKind::NotIdentityMass: return "NotIdentityMass";
    case ErrorKind::EquilibriumResidualTooLarge: return "EquilibriumResidualTooLarge";
    case ErrorKind::UnstableOperand: return "UnstableOperand";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ResampleExhausted: return "ResampleExhausted";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace stabmor

#endif  // STABMOR_ERRORS_HPP
