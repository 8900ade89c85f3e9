#ifndef STABMOR_STABILIZE_HPP
#define STABMOR_STABILIZE_HPP

#include <optional>
#include <string>
#include <vector>

#include "stabmor/config.hpp"
#include "stabmor/dynsys.hpp"
#include "stabmor/linalg/qr.hpp"
#include "stabmor/lyapunov.hpp"
#include "stabmor/projection.hpp"

namespace stabmor {

// Rank-k positive definite shift of -G_sym:
//   F = -G_sym + (mu_max + delta) U U^T = -G_sym + U~ U~^T,
// U holding the eigenvectors of the k non-negative eigenvalues of G_sym.
struct StabShift {
  Matrix u;        // n x k
  Matrix u_tilde;  // sqrt(mu_max + delta_effective) * u
  Vector mu;       // the k non-negative eigenvalues, descending
  Index k = 0;
  double mu_max = 0.0;
  double delta = 1.0;
  // delta plus the largest eigen-residual, so F stays definite for
  // inexact eigenvectors
  double delta_effective = 1.0;
};

StabShift build_stab_factor_f(const LinearSystem& sys, double delta = 1.0,
                              const Tolerances& tol = default_tolerances());

// Dense F = -G_sym + U~ U~^T; small n only.
Matrix dense_shifted_f(const LinearSystem& sys, const StabShift& shift,
                       const Tolerances& tol = default_tolerances());

enum class LyapunovMode {
  Auto,        // low-rank ADI when k / n is small, dense otherwise
  LowRankAdi,  // refuse when k / n exceeds the configured ratio
  DenseExact,  // dense solve of the shifted equation, Z from its eigenvectors
};

const char* to_string(LyapunovMode mode);

// Right-hand side and solver choice for A^T X E + E^T X A + rhs = 0.
struct LyapunovProblem {
  const SparseMatrix* a = nullptr;
  const SparseMatrix* e = nullptr;
  Matrix rhs_factor;  // rhs = rhs_factor * rhs_factor^T
  LyapunovMode mode = LyapunovMode::Auto;
};

// Returns Z with X ~ Z Z^T; residual history empty for the dense mode.
LradiResult solve_lyapunov(const LyapunovProblem& problem, const LradiOptions& adi = {},
                           const Tolerances& tol = default_tolerances());

struct StabilizerOptions {
  double delta = 1.0;
  LyapunovMode mode = LyapunovMode::Auto;
  LradiOptions adi;
};

// M~ = E^{-T} E^{-1} + Z Z^T, kept factored. Applying M~ to a vector costs one
// solve with E, one with E^T and O(nq).
class StabilizerFactor {
 public:
  StabilizerFactor(LinearSystem sys, Matrix z, StabShift shift, LyapunovMode mode,
                   std::vector<double> residual_history, int adi_steps);

  const LinearSystem& system() const { return sys_; }
  const Matrix& z() const { return z_; }
  const Matrix& u_tilde() const { return shift_.u_tilde; }
  const StabShift& shift() const { return shift_; }
  Index k() const { return shift_.k; }
  Index q() const { return z_.cols(); }
  double delta() const { return shift_.delta; }
  double mu_max() const { return shift_.mu_max; }
  LyapunovMode mode() const { return mode_; }
  const std::vector<double>& residual_history() const { return residual_history_; }
  int adi_steps() const { return adi_steps_; }

  Matrix apply(const Matrix& x) const;
  Vector apply(const Vector& x) const;

  // Dense M~; refused above the dense cap.
  Matrix dense(const Tolerances& tol = default_tolerances()) const;

 private:
  LinearSystem sys_;
  Matrix z_;
  StabShift shift_;
  LyapunovMode mode_;
  std::vector<double> residual_history_;
  int adi_steps_ = 0;
};

// Builds U~ and solves A^T dM E + E^T dM A + U~ U~^T = 0 for dM ~ Z Z^T.
// A dissipative system yields Z with zero columns (M~ = E^{-T} E^{-1}).
StabilizerFactor assemble_stabilizer(const LinearSystem& sys, const StabilizerOptions& options = {},
                                     const Tolerances& tol = default_tolerances());

// Projection with W = M~ E V = E^{-T} V + Z (Z^T E V). The reduced mass
// matrix is I + (Z^T E V)^T (Z^T E V), symmetric positive definite. The
// reduced spectral abscissa is recorded in the provenance when r is within
// the dense cap.
ReducedSystem stabilized_reduce(const LinearSystem& sys, const ProjectionBasis& basis,
                                const StabilizerFactor& stab,
                                const Tolerances& tol = default_tolerances());

// Projection with W = M E V for a dense symmetric positive definite M, e.g.
// the solution of A^T M E + E^T M A + F = 0 for a full-rank F.
ReducedSystem stabilized_reduce(const LinearSystem& sys, const ProjectionBasis& basis,
                                const Matrix& m, const Tolerances& tol = default_tolerances());

struct ConditionBound {
  double cond = 1.0;   // cond_2 of the reduced mass matrix
  double bound = 1.0;  // 1 + ||E||_2^2 ||Z||_2^2
  bool holds = true;   // cond <= bound * (1 + 1e-10)
};

ConditionBound condition_bound_check(const StabilizerFactor& stab, const ReducedSystem& rom);

// ||E||_2: exact for diagonal E, dense below 200, Lanczos on E^T E above.
double mass_spectral_norm(const SparseMatrix& e);

// M~^{1/2} and M~^{-1/2} for M~ = I + Z Z^T, applied as
// Q S~ D~^{+-1/2} S~^T Q^T with Z = Q [R'; 0] (Householder) and
// R' R'^T = S D S^T. Each application costs O(nq + q^2).
class MatrixSqrt {
 public:
  explicit MatrixSqrt(const Matrix& z);

  Index n() const { return n_; }
  Index q() const { return s_.cols(); }
  const Vector& d() const { return d_; }

  Matrix apply_sqrt(const Matrix& x) const { return apply(x, 0.5); }
  Matrix apply_inv_sqrt(const Matrix& x) const { return apply(x, -0.5); }

 private:
  Matrix apply(const Matrix& x, double power) const;

  Index n_ = 0;
  HouseholderQR<double> qr_;
  Matrix s_;
  Vector d_;
};

// Requires E = I.
MatrixSqrt matrix_sqrt_factor(const StabilizerFactor& stab);

}  // namespace stabmor

#endif  // STABMOR_STABILIZE_HPP
