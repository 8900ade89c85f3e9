#ifndef STABMOR_DYNSYS_HPP
#define STABMOR_DYNSYS_HPP

#include <complex>
#include <memory>
#include <optional>

#include "stabmor/config.hpp"
#include "stabmor/linalg/lu.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

// Descriptor system E x' = A x + B u, y = C x with non-singular E.
// Immutable once constructed; copies share the factorization of E.
class LinearSystem {
 public:
  LinearSystem(SparseMatrix e, SparseMatrix a, Matrix b, Matrix c);

  // E = I.
  static LinearSystem standard(SparseMatrix a, Matrix b, Matrix c);
  static LinearSystem from_dense(const Matrix& e, const Matrix& a, const Matrix& b,
                                 const Matrix& c);

  Index n() const { return a_.rows(); }
  Index n_in() const { return b_.cols(); }
  Index n_out() const { return c_.rows(); }

  const SparseMatrix& e() const { return e_; }
  const SparseMatrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }

  bool identity_mass() const { return identity_mass_; }
  const LUFactorization& e_lu() const { return *e_lu_; }

  // E^{-1} x and E^{-T} x; free when E = I.
  Matrix solve_e(const Matrix& x) const;
  Matrix solve_e_transposed(const Matrix& x) const;
  Vector solve_e(const Vector& x) const;
  Vector solve_e_transposed(const Vector& x) const;

  // Dense E^{-1} A; guarded by the dense cap.
  Matrix dense_state_matrix(const Tolerances& tol = default_tolerances()) const;

 private:
  SparseMatrix e_;
  SparseMatrix a_;
  Matrix b_;
  Matrix c_;
  bool identity_mass_ = false;
  std::shared_ptr<const LUFactorization> e_lu_;
};

// max Re(lambda) over det(lambda E - A) = 0.
double spectral_abscissa(const LinearSystem& sys, const Tolerances& tol = default_tolerances());
// Same for a dense pencil (E, A).
double spectral_abscissa(const Matrix& e, const Matrix& a,
                         const Tolerances& tol = default_tolerances());

// Leading eigenpairs of G_sym = E^{-1} A + A^T E^{-T}.
struct SymmetricPartSpectrum {
  Vector mu;         // descending
  Matrix u;          // orthonormal eigenvectors
  Vector residuals;  // ||G_sym u_j - mu_j u_j||
  Index k = 0;       // #{mu_j >= -tau}
  double mu_max = 0.0;
  bool complete = false;  // false when every returned mu_j was non-negative
};

SymmetricPartSpectrum symmetric_part_spectrum(const LinearSystem& sys, Index count,
                                              const Tolerances& tol = default_tolerances());

// Grows the requested count geometrically from max(2 k_estimate, 64) until a
// negative eigenvalue shows up, so that all non-negative ones are captured.
SymmetricPartSpectrum symmetric_part_nonnegative(const LinearSystem& sys, Index k_estimate = 0,
                                                 const Tolerances& tol = default_tolerances());

struct StabilityReport {
  std::optional<double> alpha;  // absent when n exceeds the dense cap
  bool dissipative = false;
  Index k = 0;
  double mu_max = 0.0;
  bool k_complete = true;

  bool asymptotically_stable() const { return alpha.has_value() && *alpha < 0.0; }
};

StabilityReport stability_report(const LinearSystem& sys,
                                 const Tolerances& tol = default_tolerances());

bool is_asymptotically_stable(const LinearSystem& sys, const Tolerances& tol = default_tolerances());
bool is_dissipative(const LinearSystem& sys, const Tolerances& tol = default_tolerances());

// H(s) = C (sE - A)^{-1} B. Evaluations at different s are independent and
// may run concurrently.
class TransferFunction {
 public:
  explicit TransferFunction(LinearSystem sys);

  const LinearSystem& system() const { return sys_; }
  ComplexMatrix operator()(std::complex<double> s) const;

 private:
  LinearSystem sys_;
  ComplexSparseMatrix e_;
  ComplexSparseMatrix a_;
  ComplexMatrix b_;
  ComplexMatrix c_;
};

ComplexMatrix eval_transfer(const TransferFunction& tf, std::complex<double> s);

}  // namespace stabmor

#endif  // STABMOR_DYNSYS_HPP
