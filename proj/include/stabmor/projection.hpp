#ifndef STABMOR_PROJECTION_HPP
#define STABMOR_PROJECTION_HPP

#include <optional>
#include <string>

#include "stabmor/config.hpp"
#include "stabmor/dynsys.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

enum class BasisMethod { Arnoldi, Pod, External };

const char* to_string(BasisMethod method);

// Orthonormal V (n x r) plus how it was built.
struct ProjectionBasis {
  Matrix v;
  BasisMethod method = BasisMethod::External;
  double expansion_point = 0.0;  // Arnoldi s0
  Vector singular_values;        // POD, all computed values
  Index requested = 0;
  bool breakdown = false;  // Krylov space exhausted before reaching `requested`

  Index r() const { return v.cols(); }

  static ProjectionBasis external(Matrix v);
};

struct ReducedProvenance {
  std::string method;  // "arnoldi", "pod", "external"
  Index r = 0;
  bool stabilized = false;
  std::string w_source;  // "V", "M~EV (low-rank)", "MEV (dense)"
  std::optional<double> abscissa;  // recorded by the stabilized reductions
};

// E_r x' = A_r x + B_r u, y = C_r x, all dense.
struct ReducedSystem {
  Matrix e;
  Matrix a;
  Matrix b;
  Matrix c;
  ReducedProvenance provenance;

  Index r() const { return a.rows(); }
  LinearSystem to_linear_system() const { return LinearSystem::from_dense(e, a, b, c); }
  double spectral_abscissa(const Tolerances& tol = default_tolerances()) const;
};

// E_r = W^T E V, A_r = W^T A V, B_r = W^T B, C_r = C V; W defaults to V.
ReducedSystem galerkin_reduce(const LinearSystem& sys, const ProjectionBasis& basis,
                              const std::optional<Matrix>& w = std::nullopt);

// One-sided (block) Arnoldi for the Krylov space of ((s0 E - A)^{-1} E,
// (s0 E - A)^{-1} B); modified Gram-Schmidt with one reorthogonalization,
// deflating dependent candidates. Returns fewer than r columns with
// `breakdown` set when the space is exhausted.
ProjectionBasis arnoldi_basis(const LinearSystem& sys, Index r, double s0,
                              const Tolerances& tol = default_tolerances());

// Dominant r left singular vectors of the snapshot matrix.
ProjectionBasis pod_basis(const Matrix& snapshots, Index r,
                          const Tolerances& tol = default_tolerances());

// s = E V xr' - A V xr - B u.
Vector residual(const LinearSystem& sys, const Matrix& v, const Vector& xr, const Vector& xr_dot,
                const Vector& u);

}  // namespace stabmor

#endif  // STABMOR_PROJECTION_HPP
