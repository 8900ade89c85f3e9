#ifndef STABMOR_NONLINEAR_HPP
#define STABMOR_NONLINEAR_HPP

#include <functional>
#include <memory>

#include "stabmor/config.hpp"
#include "stabmor/dynsys.hpp"
#include "stabmor/projection.hpp"
#include "stabmor/stabilize.hpp"

namespace stabmor {

using VectorField = std::function<Vector(const Vector&)>;
using JacobianField = std::function<SparseMatrix(const Vector&)>;

// E x' = f(x) + B u, y = C x around a designated equilibrium f(x*) = 0.
// Constant inputs belong in f. The callbacks must be re-entrant.
class NonlinearSystem {
 public:
  // B and C may be empty (n x 0 and 0 x n are substituted).
  NonlinearSystem(SparseMatrix e, VectorField f, JacobianField jac, Vector equilibrium, Matrix b = {},
                  Matrix c = {}, const Tolerances& tol = default_tolerances());

  Index n() const { return linear_.n(); }
  Index n_in() const { return linear_.n_in(); }
  Index n_out() const { return linear_.n_out(); }
  const SparseMatrix& e() const { return linear_.e(); }
  const Matrix& b() const { return linear_.b(); }
  const Matrix& c() const { return linear_.c(); }
  const Vector& equilibrium() const { return equilibrium_; }
  const VectorField& f() const { return f_; }
  const JacobianField& jac() const { return jac_; }

  Vector eval(const Vector& x) const { return f_(x); }
  SparseMatrix jacobian(const Vector& x) const { return jac_(x); }

  // (E, jac(x*), B, C).
  const LinearSystem& linearization() const { return linear_; }

 private:
  VectorField f_;
  JacobianField jac_;
  Vector equilibrium_;
  LinearSystem linear_;
};

// g(x) = f(x + x*), so the equilibrium moves to 0. Outputs become deviations C x.
NonlinearSystem shift_to_origin(const NonlinearSystem& sys, const Tolerances& tol = default_tolerances());

// Stability data of E^{-1} jac(x*).
StabilityReport equilibrium_stability(const NonlinearSystem& sys,
                                      const Tolerances& tol = default_tolerances());

// Central differences with step h_rel * max(1, |x_i|). Testing aid only; not
// accurate enough to drive the stabilizer.
Matrix finite_difference_jacobian(const VectorField& f, const Vector& x, double h_rel = 1e-6);

// Reduced model E_r x' = W^T f(V x) + B_r u, y = C_r x with equilibrium 0.
struct NonlinearROM {
  Matrix e;
  Matrix b;
  Matrix c;
  Matrix v;
  Matrix w;
  std::shared_ptr<const NonlinearSystem> full;  // shifted to the origin
  ReducedProvenance provenance;

  Index r() const { return v.cols(); }
  Vector eval(const Vector& xr) const { return w.transpose() * full->eval(v * xr); }
  Matrix jacobian(const Vector& xr) const { return w.transpose() * (full->jacobian(v * xr) * v); }
  // Spectral abscissa of E_r^{-1} W^T jac(0) V.
  double equilibrium_abscissa(const Tolerances& tol = default_tolerances()) const;
};

// Stabilizer for the linearization at the equilibrium.
StabilizerFactor assemble_equilibrium_stabilizer(const NonlinearSystem& sys,
                                                 const StabilizerOptions& options = {},
                                                 const Tolerances& tol = default_tolerances());

// W = V without a stabilizer, else W = M~ E V. The system is shifted to the
// origin first when its equilibrium is not 0; the stabilizer must come from
// assemble_equilibrium_stabilizer on the same system.
NonlinearROM nonlinear_reduce(const NonlinearSystem& sys, const ProjectionBasis& basis,
                              const StabilizerFactor* stab = nullptr,
                              const Tolerances& tol = default_tolerances());

}  // namespace stabmor

#endif  // STABMOR_NONLINEAR_HPP
