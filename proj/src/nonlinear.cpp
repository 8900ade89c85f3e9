#include "stabmor/nonlinear.hpp"

#include <algorithm>
#include <cmath>

#include "stabmor/errors.hpp"

namespace stabmor {
namespace {

Matrix or_empty_b(Matrix b, Index n) { return b.size() == 0 ? Matrix(n, 0) : b; }
Matrix or_empty_c(Matrix c, Index n) { return c.size() == 0 ? Matrix(0, n) : c; }

LinearSystem linearize(const SparseMatrix& e, const JacobianField& jac, const Vector& x, Matrix b, Matrix c) {
  const Index n = e.rows();
  SparseMatrix a = jac(x);
  if (a.rows() != n || a.cols() != n) throw Error(ErrorKind::InvalidArgument, "Jacobian has wrong shape");
  return LinearSystem(e, std::move(a), or_empty_b(std::move(b), n), or_empty_c(std::move(c), n));
}

}  // namespace

NonlinearSystem::NonlinearSystem(SparseMatrix e, VectorField f, JacobianField jac, Vector equilibrium, Matrix b,
                                 Matrix c, const Tolerances& tol)
    : f_(std::move(f)),
      jac_(std::move(jac)),
      equilibrium_(std::move(equilibrium)),
      linear_(linearize(e, jac_, equilibrium_, std::move(b), std::move(c))) {
  if (equilibrium_.size() != e.rows()) throw Error(ErrorKind::InvalidArgument, "equilibrium has wrong size");
  const Vector fx = f_(equilibrium_);
  if (fx.size() != equilibrium_.size()) throw Error(ErrorKind::InvalidArgument, "f has wrong output size");
  double jac_norm = 0.0;
  const SparseMatrix& a = linear_.a();
  for (Index j = 0; j < a.outerSize(); ++j) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) col += std::abs(it.value());
    jac_norm = std::max(jac_norm, col);
  }
  const double scale = std::max(1.0, equilibrium_.norm()) * std::max(1.0, jac_norm);
  if (!(fx.norm() <= tol.equilibrium_rel * scale))
    throw Error(ErrorKind::EquilibriumResidualTooLarge,
                "||f(x*)|| = " + std::to_string(fx.norm()) + " is not an equilibrium residual");
}

NonlinearSystem shift_to_origin(const NonlinearSystem& sys, const Tolerances& tol) {
  if (sys.equilibrium().isZero(0.0)) return sys;
  const Vector x0 = sys.equilibrium();
  VectorField g = [f = sys.f(), x0](const Vector& x) -> Vector { return f(x + x0); };
  JacobianField dg = [jac = sys.jac(), x0](const Vector& x) -> SparseMatrix { return jac(x + x0); };
  return NonlinearSystem(sys.e(), std::move(g), std::move(dg), Vector::Zero(sys.n()), sys.b(), sys.c(), tol);
}

StabilityReport equilibrium_stability(const NonlinearSystem& sys, const Tolerances& tol) {
  return stability_report(sys.linearization(), tol);
}

Matrix finite_difference_jacobian(const VectorField& f, const Vector& x, double h_rel) {
  const Index n = x.size();
  Matrix jac;
  for (Index j = 0; j < n; ++j) {
    const double h = h_rel * std::max(1.0, std::abs(x(j)));
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const Vector col = (f(xp) - f(xm)) / (xp(j) - xm(j));
    if (j == 0) jac.resize(col.size(), n);
    jac.col(j) = col;
  }
  return jac;
}

double NonlinearROM::equilibrium_abscissa(const Tolerances& tol) const {
  return spectral_abscissa(e, jacobian(Vector::Zero(r())), tol);
}

StabilizerFactor assemble_equilibrium_stabilizer(const NonlinearSystem& sys, const StabilizerOptions& options,
                                                 const Tolerances& tol) {
  return assemble_stabilizer(sys.linearization(), options, tol);
}

NonlinearROM nonlinear_reduce(const NonlinearSystem& sys, const ProjectionBasis& basis,
                              const StabilizerFactor* stab, const Tolerances& tol) {
  const Matrix& v = basis.v;
  if (v.rows() != sys.n()) throw Error(ErrorKind::InvalidArgument, "nonlinear_reduce: V has wrong row count");
  if (stab && stab->system().n() != sys.n())
    throw Error(ErrorKind::InvalidArgument, "nonlinear_reduce: stabilizer built for another system");

  NonlinearROM rom;
  rom.full = std::make_shared<const NonlinearSystem>(shift_to_origin(sys, tol));
  rom.v = v;
  const Matrix ev = sys.e() * v;
  rom.w = stab ? stab->apply(ev) : v;
  rom.e = rom.w.transpose() * ev;
  if (stab) rom.e = 0.5 * (rom.e + rom.e.transpose()).eval();
  rom.b = rom.w.transpose() * rom.full->b();
  rom.c = rom.full->c() * v;
  rom.provenance.method = to_string(basis.method);
  rom.provenance.r = v.cols();
  rom.provenance.stabilized = stab != nullptr;
  rom.provenance.w_source = stab ? std::string("M~EV (") + to_string(stab->mode()) + ")" : "V";
  if (rom.r() > 0 && rom.r() <= tol.dense_cap) rom.provenance.abscissa = rom.equilibrium_abscissa(tol);
  return rom;
}

}  // namespace stabmor
