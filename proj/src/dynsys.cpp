#include "stabmor/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/lanczos.hpp"
#include "stabmor/linalg/schur.hpp"
#include "stabmor/linalg/sym_eig.hpp"

namespace stabmor {
namespace {

constexpr Index kDenseSymmetricLimit = 200;
constexpr Index kDenseTransferLimit = 64;

bool is_identity(const SparseMatrix& e) {
  if (e.rows() != e.cols()) return false;
  Index diag = 0;
  for (Index j = 0; j < e.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(e, j); it; ++it) {
      if (it.row() == it.col()) {
        if (it.value() != 1.0) return false;
        ++diag;
      } else if (it.value() != 0.0) {
        return false;
      }
    }
  return diag == e.rows();
}

SymmetricPartSpectrum finish_spectrum(Vector mu, Matrix u, Vector residuals, Index n,
                                      const Tolerances& tol) {
  SymmetricPartSpectrum out;
  out.mu = std::move(mu);
  out.u = std::move(u);
  out.residuals = std::move(residuals);
  if (out.mu.size() == 0) {
    out.complete = n == 0;
    return out;
  }
  out.mu_max = out.mu(0);
  const double tau = tol.nonneg_rel * std::abs(out.mu(0));
  out.k = (out.mu.array() >= -tau).count();
  out.complete = out.k < out.mu.size() || out.mu.size() == n;
  return out;
}

}  // namespace

LinearSystem::LinearSystem(SparseMatrix e, SparseMatrix a, Matrix b, Matrix c)
    : e_(std::move(e)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  const Index n = a_.rows();
  if (a_.cols() != n || e_.rows() != n || e_.cols() != n || b_.rows() != n || c_.cols() != n)
    throw Error(ErrorKind::InvalidArgument, "LinearSystem: inconsistent dimensions");
  e_.makeCompressed();
  a_.makeCompressed();
  identity_mass_ = is_identity(e_);
  try {
    e_lu_ = std::make_shared<const LUFactorization>(e_);
  } catch (const Error& err) {
    throw Error(ErrorKind::SingularE, err.what());
  }
}

LinearSystem LinearSystem::standard(SparseMatrix a, Matrix b, Matrix c) {
  const Index n = a.rows();
  return LinearSystem(sparse_identity(n), std::move(a), std::move(b), std::move(c));
}

LinearSystem LinearSystem::from_dense(const Matrix& e, const Matrix& a, const Matrix& b,
                                      const Matrix& c) {
  return LinearSystem(e.sparseView(0.0, 0.0), a.sparseView(0.0, 0.0), b, c);
}

Matrix LinearSystem::solve_e(const Matrix& x) const {
  return identity_mass_ ? x : e_lu_->solve(x);
}
Matrix LinearSystem::solve_e_transposed(const Matrix& x) const {
  return identity_mass_ ? x : e_lu_->solve_transposed(x);
}
Vector LinearSystem::solve_e(const Vector& x) const {
  return identity_mass_ ? x : e_lu_->solve(x);
}
Vector LinearSystem::solve_e_transposed(const Vector& x) const {
  return identity_mass_ ? x : e_lu_->solve_transposed(x);
}

Matrix LinearSystem::dense_state_matrix(const Tolerances& tol) const {
  if (n() > tol.dense_cap)
    throw Error(ErrorKind::DenseCapExceeded,
                "n = " + std::to_string(n()) + " exceeds the dense cap; use sampled checks");
  return solve_e(Matrix(a_));
}

double spectral_abscissa(const LinearSystem& sys, const Tolerances& tol) {
  if (sys.n() == 0) return -std::numeric_limits<double>::infinity();
  return matrix_spectral_abscissa<double>(sys.dense_state_matrix(tol), tol);
}

double spectral_abscissa(const Matrix& e, const Matrix& a, const Tolerances& tol) {
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  const LUFactorization lu(e);
  return matrix_spectral_abscissa<double>(lu.solve(a), tol);
}

SymmetricPartSpectrum symmetric_part_spectrum(const LinearSystem& sys, Index count,
                                              const Tolerances& tol) {
  const Index n = sys.n();
  count = std::clamp<Index>(count, 0, n);
  if (n <= kDenseSymmetricLimit || 2 * count >= n) {
    const Matrix state = sys.dense_state_matrix(tol);
    const Matrix gsym = state + state.transpose();
    const SymEig<double> eig = sym_eig_dense(gsym, tol);
    Matrix u = eig.vectors.leftCols(count);
    Vector residuals(count);
    for (Index j = 0; j < count; ++j)
      residuals(j) = (gsym * u.col(j) - eig.values(j) * u.col(j)).norm();
    return finish_spectrum(eig.values.head(count), std::move(u), std::move(residuals), n, tol);
  }
  const SymmetricOperator op = [&sys](const Vector& v) -> Vector {
    return sys.solve_e(Vector(sys.a() * v)) + sys.a().transpose() * sys.solve_e_transposed(v);
  };
  LanczosOptions opts;
  opts.tol = tol.lanczos_tol;
  opts.max_restarts = tol.lanczos_max_restarts;
  DominantEigs eig = dominant_sym_eigs(op, n, count, opts);
  return finish_spectrum(std::move(eig.values), std::move(eig.vectors), std::move(eig.residuals),
                         n, tol);
}

SymmetricPartSpectrum symmetric_part_nonnegative(const LinearSystem& sys, Index k_estimate,
                                                 const Tolerances& tol) {
  const Index n = sys.n();
  Index count = std::min<Index>(n, std::max<Index>(2 * k_estimate, 64));
  for (;;) {
    SymmetricPartSpectrum spec = symmetric_part_spectrum(sys, count, tol);
    if (spec.complete || count >= n) return spec;
    count = std::min<Index>(n, 2 * count);
  }
}

StabilityReport stability_report(const LinearSystem& sys, const Tolerances& tol) {
  StabilityReport report;
  if (sys.n() <= tol.dense_cap) report.alpha = spectral_abscissa(sys, tol);
  const SymmetricPartSpectrum spec = symmetric_part_nonnegative(sys, 0, tol);
  report.k = spec.k;
  report.mu_max = spec.mu_max;
  report.k_complete = spec.complete;
  report.dissipative = spec.k == 0 && spec.mu.size() > 0;
  return report;
}

bool is_asymptotically_stable(const LinearSystem& sys, const Tolerances& tol) {
  return spectral_abscissa(sys, tol) < 0.0;
}

bool is_dissipative(const LinearSystem& sys, const Tolerances& tol) {
  const SymmetricPartSpectrum spec = symmetric_part_spectrum(sys, 1, tol);
  return spec.mu.size() > 0 && spec.mu(0) < 0.0;
}

TransferFunction::TransferFunction(LinearSystem sys)
    : sys_(std::move(sys)),
      e_(sys_.e().cast<std::complex<double>>()),
      a_(sys_.a().cast<std::complex<double>>()),
      b_(sys_.b().cast<std::complex<double>>()),
      c_(sys_.c().cast<std::complex<double>>()) {}

ComplexMatrix TransferFunction::operator()(std::complex<double> s) const {
  const Index n = sys_.n();
  ComplexMatrix x;
  try {
    if (n <= kDenseTransferLimit) {
      const ComplexMatrix pencil = s * ComplexMatrix(e_) - ComplexMatrix(a_);
      x = ComplexLU(pencil).solve(b_);
    } else {
      const ComplexSparseMatrix pencil = s * e_ - a_;
      x = ComplexLU(pencil).solve(b_);
    }
  } catch (const Error&) {
    throw Error(ErrorKind::PoleHit, "sE - A is singular at s = (" + std::to_string(s.real()) +
                                        ", " + std::to_string(s.imag()) + ")");
  }
  if (!x.allFinite()) throw Error(ErrorKind::PoleHit, "non-finite transfer value");
  return c_ * x;
}

ComplexMatrix eval_transfer(const TransferFunction& tf, std::complex<double> s) { return tf(s); }

}  // namespace stabmor
