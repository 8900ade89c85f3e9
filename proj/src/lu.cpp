#include "stabmor/linalg/lu.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "stabmor/errors.hpp"

namespace stabmor {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Deterministic +-1 probe with irregular signs; exposes near-null directions
// far more reliably than a constant vector.
template <typename Scalar>
DenseVector<Scalar> probe_vector(Index n) {
  DenseVector<Scalar> b(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  for (Index i = 0; i < n; ++i) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    b(i) = Scalar((state & 1u) ? 1.0 : -1.0) * Scalar(1.0 + double(state % 7) / 7.0);
  }
  return b;
}

template <typename Sparse>
double sparse_norm1(const Sparse& m) {
  double best = 0.0;
  for (Index j = 0; j < m.outerSize(); ++j) {
    double s = 0.0;
    for (typename Sparse::InnerIterator it(m, j); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

LUFactorization::LUFactorization(const SparseMatrix& m) : n_(m.rows()) {
  if (m.rows() != m.cols())
    throw Error(ErrorKind::InvalidArgument, "lu_factor requires a square matrix");
  if (n_ == 0) return;
  SparseMatrix compressed = m;
  compressed.makeCompressed();
  sparse_ = std::make_shared<SparseSolver>();
  sparse_->analyzePattern(compressed);
  sparse_->factorize(compressed);
  if (sparse_->info() != Eigen::Success)
    throw Error(ErrorKind::SingularMatrix, "sparse LU reported a zero pivot");
  check_conditioning(sparse_norm1(compressed));
}

LUFactorization::LUFactorization(const Matrix& m) : n_(m.rows()) {
  if (m.rows() != m.cols())
    throw Error(ErrorKind::InvalidArgument, "lu_factor requires a square matrix");
  if (n_ == 0) return;
  dense_ = std::make_shared<Eigen::PartialPivLU<Matrix>>(m);
  const auto& lu = dense_->matrixLU();
  for (Index i = 0; i < n_; ++i)
    if (lu(i, i) == 0.0 || !std::isfinite(lu(i, i)))
      throw Error(ErrorKind::SingularMatrix, "dense LU hit a zero pivot");
  const double rc = dense_->rcond();
  cond_estimate_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(cond_estimate_ * kEps < 1.0))
    throw Error(ErrorKind::SingularMatrix, "matrix is singular to working precision");
}

void LUFactorization::check_conditioning(double norm1) {
  const Vector b = probe_vector<double>(n_);
  const Vector x = solve(b);
  if (!x.allFinite())
    throw Error(ErrorKind::SingularMatrix, "LU solve produced non-finite values");
  cond_estimate_ = norm1 * x.lpNorm<1>() / b.lpNorm<1>();
  if (!(cond_estimate_ * kEps < 1.0))
    throw Error(ErrorKind::SingularMatrix, "matrix is singular to working precision");
}

template <typename Rhs>
Rhs LUFactorization::solve_impl(const Rhs& b, bool transposed) const {
  if (b.rows() != n_) throw Error(ErrorKind::InvalidArgument, "LU solve: size mismatch");
  if (n_ == 0) return b;
  if (sparse_) {
    Rhs x = transposed ? Rhs(sparse_->transpose().solve(b)) : Rhs(sparse_->solve(b));
    return x;
  }
  return transposed ? Rhs(dense_->transpose().solve(b)) : Rhs(dense_->solve(b));
}

Vector LUFactorization::solve(const Vector& b) const { return solve_impl(b, false); }
Matrix LUFactorization::solve(const Matrix& b) const { return solve_impl(b, false); }
Vector LUFactorization::solve_transposed(const Vector& b) const { return solve_impl(b, true); }
Matrix LUFactorization::solve_transposed(const Matrix& b) const { return solve_impl(b, true); }

ComplexLU::ComplexLU(const ComplexSparseMatrix& m) {
  ComplexSparseMatrix compressed = m;
  compressed.makeCompressed();
  sparse_ = std::make_shared<SparseSolver>();
  sparse_->analyzePattern(compressed);
  sparse_->factorize(compressed);
  if (sparse_->info() != Eigen::Success)
    throw Error(ErrorKind::SingularMatrix, "complex sparse LU reported a zero pivot");
  const ComplexVector b = probe_vector<std::complex<double>>(m.rows());
  const ComplexVector x = sparse_->solve(b);
  if (!x.allFinite() || sparse_norm1(compressed) * x.lpNorm<1>() / b.lpNorm<1>() * kEps >= 1.0)
    throw Error(ErrorKind::SingularMatrix, "complex matrix is singular to working precision");
}

ComplexLU::ComplexLU(const ComplexMatrix& m) {
  dense_ = std::make_shared<Eigen::PartialPivLU<ComplexMatrix>>(m);
  const double rc = dense_->rcond();
  if (!(rc > kEps) || !dense_->matrixLU().allFinite())
    throw Error(ErrorKind::SingularMatrix, "complex matrix is singular to working precision");
}

ComplexMatrix ComplexLU::solve(const ComplexMatrix& b) const {
  if (sparse_) return sparse_->solve(b);
  return dense_->solve(b);
}

ComplexMatrix ComplexLU::solve_transposed(const ComplexMatrix& b) const {
  if (sparse_) return sparse_->transpose().solve(b);
  return dense_->transpose().solve(b);
}

}  // namespace stabmor
