#ifndef STABMOR_LINALG_TYPES_HPP
#define STABMOR_LINALG_TYPES_HPP

#include <complex>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace stabmor {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;
using ComplexMatrix = DenseMatrix<std::complex<double>>;
using ComplexVector = DenseVector<std::complex<double>>;

// Column-major compressed storage; triplet assembly sums duplicates.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using ComplexSparseMatrix = Eigen::SparseMatrix<std::complex<double>, Eigen::ColMajor>;

inline SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

// True when every stored entry is finite.
template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace stabmor

#endif  // STABMOR_LINALG_TYPES_HPP
