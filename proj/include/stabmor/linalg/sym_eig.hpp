#ifndef STABMOR_LINALG_SYM_EIG_HPP
#define STABMOR_LINALG_SYM_EIG_HPP

#include <Eigen/Eigenvalues>

#include "stabmor/config.hpp"
#include "stabmor/errors.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

template <typename Scalar>
struct SymEig {
  DenseVector<Scalar> values;   // descending
  DenseMatrix<Scalar> vectors;  // orthonormal columns, matching order
};

// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
template <typename Scalar>
SymEig<Scalar> sym_eig_dense(const DenseMatrix<Scalar>& m,
                             const Tolerances& tol = default_tolerances()) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidArgument, "sym_eig_dense: not square");
  const Scalar scale = m.norm();
  if ((m - m.transpose()).norm() > Scalar(tol.symmetry_rel) * scale)
    throw Error(ErrorKind::SymmetryViolation, "sym_eig_dense: input is not symmetric");
  SymEig<Scalar> out;
  if (m.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(m);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("symmetric eigensolver did not converge", 0.0);
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace stabmor

#endif  // STABMOR_LINALG_SYM_EIG_HPP
