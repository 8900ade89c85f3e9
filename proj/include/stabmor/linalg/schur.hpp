#ifndef STABMOR_LINALG_SCHUR_HPP
#define STABMOR_LINALG_SCHUR_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "stabmor/config.hpp"
#include "stabmor/errors.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

// m = Q T Q^T with Q orthogonal and T quasi-upper-triangular (1x1 and 2x2
// diagonal blocks).
template <typename Scalar>
struct RealSchurForm {
  DenseMatrix<Scalar> q;
  DenseMatrix<Scalar> t;
};

template <typename Scalar>
RealSchurForm<Scalar> real_schur(const DenseMatrix<Scalar>& m,
                                 const Tolerances& tol = default_tolerances()) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidArgument, "real_schur: not square");
  if (m.rows() > tol.dense_cap)
    throw Error(ErrorKind::DenseCapExceeded,
                "real_schur: n = " + std::to_string(m.rows()) + " exceeds dense cap " +
                    std::to_string(tol.dense_cap));
  RealSchurForm<Scalar> out;
  if (m.rows() == 0) return out;
  Eigen::RealSchur<DenseMatrix<Scalar>> schur(m, true);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("real_schur: QR iteration did not converge", 0.0);
  out.q = schur.matrixU();
  out.t = schur.matrixT();
  return out;
}

// Index ranges of the diagonal blocks of a quasi-triangular matrix.
struct SchurBlock {
  Index start;
  Index size;  // 1 or 2
};

template <typename Scalar>
std::vector<SchurBlock> schur_blocks(const DenseMatrix<Scalar>& t) {
  std::vector<SchurBlock> blocks;
  const Index n = t.rows();
  for (Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != Scalar(0)) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      i += 1;
    }
  }
  return blocks;
}

template <typename Scalar>
std::vector<std::complex<Scalar>> schur_eigenvalues(const DenseMatrix<Scalar>& t) {
  std::vector<std::complex<Scalar>> ev;
  ev.reserve(t.rows());
  for (const SchurBlock& b : schur_blocks(t)) {
    if (b.size == 1) {
      ev.emplace_back(t(b.start, b.start), Scalar(0));
      continue;
    }
    const Scalar a = t(b.start, b.start), bb = t(b.start, b.start + 1);
    const Scalar c = t(b.start + 1, b.start), d = t(b.start + 1, b.start + 1);
    const Scalar half_tr = (a + d) / 2;
    const std::complex<Scalar> disc =
        std::sqrt(std::complex<Scalar>((a - d) * (a - d) / 4 + bb * c, 0));
    ev.push_back(half_tr + disc);
    ev.push_back(half_tr - disc);
  }
  return ev;
}

// Eigenvalues of a general dense matrix via real Schur form.
template <typename Scalar>
std::vector<std::complex<Scalar>> dense_eigenvalues(const DenseMatrix<Scalar>& m,
                                                    const Tolerances& tol = default_tolerances()) {
  if (m.rows() == 0) return {};
  if (m.rows() > tol.dense_cap)
    throw Error(ErrorKind::DenseCapExceeded, "dense_eigenvalues: n exceeds dense cap");
  Eigen::RealSchur<DenseMatrix<Scalar>> schur(m, false);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("real_schur: QR iteration did not converge", 0.0);
  return schur_eigenvalues<Scalar>(schur.matrixT());
}

// max Re(lambda) over the eigenvalues of m.
template <typename Scalar>
Scalar matrix_spectral_abscissa(const DenseMatrix<Scalar>& m,
                                const Tolerances& tol = default_tolerances()) {
  Scalar alpha = -std::numeric_limits<Scalar>::infinity();
  for (const auto& l : dense_eigenvalues(m, tol)) alpha = std::max(alpha, l.real());
  return alpha;
}

}  // namespace stabmor

#endif  // STABMOR_LINALG_SCHUR_HPP
