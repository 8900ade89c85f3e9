#ifndef STABMOR_LYAPUNOV_HPP
#define STABMOR_LYAPUNOV_HPP

#include <complex>
#include <vector>

#include <Eigen/LU>

#include "stabmor/config.hpp"
#include "stabmor/errors.hpp"
#include "stabmor/linalg/schur.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

// Solves T^T Y + Y T = C for quasi-upper-triangular T (real Schur form) and
// symmetric C by block forward substitution over the 1x1/2x2 diagonal blocks.
// Only the lower block triangle is computed; the rest is mirrored.
template <typename Scalar>
DenseMatrix<Scalar> solve_schur_lyapunov(const DenseMatrix<Scalar>& t, const DenseMatrix<Scalar>& c) {
  const Index n = t.rows();
  DenseMatrix<Scalar> y = DenseMatrix<Scalar>::Zero(n, n);
  const std::vector<SchurBlock> blocks = schur_blocks(t);
  for (const SchurBlock& bj : blocks) {
    const Index sj = bj.start, mj = bj.size;
    for (const SchurBlock& bi : blocks) {
      const Index si = bi.start, mi = bi.size;
      if (si < sj) continue;
      // R = C_ij - sum_{k<i} T_ki^T Y_kj - sum_{l<j} Y_il T_lj
      DenseMatrix<Scalar> rhs = c.block(si, sj, mi, mj);
      if (si > 0) rhs.noalias() -= t.block(0, si, si, mi).transpose() * y.block(0, sj, si, mj);
      if (sj > 0) rhs.noalias() -= y.block(si, 0, mi, sj) * t.block(0, sj, sj, mj);
      // (I_mj kron T_ii^T + T_jj^T kron I_mi) vec(Y_ij) = vec(R)
      const Index m = mi * mj;
      DenseMatrix<Scalar> k = DenseMatrix<Scalar>::Zero(m, m);
      const DenseMatrix<Scalar> tii = t.block(si, si, mi, mi);
      const DenseMatrix<Scalar> tjj = t.block(sj, sj, mj, mj);
      for (Index q = 0; q < mj; ++q) k.block(q * mi, q * mi, mi, mi) += tii.transpose();
      for (Index q = 0; q < mj; ++q)
        for (Index p = 0; p < mj; ++p) k.block(q * mi, p * mi, mi, mi).diagonal().array() += tjj(p, q);
      const DenseVector<Scalar> vec_r = Eigen::Map<const DenseVector<Scalar>>(rhs.data(), m);
      const DenseVector<Scalar> vec_y = k.fullPivLu().solve(vec_r);
      const DenseMatrix<Scalar> yij = Eigen::Map<const DenseMatrix<Scalar>>(vec_y.data(), mi, mj);
      y.block(si, sj, mi, mj) = yij;
      if (si != sj) y.block(sj, si, mj, mi) = yij.transpose();
    }
  }
  return y;
}

// Dense generalized Lyapunov solve of A^T M E + E^T M A + F = 0 for a stable
// pencil (E, A) and symmetric F. Reduces to the standard equation for
// X = E^T M E with state matrix E^{-1} A, then Bartels-Stewart on its real
// Schur form. O(n^3); refused above the dense cap.
Matrix solve_lyapunov_dense(const Matrix& a, const Matrix& e, const Matrix& f,
                            const Tolerances& tol = default_tolerances());

// ||A^T M E + E^T M A + F||_F
double lyapunov_residual_norm(const Matrix& a, const Matrix& e, const Matrix& m, const Matrix& f);

struct LradiOptions {
  int max_steps = 10;
  double residual_tol = 1e-8;
  // Number of shifts chosen by the heuristic; cycled when max_steps exceeds it.
  int shift_count = 10;
  int arnoldi_steps = 30;          // Ritz values of E^{-1} A
  int inverse_arnoldi_steps = 20;  // Ritz values of (E^{-1} A)^{-1}
  // Caller-supplied shifts (Re < 0, complex ones followed by their
  // conjugate) bypass the heuristic when non-empty.
  std::vector<std::complex<double>> shifts;
};

struct LradiResult {
  Matrix z;                             // solution ~ Z Z^T
  std::vector<double> residual_history; // ||R_i||_2 / ||G^T G||_2 after each step
  std::vector<std::complex<double>> shifts_used;
  int steps = 0;                        // Z has steps * k columns
};

// Penzl-style heuristic: Ritz values of E^{-1} A and reciprocals of Ritz
// values of its inverse, stable ones kept, then greedy min-max selection of
// `count` shifts (conjugate pairs adjacent).
std::vector<std::complex<double>> adi_shifts(const SparseMatrix& a, const SparseMatrix& e,
                                             const LradiOptions& options);

// Low-rank ADI for A^T X E + E^T X A + G G^T = 0 with X ~ Z Z^T. Each step
// appends k = G.cols() columns; complex conjugate shift pairs are handled in
// real arithmetic and count as two steps. Stops after max_steps or when the
// relative residual drops below residual_tol.
LradiResult solve_lyapunov_lradi(const SparseMatrix& a, const SparseMatrix& e, const Matrix& g,
                                 const LradiOptions& options = {});

}  // namespace stabmor

#endif  // STABMOR_LYAPUNOV_HPP
