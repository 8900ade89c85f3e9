#ifndef STABMOR_LINALG_QR_HPP
#define STABMOR_LINALG_QR_HPP

#include <cmath>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

// Householder QR of an n x q matrix (q <= n). Q is never formed: the
// reflectors H_j = I - tau_j v_j v_j^T are accumulated in compact WY form
// Q = H_0 ... H_{q-1} = I - Y T Y^T, so applying Q or Q^T to a vector costs
// two passes over the n x q matrix Y.
template <typename Scalar>
class HouseholderQR {
 public:
  using MatrixType = DenseMatrix<Scalar>;
  using VectorType = DenseVector<Scalar>;

  HouseholderQR() = default;

  explicit HouseholderQR(const MatrixType& m) : tau_(m.cols()) {
    MatrixType packed = m;
    const Index n = m.rows();
    const Index q = m.cols();
    if (q > n) throw Error(ErrorKind::InvalidArgument, "householder_qr requires q <= n");
    for (Index j = 0; j < q; ++j) {
      const Index len = n - j;
      Scalar alpha = packed(j, j);
      Scalar sigma = len > 1 ? Scalar(packed.col(j).tail(len - 1).squaredNorm()) : Scalar(0);
      if (sigma == Scalar(0)) {
        tau_(j) = Scalar(0);
        if (len > 1) packed.col(j).tail(len - 1).setZero();
        continue;
      }
      Scalar beta = std::sqrt(alpha * alpha + sigma);
      if (alpha > Scalar(0)) beta = -beta;
      tau_(j) = (beta - alpha) / beta;
      packed.col(j).tail(len - 1) /= (alpha - beta);
      packed(j, j) = beta;
      if (j + 1 < q) {
        // A(j:, j+1:) -= tau v (v^T A(j:, j+1:)), v(0) = 1 implicit
        auto trailing = packed.block(j, j + 1, len, q - j - 1);
        VectorType v(len);
        v(0) = Scalar(1);
        v.tail(len - 1) = packed.col(j).tail(len - 1);
        const DenseVector<Scalar> w = trailing.transpose() * v;
        trailing.noalias() -= tau_(j) * v * w.transpose();
      }
    }
    r_ = packed.topRows(q).template triangularView<Eigen::Upper>();
    y_ = packed.template triangularView<Eigen::StrictlyLower>();
    y_.diagonal().setOnes();
    t_ = MatrixType::Zero(q, q);
    for (Index j = 0; j < q; ++j) {
      t_(j, j) = tau_(j);
      if (j > 0) {
        const VectorType g = y_.leftCols(j).transpose() * y_.col(j);
        const VectorType tg = t_.topLeftCorner(j, j).template triangularView<Eigen::Upper>() * g;
        t_.col(j).head(j) = -tau_(j) * tg;
      }
    }
  }

  Index rows() const { return y_.rows(); }
  Index cols() const { return y_.cols(); }
  const VectorType& tau() const { return tau_; }

  // The q x q upper triangular factor R'.
  const MatrixType& r() const { return r_; }

  // Q^T x, for x with n rows (any number of columns).
  template <typename Derived>
  MatrixType apply_qt(const Eigen::MatrixBase<Derived>& x) const {
    MatrixType y = x;
    if (cols() == 0) return y;
    const MatrixType w = t_.transpose().template triangularView<Eigen::Lower>() * (y_.transpose() * y);
    y.noalias() -= y_ * w;
    return y;
  }

  // Q x.
  template <typename Derived>
  MatrixType apply_q(const Eigen::MatrixBase<Derived>& x) const {
    MatrixType y = x;
    if (cols() == 0) return y;
    const MatrixType w = t_.template triangularView<Eigen::Upper>() * (y_.transpose() * y);
    y.noalias() -= y_ * w;
    return y;
  }

  // First q columns of Q.
  MatrixType thin_q() const {
    return apply_q(MatrixType::Identity(rows(), cols()));
  }

  // True when some |R'_jj| <= tol * max_j |R'_jj|.
  bool rank_deficient(Scalar tol_rel = Scalar(1e-12)) const {
    if (cols() == 0) return false;
    const VectorType d = r_.diagonal().cwiseAbs();
    return d.minCoeff() <= tol_rel * d.maxCoeff();
  }

 private:
  VectorType tau_;
  MatrixType r_;
  MatrixType y_;  // reflector vectors, unit diagonal
  MatrixType t_;  // upper triangular WY factor
};

template <typename Scalar>
HouseholderQR<Scalar> householder_qr(const DenseMatrix<Scalar>& m) {
  return HouseholderQR<Scalar>(m);
}

}  // namespace stabmor

#endif  // STABMOR_LINALG_QR_HPP
