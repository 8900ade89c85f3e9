#ifndef STABMOR_LINALG_LU_HPP
#define STABMOR_LINALG_LU_HPP

#include <memory>
#include <variant>

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "stabmor/linalg/types.hpp"

namespace stabmor {

// LU factorization of a square real matrix, P M Q = L U. Sparse inputs use
// a supernodal sparse LU with COLAMD ordering, dense inputs partial pivoting.
// Solves with M and with M^T are both available; the object is immutable
// after construction and solves are safe to call concurrently.
class LUFactorization {
 public:
  explicit LUFactorization(const SparseMatrix& m);
  explicit LUFactorization(const Matrix& m);

  Index size() const { return n_; }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  Vector solve_transposed(const Vector& b) const;
  Matrix solve_transposed(const Matrix& b) const;

  // Lower bound on cond_1(M) from the factorization check solve.
  double condition_estimate() const { return cond_estimate_; }

 private:
  using SparseSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

  template <typename Rhs>
  Rhs solve_impl(const Rhs& b, bool transposed) const;
  void check_conditioning(double norm1);

  Index n_ = 0;
  std::shared_ptr<SparseSolver> sparse_;
  std::shared_ptr<Eigen::PartialPivLU<Matrix>> dense_;
  double cond_estimate_ = 1.0;
};

// Convenience wrapper matching the operation name.
inline LUFactorization lu_factor(const SparseMatrix& m) { return LUFactorization(m); }
inline LUFactorization lu_factor(const Matrix& m) { return LUFactorization(m); }

// Complex sparse LU used for (sE - A) solves. Throws PoleHit-free
// SingularMatrix errors; callers translate.
class ComplexLU {
 public:
  explicit ComplexLU(const ComplexSparseMatrix& m);
  explicit ComplexLU(const ComplexMatrix& m);

  ComplexMatrix solve(const ComplexMatrix& b) const;
  ComplexMatrix solve_transposed(const ComplexMatrix& b) const;

 private:
  using SparseSolver =
      Eigen::SparseLU<ComplexSparseMatrix, Eigen::COLAMDOrdering<int>>;
  std::shared_ptr<SparseSolver> sparse_;
  std::shared_ptr<Eigen::PartialPivLU<ComplexMatrix>> dense_;
};

}  // namespace stabmor

#endif  // STABMOR_LINALG_LU_HPP
