#include "stabmor/linalg/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "stabmor/errors.hpp"

namespace stabmor {
namespace {

// Orthogonalize w against the first `cols` columns of basis (two passes of
// classical Gram-Schmidt). Returns the remaining norm.
double orthogonalize(const Matrix& basis, Index cols, Vector& w) {
  if (cols == 0) return w.norm();
  for (int pass = 0; pass < 2; ++pass) {
    const Vector h = basis.leftCols(cols).transpose() * w;
    w.noalias() -= basis.leftCols(cols) * h;
  }
  return w.norm();
}

// A unit vector orthogonal to the first `cols` basis columns, or false when
// the basis already spans the space.
bool fresh_direction(const Matrix& basis, Index cols, std::mt19937_64& rng, Vector& out) {
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 5; ++attempt) {
    Vector w(basis.rows());
    for (Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
    const double before = w.norm();
    const double after = orthogonalize(basis, cols, w);
    if (after > 1e-8 * before) {
      out = w / after;
      return true;
    }
  }
  return false;
}

}  // namespace

DominantEigs dominant_sym_eigs(const SymmetricOperator& op, Index n, Index count,
                               const LanczosOptions& options) {
  DominantEigs result;
  count = std::min(count, n);
  if (count <= 0 || n == 0) {
    result.values.resize(0);
    result.vectors.resize(n, 0);
    result.residuals.resize(0);
    return result;
  }
  Index m = options.basis_size > 0 ? options.basis_size : std::max<Index>(2 * count + 20, 40);
  m = std::min(std::max(m, count + 1), n);

  std::mt19937_64 rng(options.seed);
  Matrix basis(n, m);
  Matrix image(n, m);  // op applied to each basis column
  Vector next;
  if (!fresh_direction(basis, 0, rng, next))
    throw Error(ErrorKind::InvalidArgument, "dominant_sym_eigs: empty space");

  Index filled = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int restart = 0;; ++restart) {
    bool exhausted = false;
    while (filled < m) {
      basis.col(filled) = next;
      image.col(filled) = op(next);
      ++result.matvecs;
      Vector w = image.col(filled);
      const double scale = w.norm();
      const double beta = orthogonalize(basis, filled + 1, w);
      ++filled;
      if (filled == n) {
        exhausted = true;
        break;
      }
      if (beta > 1e-12 * std::max(scale, 1e-300)) {
        next = w / beta;
      } else if (!fresh_direction(basis, filled, rng, next)) {
        exhausted = true;
        break;
      }
    }

    Matrix projected = basis.leftCols(filled).transpose() * image.leftCols(filled);
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(projected);
    const Vector theta = small.eigenvalues().reverse();
    const Matrix s = small.eigenvectors().rowwise().reverse();
    result.norm_estimate = std::max(result.norm_estimate, theta.cwiseAbs().maxCoeff());

    const Index want = std::min(count, filled);
    Matrix ritz = basis.leftCols(filled) * s.leftCols(want);
    Matrix ritz_image = image.leftCols(filled) * s.leftCols(want);
    Vector residuals(want);
    for (Index i = 0; i < want; ++i)
      residuals(i) = (ritz_image.col(i) - theta(i) * ritz.col(i)).norm();
    const double threshold = options.tol * (std::abs(theta(0)) + result.norm_estimate);
    const double worst = residuals.maxCoeff();
    best_residual = std::min(best_residual, worst);

    if ((worst <= threshold && want == count) || exhausted) {
      result.values = theta.head(want);
      result.vectors = std::move(ritz);
      result.residuals = std::move(residuals);
      result.restarts = restart;
      return result;
    }
    if (restart >= options.max_restarts)
      throw ConvergenceFailure("dominant_sym_eigs: no convergence within max restarts",
                               best_residual);

    // Thick restart: keep the leading Ritz vectors; `next` stays orthogonal
    // to their span because it is orthogonal to the whole old basis.
    const Index keep = std::min<Index>(m - 1, count + (m - count) / 2);
    const Matrix kept = basis.leftCols(filled) * s.leftCols(keep);
    const Matrix kept_image = image.leftCols(filled) * s.leftCols(keep);
    basis.leftCols(keep) = kept;
    image.leftCols(keep) = kept_image;
    filled = keep;
    const double before = next.norm();
    const double after = orthogonalize(basis, filled, next);
    if (after > 1e-8 * before) {
      next /= after;
    } else if (!fresh_direction(basis, filled, rng, next)) {
      throw ConvergenceFailure("dominant_sym_eigs: restart lost its direction", best_residual);
    }
  }
}

}  // namespace stabmor
