#ifndef STABMOR_LINALG_SVD_HPP
#define STABMOR_LINALG_SVD_HPP

#include "stabmor/config.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

struct ThinSvd {
  Matrix u;      // n x r, orthonormal columns
  Vector sigma;  // descending, >= 0
};

// Leading r left singular vectors and values of an n x s matrix. Uses the
// eigendecomposition of the smaller Gram matrix when min(n, s) <= 1000 and
// the Lanczos eigensolver on the implicit Gram operator otherwise.
ThinSvd thin_svd(const Matrix& m, Index r, const Tolerances& tol = default_tolerances());

// Modified Gram-Schmidt with one reorthogonalization pass, in place. Columns
// whose remaining norm falls below drop_rel of their original norm are
// removed; returns the kept count.
Index orthonormalize_columns(Matrix& m, double drop_rel = 1e-12);

}  // namespace stabmor

#endif  // STABMOR_LINALG_SVD_HPP
