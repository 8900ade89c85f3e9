#ifndef STABMOR_LINALG_LANCZOS_HPP
#define STABMOR_LINALG_LANCZOS_HPP

#include <cstdint>
#include <functional>

#include "stabmor/config.hpp"
#include "stabmor/linalg/types.hpp"

namespace stabmor {

// Matrix-free symmetric operator: y = op(x).
using SymmetricOperator = std::function<Vector(const Vector&)>;

struct LanczosOptions {
  double tol = default_tolerances().lanczos_tol;
  int max_restarts = default_tolerances().lanczos_max_restarts;
  // Krylov basis size kept between restarts; 0 picks max(2*count + 20, 40).
  Index basis_size = 0;
  std::uint64_t seed = 20240607;
};

struct DominantEigs {
  Vector values;      // largest algebraic eigenvalues, descending
  Matrix vectors;     // matching orthonormal Ritz vectors
  Vector residuals;   // ||op(u) - mu u|| per pair
  double norm_estimate = 0.0;  // max |Ritz value| seen, estimates ||op||_2
  int restarts = 0;
  Index matvecs = 0;
};

// Largest-algebraic eigenpairs of a symmetric operator by thick-restart
// Lanczos with full reorthogonalization. Converged when every returned pair
// satisfies ||op(u) - mu u|| <= tol * (|mu_1| + norm_estimate).
DominantEigs dominant_sym_eigs(const SymmetricOperator& op, Index n, Index count,
                               const LanczosOptions& options = {});

}  // namespace stabmor

#endif  // STABMOR_LINALG_LANCZOS_HPP
