#ifndef STABMOR_CONFIG_HPP
#define STABMOR_CONFIG_HPP

#include <Eigen/Core>

namespace stabmor {

using Index = Eigen::Index;

// Every numerical threshold used by the library lives here.
struct Tolerances {
  // Symmetry check for dense symmetric eigensolves, relative to ||m||.
  double symmetry_rel = 1e-12;
  // Largest n for which O(n^3) dense work (Schur, dense Lyapunov) is allowed.
  Index dense_cap = 2000;
  // Ritz residual tolerance for the Lanczos eigensolver.
  double lanczos_tol = 1e-8;
  int lanczos_max_restarts = 200;
  // mu >= -nonneg_rel * |mu_1| counts as a non-negative eigenvalue.
  double nonneg_rel = 1e-12;
  // Singular value cutoff for POD rank checks, relative to sigma_1.
  double rank_rel = 1e-14;
  // Krylov deflation threshold for Arnoldi, relative to the candidate norm.
  double deflation_rel = 1e-10;
  // LR-ADI is refused when k / n exceeds this ratio.
  double lradi_max_rank_ratio = 0.05;
  // Equilibrium residual check, relative to max(1, ||x*||) * max(1, ||jac(x*)||_1).
  double equilibrium_rel = 1e-10;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace stabmor

#endif  // STABMOR_CONFIG_HPP
