#ifndef STABMOR_BENCHGEN_HPP
#define STABMOR_BENCHGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stabmor/dynsys.hpp"
#include "stabmor/nonlinear.hpp"

namespace stabmor {

// Fixed-free chain of masses; element i couples mass i to mass i-1 (the wall
// for i = 0). Vectors of length 1 are broadcast to every mass.
struct MSDChainSpec {
  Index masses = 4;
  std::vector<double> mass{1.0};
  std::vector<double> stiffness{1.0};
  std::vector<double> damping{1.0};
  Index input_node = 0;   // force enters here
  Index output_node = -1; // position observed here; -1 = last mass
};

// States (q, v): E = blockdiag(I, M), A = [[0, I], [-K, -D]].
LinearSystem gen_msd_chain(const MSDChainSpec& spec);

struct NonNormalSpec {
  Index n = 200;
  double lambda_min = 0.1;  // eigenvalues drawn from [-lambda_max, -lambda_min]
  double lambda_max = 10.0;
  double kappa = 50.0;      // condition number of the similarity transform
  std::uint64_t seed = 1;
  bool require_nondissipative = true;
  int max_resamples = 20;
};

struct NonNormalSystem {
  LinearSystem system;
  Vector eigenvalues;  // the prescribed spectrum
  Index k = 0;         // non-negative eigenvalues of the symmetric part
  int resamples = 0;
};

// A = T diag(lambda) T^{-1} with T = Q1 diag(sigma) Q2^T, sigma log-spaced
// in [1, kappa]; E = I, dense A. Resamples until k >= 1 when required.
NonNormalSystem gen_nonnormal_stable(const NonNormalSpec& spec);

enum class VelocityProfile { Uniform, Ramp };

struct ConvDiffSpec {
  Index n = 400;
  double diffusion = 1.0;
  double velocity = 50.0;
  VelocityProfile profile = VelocityProfile::Uniform;  // Ramp: v(x) = velocity * x
  double grade = 8.0;            // largest / smallest cell width, geometric grading
  bool scale_to_identity = false;  // replace (E, A, B) by (I, E^{-1}A, E^{-1}B)
};

// Finite volumes on [0, 1] with homogeneous Dirichlet ends, upwind convection
// and lumped mass E = diag(cell widths). Cells shrink geometrically towards
// the outflow end x = 1. The input heats cells in [0.2, 0.3],
// the output averages cells in [0.6, 0.7].
LinearSystem gen_convection_diffusion(const ConvDiffSpec& spec);

struct CubicMSDSpec {
  MSDChainSpec chain;
  double gamma = 1.0;  // hardening spring force gamma * q_i^3 per mass
};

NonlinearSystem gen_cubic_msd(const CubicMSDSpec& spec);

// A = [[-1, 4], [0, -1]], E = I, B = (1, 1)^T, C = (1, 0): stable, not
// dissipative, and Galerkin with V = (1, 1)^T / sqrt(2) gives A_r = 1.
LinearSystem crafted_counterexample();
// Same linear part with f(x) = A x - gamma x.^3.
NonlinearSystem crafted_cubic(double gamma = 1.0);

}  // namespace stabmor

#endif  // STABMOR_BENCHGEN_HPP
