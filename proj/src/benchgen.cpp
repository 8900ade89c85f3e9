#include "stabmor/benchgen.hpp"

#include <cmath>
#include <random>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/qr.hpp"

namespace stabmor {
namespace {

using Triplet = Eigen::Triplet<double>;

std::vector<double> broadcast(const std::vector<double>& values, Index count, const char* name) {
  if (values.size() == 1) return std::vector<double>(std::size_t(count), values[0]);
  if (Index(values.size()) != count)
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " needs 1 or `masses` entries");
  return values;
}

struct ChainMatrices {
  SparseMatrix e, a;
  Matrix b, c;
  Index m = 0;
};

ChainMatrices chain_matrices(const MSDChainSpec& spec) {
  const Index m = spec.masses;
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "msd chain needs at least one mass");
  const auto mass = broadcast(spec.mass, m, "mass");
  const auto k = broadcast(spec.stiffness, m, "stiffness");
  const auto d = broadcast(spec.damping, m, "damping");
  for (Index i = 0; i < m; ++i)
    if (!(mass[i] > 0.0 && k[i] > 0.0 && d[i] > 0.0))
      throw Error(ErrorKind::InvalidArgument, "msd chain parameters must be positive");
  const Index out_node = spec.output_node < 0 ? m - 1 : spec.output_node;
  if (spec.input_node < 0 || spec.input_node >= m || out_node >= m)
    throw Error(ErrorKind::InvalidArgument, "msd chain node index out of range");

  std::vector<Triplet> et, at;
  for (Index i = 0; i < m; ++i) {
    et.emplace_back(i, i, 1.0);
    et.emplace_back(m + i, m + i, mass[i]);
    at.emplace_back(i, m + i, 1.0);
  }
  // Element i joins mass i-1 and mass i.
  auto couple = [&](const std::vector<double>& coef, Index col_offset) {
    for (Index i = 0; i < m; ++i) {
      at.emplace_back(m + i, col_offset + i, -coef[i]);
      if (i > 0) {
        at.emplace_back(m + i, col_offset + i - 1, coef[i]);
        at.emplace_back(m + i - 1, col_offset + i, coef[i]);
        at.emplace_back(m + i - 1, col_offset + i - 1, -coef[i]);
      }
    }
  };
  couple(k, 0);
  couple(d, m);
  ChainMatrices out;
  out.m = m;
  out.e.resize(2 * m, 2 * m);
  out.a.resize(2 * m, 2 * m);
  out.e.setFromTriplets(et.begin(), et.end());
  out.a.setFromTriplets(at.begin(), at.end());
  out.b = Matrix::Zero(2 * m, 1);
  out.b(m + spec.input_node, 0) = 1.0;
  out.c = Matrix::Zero(1, 2 * m);
  out.c(0, out_node) = 1.0;
  return out;
}

Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  return HouseholderQR<double>(g).thin_q();
}

}  // namespace

LinearSystem gen_msd_chain(const MSDChainSpec& spec) {
  ChainMatrices m = chain_matrices(spec);
  return LinearSystem(std::move(m.e), std::move(m.a), std::move(m.b), std::move(m.c));
}

NonNormalSystem gen_nonnormal_stable(const NonNormalSpec& spec) {
  const Index n = spec.n;
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "nonnormal: n must be positive");
  if (!(spec.lambda_min > 0.0) || !(spec.lambda_max >= spec.lambda_min))
    throw Error(ErrorKind::InvalidArgument, "nonnormal: need 0 < lambda_min <= lambda_max");
  if (!(spec.kappa >= 1.0)) throw Error(ErrorKind::InvalidArgument, "nonnormal: kappa must be >= 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(spec.lambda_min, spec.lambda_max);
  for (int attempt = 0; attempt <= spec.max_resamples; ++attempt) {
    Vector lambda(n);
    for (Index i = 0; i < n; ++i) lambda(i) = -uniform(rng);
    Vector sigma(n);
    for (Index i = 0; i < n; ++i)
      sigma(i) = std::pow(spec.kappa, n == 1 ? 0.0 : double(i) / double(n - 1));
    const Matrix q1 = random_orthogonal(n, rng), q2 = random_orthogonal(n, rng);
    // T Lambda T^{-1} = Q1 S (Q2^T Lambda Q2) S^{-1} Q1^T
    const Matrix inner = q2.transpose() * lambda.asDiagonal() * q2;
    const Matrix scaled = sigma.asDiagonal() * inner * sigma.cwiseInverse().asDiagonal();
    const Matrix a = q1 * scaled * q1.transpose();
    NonNormalSystem out{LinearSystem::from_dense(Matrix::Identity(n, n), a, Matrix::Ones(n, 1) / std::sqrt(double(n)),
                                                 Matrix::Ones(1, n) / std::sqrt(double(n))),
                        lambda, 0, attempt};
    const Eigen::SelfAdjointEigenSolver<Matrix> sym(a + a.transpose(), Eigen::EigenvaluesOnly);
    const Vector mu = sym.eigenvalues();
    const double tau = 1e-12 * mu.cwiseAbs().maxCoeff();
    out.k = (mu.array() >= -tau).count();
    if (out.k >= 1 || !spec.require_nondissipative) return out;
  }
  throw Error(ErrorKind::ResampleExhausted,
              "nonnormal: no non-dissipative sample after " + std::to_string(spec.max_resamples) +
                  " resamples; increase kappa");
}

LinearSystem gen_convection_diffusion(const ConvDiffSpec& spec) {
  const Index n = spec.n;
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "convdiff: n must be >= 2");
  if (!(spec.diffusion > 0.0)) throw Error(ErrorKind::InvalidArgument, "convdiff: diffusion must be positive");
  if (!(spec.grade >= 1.0)) throw Error(ErrorKind::InvalidArgument, "convdiff: grade must be >= 1");
  if (!std::isfinite(spec.velocity)) throw Error(ErrorKind::InvalidArgument, "convdiff: invalid velocity");

  // Geometric widths, coarse at the inflow (left) and fine at the outflow
  // boundary layer (right).
  Vector width(n);
  const double ratio = std::pow(spec.grade, 1.0 / double(n - 1));
  for (Index i = 0; i < n; ++i) width(i) = std::pow(ratio, double(n - 1 - i));
  width /= width.sum();
  Vector face(n + 1);
  face(0) = 0.0;
  for (Index i = 0; i < n; ++i) face(i + 1) = face(i) + width(i);
  face(n) = 1.0;
  Vector center(n);
  for (Index i = 0; i < n; ++i) center(i) = 0.5 * (face(i) + face(i + 1));

  auto velocity = [&](double x) {
    return spec.profile == VelocityProfile::Ramp ? spec.velocity * x : spec.velocity;
  };
  std::vector<Triplet> at;
  // Face f lies between cell f-1 and cell f; boundary faces see u = 0.
  for (Index f = 0; f <= n; ++f) {
    const Index left = f - 1, right = f;
    const double dist = f == 0 ? center(0) : f == n ? 1.0 - center(n - 1) : center(f) - center(f - 1);
    const double g = spec.diffusion / dist;
    // Diffusive flux a (u_right - u_left) / dist enters right cell with minus, left with plus.
    if (left >= 0) at.emplace_back(left, left, -g);
    if (right < n) at.emplace_back(right, right, -g);
    if (left >= 0 && right < n) {
      at.emplace_back(left, right, g);
      at.emplace_back(right, left, g);
    }
    // Upwind convective flux v u_upwind leaves the upwind side and enters the other.
    const double v = velocity(face(f));
    const Index up = v >= 0.0 ? left : right;
    if (up < 0 || up >= n) continue;
    const double flux = std::abs(v);
    at.emplace_back(up, up, -flux);
    const Index down = v >= 0.0 ? right : left;
    if (down >= 0 && down < n) at.emplace_back(down, up, flux);
  }
  SparseMatrix a(n, n), e(n, n);
  a.setFromTriplets(at.begin(), at.end());
  std::vector<Triplet> et;
  for (Index i = 0; i < n; ++i) et.emplace_back(i, i, width(i));
  e.setFromTriplets(et.begin(), et.end());

  Matrix b = Matrix::Zero(n, 1), c = Matrix::Zero(1, n);
  double out_width = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (center(i) >= 0.2 && center(i) <= 0.3) b(i, 0) = width(i);
    if (center(i) >= 0.6 && center(i) <= 0.7) {
      c(0, i) = width(i);
      out_width += width(i);
    }
  }
  if (b.isZero(0.0)) b(Index(0.25 * double(n)), 0) = width(Index(0.25 * double(n)));
  if (out_width == 0.0) {
    const Index i = Index(0.65 * double(n));
    c(0, i) = 1.0;
  } else {
    c /= out_width;
  }
  if (!spec.scale_to_identity) return LinearSystem(std::move(e), std::move(a), std::move(b), std::move(c));
  const Vector inv = width.cwiseInverse();
  SparseMatrix scaled = inv.asDiagonal() * a;
  return LinearSystem::standard(std::move(scaled), inv.asDiagonal() * b, std::move(c));
}

NonlinearSystem gen_cubic_msd(const CubicMSDSpec& spec) {
  if (!(spec.gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cubic msd: gamma must be >= 0");
  ChainMatrices m = chain_matrices(spec.chain);
  const Index masses = m.m;
  const double gamma = spec.gamma;
  const SparseMatrix a = m.a;
  VectorField f = [a, masses, gamma](const Vector& x) -> Vector {
    Vector out = a * x;
    out.segment(masses, masses).array() -= gamma * x.head(masses).array().cube();
    return out;
  };
  JacobianField jac = [a, masses, gamma](const Vector& x) -> SparseMatrix {
    SparseMatrix out = a;
    for (Index i = 0; i < masses; ++i) out.coeffRef(masses + i, i) -= 3.0 * gamma * x(i) * x(i);
    return out;
  };
  return NonlinearSystem(std::move(m.e), std::move(f), std::move(jac), Vector::Zero(2 * masses), std::move(m.b),
                         std::move(m.c));
}

LinearSystem crafted_counterexample() {
  Matrix a(2, 2), b(2, 1), c(1, 2);
  a << -1, 4, 0, -1;
  b << 1, 1;
  c << 1, 0;
  return LinearSystem::from_dense(Matrix::Identity(2, 2), a, b, c);
}

NonlinearSystem crafted_cubic(double gamma) {
  const LinearSystem lin = crafted_counterexample();
  const SparseMatrix a = lin.a();
  VectorField f = [a, gamma](const Vector& x) -> Vector {
    return a * x - gamma * x.array().cube().matrix();
  };
  JacobianField jac = [a, gamma](const Vector& x) -> SparseMatrix {
    SparseMatrix out = a;
    for (Index i = 0; i < x.size(); ++i) out.coeffRef(i, i) -= 3.0 * gamma * x(i) * x(i);
    return out;
  };
  return NonlinearSystem(lin.e(), std::move(f), std::move(jac), Vector::Zero(2), lin.b(), lin.c());
}

}  // namespace stabmor
