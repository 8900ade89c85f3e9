#include "stabmor/linalg/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/lanczos.hpp"
#include "stabmor/linalg/sym_eig.hpp"

namespace stabmor {
namespace {

constexpr Index kGramLimit = 1000;

void sort_descending(Matrix& u, Vector& sigma) {
  std::vector<Index> order(sigma.size());
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return sigma(a) > sigma(b); });
  Matrix u_sorted(u.rows(), u.cols());
  Vector s_sorted(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i) {
    u_sorted.col(i) = u.col(order[i]);
    s_sorted(i) = sigma(order[i]);
  }
  u = std::move(u_sorted);
  sigma = std::move(s_sorted);
}

}  // namespace

Index orthonormalize_columns(Matrix& m, double drop_rel) {
  Index kept = 0;
  for (Index j = 0; j < m.cols(); ++j) {
    Vector v = m.col(j);
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i < kept; ++i) v -= m.col(i).dot(v) * m.col(i);
    const double remaining = v.norm();
    if (original == 0.0 || remaining <= drop_rel * original) continue;
    m.col(kept++) = v / remaining;
  }
  m.conservativeResize(Eigen::NoChange, kept);
  return kept;
}

ThinSvd thin_svd(const Matrix& m, Index r, const Tolerances& tol) {
  const Index n = m.rows();
  const Index s = m.cols();
  if (r < 0 || r > std::min(n, s))
    throw Error(ErrorKind::InvalidArgument, "thin_svd: rank target exceeds min(n, s)");
  ThinSvd out;
  out.u.resize(n, r);
  out.sigma.resize(r);
  if (r == 0) return out;

  if (std::min(n, s) <= kGramLimit && n <= s) {
    const Matrix gram = m * m.transpose();
    const SymEig<double> eig = sym_eig_dense<double>(0.5 * (gram + gram.transpose()), tol);
    out.u = eig.vectors.leftCols(r);
    // ||m^T u|| is accurate down to eps * sigma_1, unlike sqrt(lambda)
    for (Index j = 0; j < r; ++j) out.sigma(j) = (m.transpose() * out.u.col(j)).norm();
  } else if (std::min(n, s) <= kGramLimit) {
    const Matrix gram = m.transpose() * m;
    const SymEig<double> eig = sym_eig_dense<double>(0.5 * (gram + gram.transpose()), tol);
    const Matrix right = eig.vectors.leftCols(r);
    Matrix image = m * right;
    const double sigma1 = image.col(0).norm();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (Index j = 0; j < r; ++j) {
      out.sigma(j) = image.col(j).norm();
      if (out.sigma(j) > 1e-14 * sigma1 && out.sigma(j) > 0.0) {
        out.u.col(j) = image.col(j) / out.sigma(j);
      } else {
        for (Index i = 0; i < n; ++i) out.u(i, j) = normal(rng);
      }
    }
    // restore orthonormality lost to Gram squaring; nearly a no-op for
    // well separated columns
    Matrix q = out.u;
    if (orthonormalize_columns(q, 1e-14) != r)
      throw Error(ErrorKind::RankDeficient, "thin_svd: could not complete an orthonormal basis");
    out.u = q;
  } else {
    const SymmetricOperator gram_op = [&m](const Vector& v) -> Vector {
      return m * (m.transpose() * v);
    };
    LanczosOptions opts;
    opts.tol = 1e-12;
    const DominantEigs eig = dominant_sym_eigs(gram_op, n, r, opts);
    out.u = eig.vectors;
    for (Index j = 0; j < r; ++j) out.sigma(j) = (m.transpose() * out.u.col(j)).norm();
  }
  sort_descending(out.u, out.sigma);
  return out;
}

}  // namespace stabmor
