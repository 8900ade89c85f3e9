#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>

#include <Eigen/SVD>

#include "doctest.h"
#include "stabmor/errors.hpp"
#include "stabmor/linalg/lanczos.hpp"
#include "stabmor/linalg/lu.hpp"
#include "stabmor/linalg/mtx.hpp"
#include "stabmor/linalg/qr.hpp"
#include "stabmor/linalg/schur.hpp"
#include "stabmor/linalg/svd.hpp"
#include "stabmor/linalg/sym_eig.hpp"
#include "test_util.hpp"

using namespace stabmor;
using stabmor::testing::random_matrix;
using stabmor::testing::random_symmetric;

TEST_CASE("lu_factor solves identity, diagonal and random systems") {
  const LUFactorization id(Matrix(Matrix::Identity(3, 3)));
  const Vector b = Vector::LinSpaced(3, 1, 3);
  CHECK((id.solve(b) - b).norm() == doctest::Approx(0.0));

  SparseMatrix d(2, 2);
  d.insert(0, 0) = 2;
  d.insert(1, 1) = 4;
  const Vector x = lu_factor(d).solve(Vector(Vector::Constant(2, 0.0) + Eigen::Vector2d(2, 4)));
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(1.0));

  std::mt19937_64 rng(1);
  for (int sparse = 0; sparse < 2; ++sparse) {
    const Matrix m = random_matrix(50, 50, rng) + 10.0 * Matrix::Identity(50, 50);
    const Vector xs = random_matrix(50, 1, rng);
    const LUFactorization lu = sparse ? lu_factor(testing::to_sparse(m)) : lu_factor(m);
    CHECK((lu.solve(Vector(m * xs)) - xs).norm() <= 1e-10 * xs.norm());
    CHECK((lu.solve_transposed(Vector(m.transpose() * xs)) - xs).norm() <= 1e-10 * xs.norm());
  }
}

TEST_CASE("lu_factor rejects singular matrices") {
  Matrix m(2, 2);
  m << 1, 2, 2, 4;
  CHECK_THROWS_AS(lu_factor(m), Error);
  SparseMatrix s = m.sparseView();
  try {
    lu_factor(s);
    FAIL("expected SingularMatrix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularMatrix);
  }
  Matrix near = Matrix::Identity(3, 3);
  near(2, 2) = 1e-18;
  CHECK_THROWS_AS(lu_factor(SparseMatrix(near.sparseView(0.0, 0.0))), Error);
}

TEST_CASE("householder_qr trivial cases") {
  const HouseholderQR<double> qr1(Matrix(Eigen::Vector3d(1, 0, 0)));
  CHECK(std::abs(qr1.r()(0, 0)) == doctest::Approx(1.0));
  const Matrix qe1 = qr1.apply_q(Matrix(Eigen::Vector3d(1, 0, 0)));
  CHECK(std::abs(qe1(0, 0)) == doctest::Approx(1.0));
  CHECK(qe1.bottomRows(2).norm() == doctest::Approx(0.0));

  const HouseholderQR<double> qr2(Matrix(Matrix::Identity(2, 2)));
  const Matrix r = qr2.r();
  CHECK(std::abs(r(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(r(1, 1)) == doctest::Approx(1.0));
  CHECK(r(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("householder_qr orthogonality and reconstruction") {
  std::mt19937_64 rng(2);
  for (Index n : {5, 50, 200}) {
    const Index q = std::min<Index>(5, n);
    const Matrix m = random_matrix(n, q, rng);
    const HouseholderQR<double> qr(m);
    const Matrix full_q = qr.apply_q(Matrix(Matrix::Identity(n, n)));
    CHECK((full_q.transpose() * full_q - Matrix::Identity(n, n)).norm() <= 1e-12);
    Matrix r = Matrix::Zero(n, q);
    r.topRows(q) = qr.r();
    CHECK((qr.apply_q(r) - m).norm() <= 1e-12 * m.norm());
    CHECK((qr.apply_qt(qr.apply_q(m)) - m).norm() <= 1e-12 * m.norm());
    CHECK_FALSE(qr.rank_deficient());
  }
  Matrix dep(6, 2);
  dep.col(0).setOnes();
  dep.col(1).setConstant(2.0);
  CHECK(HouseholderQR<double>(dep).rank_deficient());
}

TEST_CASE("sym_eig_dense examples") {
  const SymEig<double> d = sym_eig_dense<double>(Eigen::Vector3d(3, 1, 2).asDiagonal().toDenseMatrix());
  CHECK(d.values(0) == doctest::Approx(3));
  CHECK(d.values(1) == doctest::Approx(2));
  CHECK(d.values(2) == doctest::Approx(1));

  Matrix m(2, 2);
  m << -2, 3, 3, -2;
  const SymEig<double> e = sym_eig_dense(m);
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(-5.0));
  CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(e.vectors(0, 0) * e.vectors(1, 0) > 0);
  CHECK(e.vectors(0, 1) * e.vectors(1, 1) < 0);

  Matrix bad(2, 2);
  bad << 1, 2, 0, 1;
  try {
    sym_eig_dense(bad);
    FAIL("expected SymmetryViolation");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::SymmetryViolation);
  }
}

TEST_CASE("sym_eig_dense residuals and reconstruction across sizes") {
  std::mt19937_64 rng(3);
  for (Index n : {5, 50, 80, 200}) {
    const Matrix m = random_symmetric(n, rng);
    const SymEig<double> e = sym_eig_dense(m);
    for (Index j = 0; j + 1 < n; ++j) CHECK(e.values(j) >= e.values(j + 1));
    CHECK((m * e.vectors - e.vectors * e.values.asDiagonal()).norm() <= 1e-10 * m.norm());
    CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - m).norm() <= 1e-10 * m.norm());
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).norm() <= 1e-10);
  }
}

TEST_CASE("dominant_sym_eigs on diagonal and definite operators") {
  const Index n = 60;
  Vector diag(n);
  diag(0) = 5;
  diag(1) = 4;
  for (Index i = 2; i < n; ++i) diag(i) = -double(i);
  const SymmetricOperator op = [&](const Vector& v) -> Vector { return diag.cwiseProduct(v); };
  const DominantEigs top2 = dominant_sym_eigs(op, n, 2);
  CHECK(top2.values(0) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(top2.values(1) == doctest::Approx(4.0).epsilon(1e-10));

  std::mt19937_64 rng(4);
  const Matrix g = random_matrix(n, n, rng);
  const Matrix negdef = -(g * g.transpose()) - Matrix::Identity(n, n);
  const DominantEigs neg = dominant_sym_eigs([&](const Vector& v) -> Vector { return negdef * v; }, n, 3);
  for (Index j = 0; j < 3; ++j) CHECK(neg.values(j) < 0.0);
}

TEST_CASE("dominant_sym_eigs agrees with the dense solver") {
  std::mt19937_64 rng(5);
  for (Index n : {5, 50, 200}) {
    const Matrix m = random_symmetric(n, rng);
    const Index l = std::min<Index>(10, n);
    const DominantEigs it = dominant_sym_eigs([&](const Vector& v) -> Vector { return m * v; }, n, l);
    const SymEig<double> dense = sym_eig_dense(m);
    for (Index j = 0; j < l; ++j) {
      CHECK(std::abs(it.values(j) - dense.values(j)) <= 1e-6 * std::abs(dense.values(j)));
      const double residual = (m * it.vectors.col(j) - it.values(j) * it.vectors.col(j)).norm();
      CHECK(residual <= 1e-8 * (std::abs(it.values(0)) + it.norm_estimate));
      const double gap_lo = j + 1 < n ? dense.values(j) - dense.values(j + 1) : 1.0;
      const double gap_hi = j > 0 ? dense.values(j - 1) - dense.values(j) : 1.0;
      if (std::min(gap_lo, gap_hi) > 1e-3 * dense.values.cwiseAbs().maxCoeff()) {
        const double cosine = std::min(1.0, std::abs(it.vectors.col(j).dot(dense.vectors.col(j))));
        CHECK(std::acos(cosine) <= 1e-4);
      }
    }
    CHECK((it.vectors.transpose() * it.vectors - Matrix::Identity(l, l)).norm() <= 1e-10);
  }
}

TEST_CASE("dominant_sym_eigs reports non-convergence") {
  const Index n = 400;
  std::mt19937_64 rng(6);
  const Matrix m = random_symmetric(n, rng);
  LanczosOptions opts;
  opts.max_restarts = 0;
  opts.basis_size = 12;
  opts.tol = 1e-14;
  try {
    dominant_sym_eigs([&](const Vector& v) -> Vector { return m * v; }, n, 10, opts);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.best_residual() > 0.0);
  }
}

TEST_CASE("thin_svd trivial cases") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3;
  m(1, 1) = 1;
  const ThinSvd s = thin_svd(m, 1);
  CHECK(s.sigma(0) == doctest::Approx(3.0));
  CHECK(std::abs(s.u(0, 0)) == doctest::Approx(1.0));

  const Vector a = Eigen::Vector3d(1, 2, 2);
  const Vector b = Eigen::Vector4d(1, 0, 1, 0);
  const Matrix rank1 = a * b.transpose();
  const ThinSvd s1 = thin_svd(rank1, 3);
  CHECK(s1.sigma(0) == doctest::Approx(a.norm() * b.norm()));
  CHECK(s1.sigma(1) <= 1e-14 * s1.sigma(0));
  CHECK(s1.sigma(2) <= 1e-14 * s1.sigma(0));
  const ThinSvd s1t = thin_svd(Matrix(rank1.transpose()), 3);
  CHECK(s1t.sigma(0) == doctest::Approx(a.norm() * b.norm()));
  CHECK(s1t.sigma(1) <= 1e-14 * s1t.sigma(0));
}

TEST_CASE("thin_svd best-approximation error matches trailing singular values") {
  std::mt19937_64 rng(7);
  for (bool wide : {false, true}) {
    const Matrix m = wide ? random_matrix(40, 100, rng) : random_matrix(100, 40, rng);
    const Eigen::BDCSVD<Matrix> oracle(m);
    const Vector& sv = oracle.singularValues();
    for (Index r : {1, 10, 25}) {
      const ThinSvd s = thin_svd(m, r);
      CHECK((s.u.transpose() * s.u - Matrix::Identity(r, r)).norm() <= 1e-10);
      for (Index j = 0; j < r; ++j) CHECK(s.sigma(j) == doctest::Approx(sv(j)).epsilon(1e-10));
      const double err = (m - s.u * (s.u.transpose() * m)).norm();
      const double trailing = sv.tail(sv.size() - r).norm();
      CHECK(std::abs(err - trailing) <= 1e-10 * m.norm());
    }
  }
}

TEST_CASE("thin_svd Lanczos route for large dimensions") {
  std::mt19937_64 rng(8);
  const Matrix m = random_matrix(1100, 1050, rng) * 0.01 + random_matrix(1100, 3, rng) * random_matrix(3, 1050, rng);
  const ThinSvd s = thin_svd(m, 3);
  const Eigen::BDCSVD<Matrix> oracle(m);
  for (Index j = 0; j < 3; ++j) CHECK(s.sigma(j) == doctest::Approx(oracle.singularValues()(j)).epsilon(1e-8));
}

TEST_CASE("real_schur examples") {
  Matrix upper(3, 3);
  upper << -1, 2, 3, 0, -2, 4, 0, 0, -3;
  const RealSchurForm<double> s = real_schur(upper);
  CHECK((s.q * s.t * s.q.transpose() - upper).norm() <= 1e-12);
  auto ev = schur_eigenvalues(s.t);
  std::vector<double> re;
  for (auto l : ev) re.push_back(l.real());
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-3));
  CHECK(re[2] == doctest::Approx(-1));

  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  const RealSchurForm<double> r = real_schur(rot);
  CHECK(schur_blocks(r.t).size() == 1);
  const auto rev = schur_eigenvalues(r.t);
  CHECK(rev[0].real() == doctest::Approx(0.0));
  CHECK(std::abs(rev[0].imag()) == doctest::Approx(1.0));

  Tolerances small_cap;
  small_cap.dense_cap = 2;
  CHECK_THROWS_AS(real_schur(Matrix(Matrix::Identity(3, 3)), small_cap), Error);
}

namespace {

// Roots of the characteristic polynomial of a 3x3 matrix by Durand-Kerner.
std::vector<std::complex<double>> charpoly_roots3(const Matrix& m) {
  const double c2 = -m.trace();
  const double c1 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                    m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const double c0 = -m.determinant();
  auto p = [&](std::complex<double> z) { return ((z + c2) * z + c1) * z + c0; };
  std::vector<std::complex<double>> z = {{0.4, 0.9}, {-0.65, 0.72}, {0.3, -1.1}};
  for (int it = 0; it < 500; ++it)
    for (int i = 0; i < 3; ++i) {
      std::complex<double> denom = 1.0;
      for (int j = 0; j < 3; ++j)
        if (j != i) denom *= z[i] - z[j];
      z[i] -= p(z[i]) / denom;
    }
  return z;
}

}  // namespace

TEST_CASE("real_schur reconstruction and characteristic polynomial oracle") {
  std::mt19937_64 rng(9);
  for (Index n : {5, 50, 60, 200}) {
    const Matrix m = random_matrix(n, n, rng);
    const RealSchurForm<double> s = real_schur(m);
    CHECK((s.q * s.t * s.q.transpose() - m).norm() <= 1e-10 * m.norm());
    CHECK((s.q.transpose() * s.q - Matrix::Identity(n, n)).norm() <= 1e-10);
    for (Index j = 0; j < n; ++j)
      for (Index i = j + 2; i < n; ++i) CHECK(s.t(i, j) == 0.0);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(3, 3, rng);
    const auto schur_ev = schur_eigenvalues(real_schur(m).t);
    const auto roots = charpoly_roots3(m);
    for (const auto& l : schur_ev) {
      double best = 1e300;
      for (const auto& z : roots) best = std::min(best, std::abs(z - l));
      CHECK(best <= 1e-8);
    }
  }
}

TEST_CASE("matrix market round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "stabmor_mtx_test";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(10);
  const Matrix dense = random_matrix(4, 3, rng);
  write_mtx(dir / "d.mtx", dense);
  CHECK(read_mtx_dense(dir / "d.mtx") == dense);

  SparseMatrix sp(5, 5);
  sp.insert(0, 0) = 1.5;
  sp.insert(3, 1) = -2.25e-7;
  sp.insert(1, 3) = -2.25e-7;
  sp.insert(4, 4) = 1.0 / 3.0;
  write_mtx(dir / "s.mtx", sp);
  CHECK(Matrix(read_mtx_sparse(dir / "s.mtx")) == Matrix(sp));
  write_mtx(dir / "sym.mtx", sp, true);
  CHECK(Matrix(read_mtx_sparse(dir / "sym.mtx")) == Matrix(sp));

  const Matrix sym = testing::random_symmetric(4, rng);
  write_mtx(dir / "dsym.mtx", sym, true);
  CHECK(read_mtx_dense(dir / "dsym.mtx") == sym);
  CHECK_THROWS_AS(read_mtx_sparse(dir / "missing.mtx"), Error);
  std::filesystem::remove_all(dir);
}
