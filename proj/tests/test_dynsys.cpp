#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "stabmor/dynsys.hpp"
#include "stabmor/errors.hpp"
#include "test_util.hpp"

using namespace stabmor;
using namespace stabmor::testing;

namespace {

LinearSystem dense_sys(const Matrix& a, const Matrix& e) {
  const Index n = a.rows();
  return LinearSystem::from_dense(e, a, Matrix::Ones(n, 1), Matrix::Ones(1, n));
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("spectral abscissa of small pencils") {
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(spectral_abscissa(dense_sys(m2(-1, 0, 0, -2), id)) == doctest::Approx(-1.0));
  CHECK(spectral_abscissa(dense_sys(-id, 2 * id)) == doctest::Approx(-0.5));
  CHECK(std::abs(spectral_abscissa(dense_sys(m2(0, 1, -1, 0), id))) < 1e-14);
}

TEST_CASE("singular E is refused") {
  Matrix e = Matrix::Identity(2, 2);
  e(1, 1) = 0;
  CHECK_THROWS_AS(dense_sys(-Matrix::Identity(2, 2), e), Error);
  try {
    dense_sys(-Matrix::Identity(2, 2), e);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::SingularE);
  }
}

TEST_CASE("symmetric part spectrum") {
  const Matrix id = Matrix::Identity(2, 2);
  const SymmetricPartSpectrum diss = symmetric_part_nonnegative(dense_sys(-id, id));
  CHECK(diss.k == 0);

  const SymmetricPartSpectrum s = symmetric_part_nonnegative(dense_sys(m2(-1, 3, 0, -1), id));
  CHECK(s.k == 1);
  CHECK(s.mu_max == doctest::Approx(1.0));
  CHECK(s.mu(0) == doctest::Approx(1.0));
  CHECK(s.mu(1) == doctest::Approx(-5.0));
  CHECK(std::abs(std::abs(s.u(0, 0)) - std::sqrt(0.5)) < 1e-12);
  CHECK(s.u(0, 0) * s.u(1, 0) > 0);
}

TEST_CASE("symmetric part via Lanczos matches dense at n = 400") {
  std::mt19937_64 rng(3);
  const Index n = 400;
  Matrix a = random_stable(n, rng, 1.2);
  a(0, n - 1) += 6.0;
  const Vector d = Vector::LinSpaced(n, 1.0, 2.0);
  Matrix e = d.asDiagonal();
  const LinearSystem sys = dense_sys(a, e);
  const Matrix ea = e.inverse() * a;
  const Eigen::SelfAdjointEigenSolver<Matrix> oracle(ea + ea.transpose());
  const Index k_dense = (oracle.eigenvalues().array() >= 0).count();
  REQUIRE(k_dense >= 1);
  const SymmetricPartSpectrum s = symmetric_part_nonnegative(sys);
  CHECK(s.k == k_dense);
  CHECK(s.mu_max == doctest::Approx(oracle.eigenvalues().maxCoeff()).epsilon(1e-8));
}

TEST_CASE("stability predicates") {
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(is_asymptotically_stable(dense_sys(-id, id)));
  CHECK(is_dissipative(dense_sys(-id, id)));
  CHECK(is_asymptotically_stable(dense_sys(m2(-1, 3, 0, -1), id)));
  CHECK_FALSE(is_dissipative(dense_sys(m2(-1, 3, 0, -1), id)));
  CHECK_FALSE(is_asymptotically_stable(dense_sys(m2(1, 0, 0, -1), id)));
  const StabilityReport r = stability_report(dense_sys(m2(-1, 3, 0, -1), id));
  CHECK(r.k == 1);
  CHECK(r.asymptotically_stable());
}

TEST_CASE("dissipative implies stable on random systems") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 5 + trial;
    const Matrix a = random_stable(n, rng, 0.5 + 0.1 * trial);
    const LinearSystem sys = dense_sys(a, Matrix::Identity(n, n));
    if (is_dissipative(sys)) CHECK(spectral_abscissa(sys) < 0);
  }
}

TEST_CASE("spectral abscissa invariant under left multiplication") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 12;
    const Matrix a = random_stable(n, rng);
    const Matrix e = random_spd(n, rng);
    const Matrix t = random_matrix(n, n, rng) + 3 * Matrix::Identity(n, n);
    CHECK(std::abs(spectral_abscissa(e, a) - spectral_abscissa(Matrix(t * e), Matrix(t * a))) < 1e-8);
  }
}

TEST_CASE("transfer function evaluation") {
  const Matrix one = Matrix::Ones(1, 1);
  const LinearSystem scalar = LinearSystem::from_dense(one, -one, one, one);
  const TransferFunction tf(scalar);
  CHECK(std::abs(eval_transfer(tf, 0.0)(0, 0) - 1.0) < 1e-14);
  for (double w : {0.1, 1.0, 10.0})
    CHECK(std::abs(eval_transfer(tf, {0.0, w})(0, 0)) == doctest::Approx(1 / std::sqrt(1 + w * w)));

  const TransferFunction pole(LinearSystem::from_dense(one, Matrix::Zero(1, 1), one, one));
  CHECK_THROWS_AS(pole(0.0), Error);

  std::mt19937_64 rng(9);
  for (Index n : {3, 80}) {
    const Matrix a = random_stable(n, rng), e = random_spd(n, rng);
    const Matrix b = random_matrix(n, 1, rng), c = random_matrix(1, n, rng);
    const TransferFunction h(LinearSystem::from_dense(e, a, b, c));
    for (int i = 0; i < 20; ++i) {
      const std::complex<double> s(0.0, std::pow(10.0, -2 + 0.2 * i));
      const ComplexMatrix dense = c.cast<std::complex<double>>() *
                                  (s * e.cast<std::complex<double>>() - a.cast<std::complex<double>>()).inverse() *
                                  b.cast<std::complex<double>>();
      CHECK(std::abs(h(s)(0, 0) - dense(0, 0)) <= 1e-10 * std::abs(dense(0, 0)));
    }
  }
}

TEST_CASE("transfer function invariant under a left transformation") {
  std::mt19937_64 rng(21);
  const Index n = 10;
  const Matrix a = random_stable(n, rng), e = random_spd(n, rng), m = random_spd(n, rng);
  const Matrix b = random_matrix(n, 1, rng), c = random_matrix(1, n, rng);
  const Matrix l = e.transpose() * m;
  const TransferFunction h0(LinearSystem::from_dense(e, a, b, c));
  const TransferFunction h1(LinearSystem::from_dense(l * e, l * a, l * b, c));
  for (int i = 0; i < 20; ++i) {
    const std::complex<double> s(0.0, std::pow(10.0, -2 + 0.2 * i));
    const auto v0 = h0(s)(0, 0), v1 = h1(s)(0, 0);
    CHECK(std::abs(v0 - v1) <= 1e-8 * std::abs(v0));
  }
}
