#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "stabmor/errors.hpp"
#include "stabmor/stabilize.hpp"
#include "test_util.hpp"

using namespace stabmor;
using namespace stabmor::testing;

namespace {

LinearSystem siso(const Matrix& e, const Matrix& a) {
  const Index n = a.rows();
  Matrix b = Matrix::Zero(n, 1), c = Matrix::Zero(1, n);
  b(0, 0) = 1;
  c(0, n - 1) = 1;
  return LinearSystem::from_dense(e, a, b, c);
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

StabilizerFactor exact_stabilizer(const LinearSystem& sys) {
  StabilizerOptions opts;
  opts.mode = LyapunovMode::DenseExact;
  return assemble_stabilizer(sys, opts);
}

}  // namespace

TEST_CASE("shift factor for the 2x2 example") {
  const LinearSystem sys = siso(Matrix::Identity(2, 2), m2(-1, 3, 0, -1));
  const StabShift s = build_stab_factor_f(sys, 1.0);
  CHECK(s.k == 1);
  CHECK(s.mu_max == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(s.u_tilde(0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(s.u_tilde(0, 0) - s.u_tilde(1, 0)) < 1e-12);
  const Matrix f = dense_shifted_f(sys, s);
  CHECK((f - m2(3, -2, -2, 3)).norm() < 1e-12);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(f).eigenvalues();
  CHECK(ev(0) == doctest::Approx(1.0));
  CHECK(ev(1) == doctest::Approx(5.0));
}

TEST_CASE("dissipative systems need no shift") {
  const LinearSystem sys = siso(Matrix::Identity(3, 3), -Matrix::Identity(3, 3));
  try {
    build_stab_factor_f(sys, 1.0);
    FAIL("expected AlreadyDissipative");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AlreadyDissipative);
  }
  CHECK_THROWS_AS(build_stab_factor_f(siso(Matrix::Identity(2, 2), m2(-1, 3, 0, -1)), 0.0), Error);
}

TEST_CASE("shifted F spectrum follows the eigenvalue shift pattern") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 10 + 4 * trial;
    const double delta = 0.25 + 0.1 * trial;
    const LinearSystem sys = siso(random_spd(n, rng), random_nonnormal(n, rng));
    const StabShift s = build_stab_factor_f(sys, delta);
    const Matrix ea = sys.dense_state_matrix();
    const Vector mu = Eigen::SelfAdjointEigenSolver<Matrix>(ea + ea.transpose()).eigenvalues().reverse();
    std::vector<double> expected;
    for (Index j = 0; j < n; ++j) expected.push_back(j < s.k ? mu(0) - mu(j) + delta : -mu(j));
    std::sort(expected.begin(), expected.end());
    const Vector got = Eigen::SelfAdjointEigenSolver<Matrix>(dense_shifted_f(sys, s)).eigenvalues();
    for (Index j = 0; j < n; ++j) CHECK(std::abs(got(j) - expected[j]) < 1e-8);
    CHECK(got(0) > 0);
  }
}

TEST_CASE("shifted F is positive definite at n = 200") {
  std::mt19937_64 rng(43);
  const LinearSystem sys = siso(Matrix::Identity(200, 200), random_nonnormal(200, rng, 4.0));
  const StabShift s = build_stab_factor_f(sys, 1.0);
  CHECK(s.k >= 1);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(dense_shifted_f(sys, s)).eigenvalues().minCoeff() > 0);
}

TEST_CASE("stabilizer action") {
  const Index n = 4;
  const LinearSystem diss = siso(Matrix::Identity(n, n), -Matrix::Identity(n, n));
  const StabilizerFactor none = assemble_stabilizer(diss, {});
  CHECK(none.q() == 0);
  CHECK(none.k() == 0);
  CHECK((none.dense() - Matrix::Identity(n, n)).norm() == 0.0);

  StabShift shift;
  shift.k = 1;
  const StabilizerFactor e1(diss, Matrix::Identity(n, 1), shift, LyapunovMode::DenseExact, {}, 0);
  Matrix expected = Matrix::Identity(n, n);
  expected(0, 0) = 2;
  CHECK((e1.dense() - expected).norm() == 0.0);
}

TEST_CASE("low-rank stabilizer is positive definite and matches the dense one") {
  std::mt19937_64 rng(47);
  const Index n = 300;
  Matrix a = random_stable(n, rng, 1.5);
  a(0, 1) += 8.0;
  const Vector d = Vector::LinSpaced(n, 1.0, 3.0);
  const LinearSystem sys = siso(Matrix(d.asDiagonal()), a);
  StabilizerOptions opts;
  opts.mode = LyapunovMode::LowRankAdi;
  opts.adi.max_steps = 30;
  opts.adi.residual_tol = 1e-12;
  const StabilizerFactor lr = assemble_stabilizer(sys, opts);
  REQUIRE(lr.k() >= 1);
  CHECK(lr.q() == lr.adi_steps() * lr.k());
  CHECK(lr.q() >= lr.k());
  for (int i = 0; i < 200; ++i) {
    const Vector v = random_matrix(n, 1, rng);
    CHECK(v.dot(lr.apply(v)) > 0);
  }
  const StabilizerFactor ex = exact_stabilizer(sys);
  const Matrix dm_lr = lr.z() * lr.z().transpose(), dm_ex = ex.z() * ex.z().transpose();
  CHECK((dm_lr - dm_ex).norm() <= 1e-6 * dm_ex.norm());
}

TEST_CASE("auto mode refuses low-rank ADI when k is large") {
  std::mt19937_64 rng(53);
  const LinearSystem sys = siso(Matrix::Identity(40, 40), random_nonnormal(40, rng, 6.0));
  const StabilizerFactor f = assemble_stabilizer(sys, {});
  REQUIRE(f.k() > 2);
  CHECK(f.mode() == LyapunovMode::DenseExact);
  StabilizerOptions lr;
  lr.mode = LyapunovMode::LowRankAdi;
  CHECK_THROWS_AS(assemble_stabilizer(sys, lr), Error);
}

TEST_CASE("exact stabilizer solves the full Lyapunov equation") {
  std::mt19937_64 rng(59);
  const Index n = 30;
  const Matrix e = random_spd(n, rng), a = random_nonnormal(n, rng);
  const LinearSystem sys = siso(e, a);
  const StabilizerFactor stab = exact_stabilizer(sys);
  const Matrix f = dense_shifted_f(sys, stab.shift());
  const Matrix m = stab.dense();
  CHECK(lyapunov_residual_norm(a, e, m, f) <= 1e-8 * f.norm());
  CHECK((m - kronecker_lyapunov(a, e, f)).norm() <= 1e-8 * m.norm());
}

TEST_CASE("stabilized reduction of the crafted counterexample") {
  const LinearSystem sys = siso(Matrix::Identity(2, 2), m2(-1, 4, 0, -1));
  const ProjectionBasis basis = ProjectionBasis::external(Matrix::Ones(2, 1) / std::sqrt(2.0));
  CHECK(galerkin_reduce(sys, basis).a(0, 0) > 0);

  const StabilizerFactor stab = exact_stabilizer(sys);
  const ReducedSystem rom = stabilized_reduce(sys, basis, stab);
  CHECK(rom.a(0, 0) / rom.e(0, 0) < 0);
  CHECK(rom.provenance.stabilized);
  REQUIRE(rom.provenance.abscissa.has_value());
  CHECK(*rom.provenance.abscissa < 0);

  const Matrix m = kronecker_lyapunov(Matrix(sys.a()), Matrix::Identity(2, 2), dense_shifted_f(sys, stab.shift()));
  const Vector v = basis.v.col(0);
  const double ratio = v.dot(m * Matrix(sys.a()) * v) / v.dot(m * v);
  CHECK(rom.a(0, 0) / rom.e(0, 0) == doctest::Approx(ratio).epsilon(1e-10));
  const ReducedSystem via_dense = stabilized_reduce(sys, basis, m);
  CHECK(via_dense.a(0, 0) / via_dense.e(0, 0) == doctest::Approx(ratio).epsilon(1e-10));
}

TEST_CASE("no-op stabilization for dissipative systems") {
  std::mt19937_64 rng(61);
  const Index n = 12;
  const Matrix g = random_matrix(n, n, rng);
  const LinearSystem sys = siso(Matrix::Identity(n, n), Matrix(g - g.transpose() - Matrix::Identity(n, n)));
  const StabilizerFactor stab = assemble_stabilizer(sys, {});
  REQUIRE(stab.q() == 0);
  const ProjectionBasis basis = ProjectionBasis::external(random_orthonormal(n, 4, rng));
  const ReducedSystem a = galerkin_reduce(sys, basis), b = stabilized_reduce(sys, basis, stab);
  CHECK((a.e - b.e).norm() < 1e-14);
  CHECK((a.a - b.a).norm() < 1e-14);
  CHECK((a.b - b.b).norm() < 1e-14);
  CHECK((a.c - b.c).norm() < 1e-14);
}

TEST_CASE("stabilized reductions are stable for random bases") {
  std::mt19937_64 rng(67);
  const Index n = 200;
  const LinearSystem sys = siso(Matrix::Identity(n, n), random_nonnormal(n, rng, 4.0));
  const StabilizerFactor stab = exact_stabilizer(sys);
  REQUIRE(stab.k() >= 1);
  for (int i = 0; i < 50; ++i) {
    const Index r = 1 + i % 20;
    const ProjectionBasis basis = ProjectionBasis::external(random_orthonormal(n, r, rng));
    const ReducedSystem rom = stabilized_reduce(sys, basis, stab);
    CHECK(rom.spectral_abscissa() < 0);
    const Matrix es = 0.5 * (rom.e + rom.e.transpose());
    CHECK((rom.e - es).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(es).eigenvalues().minCoeff() > 0);
    CHECK(condition_bound_check(stab, rom).holds);
  }
}

TEST_CASE("condition bound") {
  const Index n = 3;
  const LinearSystem sys = siso(Matrix::Identity(n, n), -Matrix::Identity(n, n));
  const ProjectionBasis e1 = ProjectionBasis::external(Matrix::Identity(n, 1));
  const StabilizerFactor empty = assemble_stabilizer(sys, {});
  const ConditionBound b0 = condition_bound_check(empty, stabilized_reduce(sys, e1, empty));
  CHECK(b0.cond == doctest::Approx(1.0));
  CHECK(b0.bound == doctest::Approx(1.0));
  CHECK(b0.holds);

  StabShift shift;
  const StabilizerFactor z1(sys, Matrix::Identity(n, 1), shift, LyapunovMode::DenseExact, {}, 0);
  const ReducedSystem rom = stabilized_reduce(sys, e1, z1);
  CHECK(rom.e(0, 0) == doctest::Approx(2.0));
  const ConditionBound b1 = condition_bound_check(z1, rom);
  CHECK(b1.cond == doctest::Approx(1.0));
  CHECK(b1.bound == doctest::Approx(2.0));

  std::mt19937_64 rng(71);
  const Index m = 120;
  const Matrix e = random_spd(m, rng);
  const LinearSystem gen = siso(e, random_nonnormal(m, rng));
  const StabilizerFactor stab = exact_stabilizer(gen);
  CHECK(mass_spectral_norm(to_sparse(e)) ==
        doctest::Approx(Eigen::SelfAdjointEigenSolver<Matrix>(e).eigenvalues().maxCoeff()).epsilon(1e-12));
  for (Index r = 1; r <= 20; ++r) {
    const ReducedSystem red = stabilized_reduce(gen, ProjectionBasis::external(random_orthonormal(m, r, rng)), stab);
    CHECK(condition_bound_check(stab, red).holds);
  }
}

TEST_CASE("mass norm on a large non-diagonal E uses Lanczos") {
  const Index n = 400;
  SparseMatrix e(n, n);
  for (Index i = 0; i < n; ++i) {
    e.insert(i, i) = 4.0;
    if (i + 1 < n) e.insert(i, i + 1) = 1.0;
    if (i > 0) e.insert(i, i - 1) = 1.0;
  }
  const double expected = Eigen::SelfAdjointEigenSolver<Matrix>(Matrix(e)).eigenvalues().maxCoeff();
  CHECK(mass_spectral_norm(e) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("transformed system keeps its transfer function") {
  std::mt19937_64 rng(73);
  const Index n = 15;
  const Matrix e = random_spd(n, rng), a = random_nonnormal(n, rng);
  const LinearSystem sys = siso(e, a);
  const Matrix m = exact_stabilizer(sys).dense();
  const Matrix l = e.transpose() * m;
  const TransferFunction h(sys);
  const TransferFunction ht(LinearSystem::from_dense(l * e, l * a, l * sys.b(), sys.c()));
  for (int i = 0; i < 20; ++i) {
    const std::complex<double> s(0.0, std::pow(10.0, -2 + 0.2 * i));
    CHECK(std::abs(h(s)(0, 0) - ht(s)(0, 0)) <= 1e-8 * std::abs(h(s)(0, 0)));
  }
}

TEST_CASE("conventional and stabilized ROMs differ") {
  std::mt19937_64 rng(79);
  const Index n = 40;
  const LinearSystem sys = siso(Matrix::Identity(n, n), random_nonnormal(n, rng));
  const ProjectionBasis basis = ProjectionBasis::external(random_orthonormal(n, 5, rng));
  const TransferFunction conv(galerkin_reduce(sys, basis).to_linear_system());
  const TransferFunction stab(stabilized_reduce(sys, basis, exact_stabilizer(sys)).to_linear_system());
  CHECK(std::abs(conv(0.5)(0, 0) - stab(0.5)(0, 0)) > 1e-6);
}

TEST_CASE("matrix square root") {
  const MatrixSqrt id(Matrix(3, 0));
  const Vector v = Vector::LinSpaced(3, 1, 3);
  CHECK((id.apply_sqrt(v) - v).norm() == 0.0);

  const MatrixSqrt e1(Matrix::Identity(3, 1));
  const Matrix root = e1.apply_sqrt(Matrix(Matrix::Identity(3, 3)));
  Matrix expected = Matrix::Identity(3, 3);
  expected(0, 0) = std::sqrt(2.0);
  CHECK((root - expected).norm() < 1e-14);

  std::mt19937_64 rng(83);
  const Index n = 300, q = 8;
  const Matrix z = random_matrix(n, q, rng);
  const MatrixSqrt sq(z);
  for (int i = 0; i < 10; ++i) {
    const Vector x = random_matrix(n, 1, rng);
    const Vector mx = x + z * (z.transpose() * x);
    CHECK((sq.apply_sqrt(sq.apply_sqrt(x)) - mx).norm() <= 1e-10 * mx.norm());
    CHECK((sq.apply_inv_sqrt(sq.apply_sqrt(x)) - x).norm() <= 1e-10 * x.norm());
  }

  const LinearSystem descriptor = siso(2 * Matrix::Identity(2, 2), m2(-1, 3, 0, -1));
  CHECK_THROWS_AS(matrix_sqrt_factor(exact_stabilizer(descriptor)), Error);
  const StabilizerFactor ok = exact_stabilizer(siso(Matrix::Identity(2, 2), m2(-1, 3, 0, -1)));
  const MatrixSqrt fac = matrix_sqrt_factor(ok);
  const Vector y = Vector::Ones(2);
  CHECK((fac.apply_sqrt(fac.apply_sqrt(y)) - ok.apply(y)).norm() < 1e-12);
}
