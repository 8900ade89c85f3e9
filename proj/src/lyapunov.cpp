#include "stabmor/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include <Eigen/Eigenvalues>

#include "stabmor/linalg/lu.hpp"

namespace stabmor {
namespace {

using Complex = std::complex<double>;

std::vector<Complex> arnoldi_ritz_values(const std::function<Vector(const Vector&)>& op, Index n,
                                         int steps) {
  steps = int(std::min<Index>(steps, n));
  if (steps <= 0) return {};
  Matrix q(n, steps + 1);
  Matrix h = Matrix::Zero(steps + 1, steps);
  q.col(0) = Vector::Ones(n) / std::sqrt(double(n));
  int m = 0;
  for (int j = 0; j < steps; ++j) {
    Vector w = op(q.col(j));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const double hij = q.col(i).dot(w);
        h(i, j) += hij;
        w -= hij * q.col(i);
      }
    m = j + 1;
    const double beta = w.norm();
    h(j + 1, j) = beta;
    if (beta <= 1e-12 * h.col(j).norm()) break;
    q.col(j + 1) = w / beta;
  }
  Eigen::EigenSolver<Matrix> eig(h.topLeftCorner(m, m), false);
  std::vector<Complex> out;
  for (Index i = 0; i < eig.eigenvalues().size(); ++i) out.push_back(eig.eigenvalues()(i));
  return out;
}

// |prod_{p in shifts} (p - x) / (p + x)|
double adi_rational(const std::vector<Complex>& shifts, Complex x) {
  double value = 1.0;
  for (const Complex& p : shifts) value *= std::abs((p - x) / (p + x));
  return value;
}

void add_with_conjugate(std::vector<Complex>& shifts, Complex p) {
  if (std::abs(p.imag()) <= 1e-12 * std::abs(p)) {
    shifts.emplace_back(p.real(), 0.0);
  } else {
    shifts.emplace_back(p.real(), std::abs(p.imag()));
    shifts.emplace_back(p.real(), -std::abs(p.imag()));
  }
}

}  // namespace

Matrix solve_lyapunov_dense(const Matrix& a, const Matrix& e, const Matrix& f, const Tolerances& tol) {
  const Index n = a.rows();
  if (a.cols() != n || e.rows() != n || e.cols() != n || f.rows() != n || f.cols() != n)
    throw Error(ErrorKind::InvalidArgument, "solve_lyapunov_dense: shape mismatch");
  if (n > tol.dense_cap)
    throw Error(ErrorKind::DenseCapExceeded, "solve_lyapunov_dense: n exceeds dense cap");
  if (n == 0) return Matrix(0, 0);
  const LUFactorization e_lu(e);
  const Matrix state = e_lu.solve(a);
  const RealSchurForm<double> schur = real_schur(state, tol);
  for (const Complex& l : schur_eigenvalues(schur.t))
    if (!(l.real() < 0.0))
      throw Error(ErrorKind::UnstablePencil,
                  "Schur form has an eigenvalue with Re >= 0 (" + std::to_string(l.real()) + ")");
  // state^T X + X state + F = 0 with X = E^T M E
  const Matrix c = -(schur.q.transpose() * f * schur.q);
  const Matrix y = solve_schur_lyapunov<double>(schur.t, 0.5 * (c + c.transpose()));
  const Matrix x = schur.q * y * schur.q.transpose();
  // M = E^{-T} X E^{-1}
  const Matrix left = e_lu.solve_transposed(x);
  Matrix m = e_lu.solve_transposed(Matrix(left.transpose())).transpose();
  return 0.5 * (m + m.transpose());
}

double lyapunov_residual_norm(const Matrix& a, const Matrix& e, const Matrix& m, const Matrix& f) {
  return (a.transpose() * m * e + e.transpose() * m * a + f).norm();
}

std::vector<Complex> adi_shifts(const SparseMatrix& a, const SparseMatrix& e,
                                const LradiOptions& options) {
  const Index n = a.rows();
  const LUFactorization e_lu(e);
  const LUFactorization a_lu(a);
  std::vector<Complex> ritz = arnoldi_ritz_values(
      [&](const Vector& v) -> Vector { return e_lu.solve(Vector(a * v)); }, n, options.arnoldi_steps);
  for (const Complex& mu : arnoldi_ritz_values(
           [&](const Vector& v) -> Vector { return a_lu.solve(Vector(e * v)); }, n,
           options.inverse_arnoldi_steps))
    if (std::abs(mu) > 0.0) ritz.push_back(1.0 / mu);

  std::vector<Complex> candidates;
  for (const Complex& l : ritz)
    if (l.real() < 0.0 && std::isfinite(l.real()) && std::isfinite(l.imag())) candidates.push_back(l);
  if (candidates.empty())
    throw Error(ErrorKind::ShiftFailure, "no stable Ritz values available for ADI shifts");

  // min-max start, then greedily add the worst-damped candidate
  std::vector<Complex> shifts;
  double best = std::numeric_limits<double>::infinity();
  Complex first = candidates.front();
  for (const Complex& p : candidates) {
    std::vector<Complex> trial;
    add_with_conjugate(trial, p);
    double worst = 0.0;
    for (const Complex& x : candidates) worst = std::max(worst, adi_rational(trial, x));
    if (worst < best) {
      best = worst;
      first = p;
    }
  }
  add_with_conjugate(shifts, first);
  while (int(shifts.size()) < options.shift_count) {
    double worst = -1.0;
    Complex pick = candidates.front();
    for (const Complex& x : candidates) {
      const double v = adi_rational(shifts, x);
      if (v > worst) {
        worst = v;
        pick = x;
      }
    }
    if (worst <= 0.0) break;  // every candidate is already a shift
    add_with_conjugate(shifts, pick);
  }
  return shifts;
}

LradiResult solve_lyapunov_lradi(const SparseMatrix& a, const SparseMatrix& e, const Matrix& g,
                                 const LradiOptions& options) {
  const Index n = a.rows();
  const Index k = g.cols();
  if (g.rows() != n) throw Error(ErrorKind::InvalidArgument, "solve_lyapunov_lradi: G has wrong row count");
  LradiResult result;
  result.z.resize(n, 0);
  if (k == 0 || options.max_steps <= 0) return result;

  const std::vector<Complex> shifts = options.shifts.empty() ? adi_shifts(a, e, options) : options.shifts;
  for (const Complex& p : shifts)
    if (!(p.real() < 0.0)) throw Error(ErrorKind::ShiftFailure, "ADI shifts need Re(p) < 0");

  const SparseMatrix et = e.transpose();
  // (A + pE)^T V = W is solved through a transposed LU of A + pE; one
  // factorization per distinct shift, reused across cycles.
  std::map<std::size_t, std::shared_ptr<LUFactorization>> real_lus;
  std::map<std::size_t, std::shared_ptr<ComplexLU>> complex_lus;
  std::vector<Complex> effective = shifts;

  auto real_solver = [&](std::size_t idx) -> const LUFactorization& {
    auto it = real_lus.find(idx);
    if (it != real_lus.end()) return *it->second;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        auto lu = std::make_shared<LUFactorization>(SparseMatrix(a + effective[idx].real() * e));
        return *(real_lus[idx] = lu);
      } catch (const Error&) {
        effective[idx] *= 1.0 + 1e-8;
      }
    }
    throw Error(ErrorKind::ShiftFailure, "A + pE singular for shift " + std::to_string(shifts[idx].real()));
  };
  auto complex_solver = [&](std::size_t idx) -> const ComplexLU& {
    auto it = complex_lus.find(idx);
    if (it != complex_lus.end()) return *it->second;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        ComplexSparseMatrix pencil =
            a.cast<Complex>() + effective[idx] * e.cast<Complex>();
        auto lu = std::make_shared<ComplexLU>(pencil);
        return *(complex_lus[idx] = lu);
      } catch (const Error&) {
        effective[idx] *= 1.0 + 1e-8;
      }
    }
    throw Error(ErrorKind::ShiftFailure, "A + pE singular for a complex shift");
  };

  auto residual_norm = [](const Matrix& w) {
    const Matrix gram = w.transpose() * w;
    return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (gram + gram.transpose()), Eigen::EigenvaluesOnly)
        .eigenvalues()
        .cwiseAbs()
        .maxCoeff();
  };
  const double rhs_norm = residual_norm(g);

  Matrix w = g;
  std::vector<Matrix> blocks;
  std::size_t idx = 0;
  while (result.steps < options.max_steps) {
    const Complex p = effective[idx % shifts.size()];
    const std::size_t slot = idx % shifts.size();
    if (std::abs(p.imag()) == 0.0) {
      const Matrix v = real_solver(slot).solve_transposed(w);
      w -= 2.0 * effective[slot].real() * (et * v);
      blocks.push_back(std::sqrt(-2.0 * effective[slot].real()) * v);
      result.shifts_used.push_back(effective[slot]);
      result.steps += 1;
      idx += 1;
    } else {
      if (result.steps + 2 > options.max_steps) break;  // a pair needs two steps
      const Complex pc = effective[slot];
      const ComplexMatrix vc = complex_solver(slot).solve_transposed(w.cast<Complex>());
      const double gamma = 2.0 * std::sqrt(-pc.real());
      const double delta = pc.real() / pc.imag();
      const Matrix re = vc.real(), im = vc.imag();
      const Matrix combo = re + delta * im;
      // residual factor after the first shift of the pair is complex
      const ComplexMatrix half = w.cast<Complex>() - 2.0 * pc.real() * (et.cast<Complex>() * vc);
      const ComplexMatrix half_gram = half.adjoint() * half;
      const double half_norm =
          Eigen::SelfAdjointEigenSolver<ComplexMatrix>(0.5 * (half_gram + half_gram.adjoint()),
                                                       Eigen::EigenvaluesOnly)
              .eigenvalues()
              .cwiseAbs()
              .maxCoeff();
      result.residual_history.push_back(rhs_norm > 0.0 ? half_norm / rhs_norm : 0.0);
      w += gamma * gamma * (et * combo);
      blocks.push_back(gamma * combo);
      blocks.push_back(gamma * std::sqrt(delta * delta + 1.0) * im);
      result.shifts_used.push_back(pc);
      result.shifts_used.push_back(std::conj(pc));
      result.steps += 2;
      idx += 2;
    }
    const double rel = rhs_norm > 0.0 ? residual_norm(w) / rhs_norm : 0.0;
    result.residual_history.push_back(rel);
    if (rel <= options.residual_tol) break;
  }
  result.z.resize(n, Index(blocks.size()) * k);
  for (std::size_t b = 0; b < blocks.size(); ++b) result.z.middleCols(Index(b) * k, k) = blocks[b];
  return result;
}

}  // namespace stabmor
