#include "stabmor/stabilize.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/lanczos.hpp"
#include "stabmor/linalg/sym_eig.hpp"

namespace stabmor {
namespace {

LyapunovMode resolve_mode(LyapunovMode requested, Index k, Index n, const Tolerances& tol) {
  const double ratio = n > 0 ? double(k) / double(n) : 0.0;
  switch (requested) {
    case LyapunovMode::DenseExact:
      return LyapunovMode::DenseExact;
    case LyapunovMode::LowRankAdi:
      if (ratio > tol.lradi_max_rank_ratio)
        throw Error(ErrorKind::LowRankAssumption,
                    "k / n = " + std::to_string(ratio) + " exceeds " +
                        std::to_string(tol.lradi_max_rank_ratio) + "; use the dense solver");
      return LyapunovMode::LowRankAdi;
    case LyapunovMode::Auto:
      if (ratio <= tol.lradi_max_rank_ratio) return LyapunovMode::LowRankAdi;
      if (n <= tol.dense_cap) return LyapunovMode::DenseExact;
      throw Error(ErrorKind::LowRankAssumption,
                  "k / n too large for low-rank ADI and n exceeds the dense cap");
  }
  return requested;
}

bool is_diagonal(const SparseMatrix& e) {
  for (Index j = 0; j < e.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(e, j); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return false;
  return true;
}

double largest_sym_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

}  // namespace

const char* to_string(LyapunovMode mode) {
  switch (mode) {
    case LyapunovMode::Auto: return "auto";
    case LyapunovMode::LowRankAdi: return "lradi";
    case LyapunovMode::DenseExact: return "dense";
  }
  return "auto";
}

StabShift build_stab_factor_f(const LinearSystem& sys, double delta, const Tolerances& tol) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  const SymmetricPartSpectrum spec = symmetric_part_nonnegative(sys, 0, tol);
  if (spec.k == 0)
    throw Error(ErrorKind::AlreadyDissipative,
                "symmetric part is negative definite; use W = V or M = E^{-T} E^{-1}");
  StabShift shift;
  shift.k = spec.k;
  shift.u = spec.u.leftCols(spec.k);
  shift.mu = spec.mu.head(spec.k);
  shift.mu_max = spec.mu_max;
  shift.delta = delta;
  shift.delta_effective = delta + spec.residuals.head(spec.k).maxCoeff();
  shift.u_tilde = std::sqrt(shift.mu_max + shift.delta_effective) * shift.u;
  return shift;
}

Matrix dense_shifted_f(const LinearSystem& sys, const StabShift& shift, const Tolerances& tol) {
  const Matrix state = sys.dense_state_matrix(tol);
  Matrix f = -(state + state.transpose());
  if (shift.k > 0) f += shift.u_tilde * shift.u_tilde.transpose();
  return f;
}

LradiResult solve_lyapunov(const LyapunovProblem& problem, const LradiOptions& adi,
                           const Tolerances& tol) {
  if (!problem.a || !problem.e) throw Error(ErrorKind::InvalidArgument, "LyapunovProblem without A or E");
  const Index n = problem.a->rows();
  const LyapunovMode mode = resolve_mode(problem.mode, problem.rhs_factor.cols(), n, tol);
  if (mode == LyapunovMode::LowRankAdi)
    return solve_lyapunov_lradi(*problem.a, *problem.e, problem.rhs_factor, adi);

  LradiResult out;
  const Matrix x = solve_lyapunov_dense(Matrix(*problem.a), Matrix(*problem.e),
                                        problem.rhs_factor * problem.rhs_factor.transpose(), tol);
  const SymEig<double> eig = sym_eig_dense<double>(x, tol);
  const Index positive = (eig.values.array() > 0.0).count();
  out.z = eig.vectors.leftCols(positive) * eig.values.head(positive).cwiseSqrt().asDiagonal();
  return out;
}

StabilizerFactor::StabilizerFactor(LinearSystem sys, Matrix z, StabShift shift, LyapunovMode mode,
                                   std::vector<double> residual_history, int adi_steps)
    : sys_(std::move(sys)),
      z_(std::move(z)),
      shift_(std::move(shift)),
      mode_(mode),
      residual_history_(std::move(residual_history)),
      adi_steps_(adi_steps) {
  if (z_.rows() != sys_.n()) throw Error(ErrorKind::InvalidArgument, "StabilizerFactor: Z has wrong row count");
}

Matrix StabilizerFactor::apply(const Matrix& x) const {
  Matrix y = sys_.solve_e_transposed(sys_.solve_e(x));
  if (z_.cols() > 0) y.noalias() += z_ * (z_.transpose() * x);
  return y;
}

Vector StabilizerFactor::apply(const Vector& x) const { return apply(Matrix(x)).col(0); }

Matrix StabilizerFactor::dense(const Tolerances& tol) const {
  if (sys_.n() > tol.dense_cap) throw Error(ErrorKind::DenseCapExceeded, "M~ is never densified above the cap");
  return apply(Matrix(Matrix::Identity(sys_.n(), sys_.n())));
}

StabilizerFactor assemble_stabilizer(const LinearSystem& sys, const StabilizerOptions& options,
                                     const Tolerances& tol) {
  StabShift shift;
  try {
    shift = build_stab_factor_f(sys, options.delta, tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AlreadyDissipative) throw;
    shift.delta = shift.delta_effective = options.delta;
    shift.u.resize(sys.n(), 0);
    shift.u_tilde.resize(sys.n(), 0);
    return StabilizerFactor(sys, Matrix(sys.n(), 0), std::move(shift), options.mode, {}, 0);
  }
  const LyapunovMode mode = resolve_mode(options.mode, shift.k, sys.n(), tol);
  LyapunovProblem problem{&sys.a(), &sys.e(), shift.u_tilde, mode};
  LradiResult solved = solve_lyapunov(problem, options.adi, tol);
  return StabilizerFactor(sys, std::move(solved.z), std::move(shift), mode,
                          std::move(solved.residual_history), solved.steps);
}

ReducedSystem stabilized_reduce(const LinearSystem& sys, const ProjectionBasis& basis,
                                const StabilizerFactor& stab, const Tolerances& tol) {
  const Matrix& v = basis.v;
  if (v.rows() != sys.n()) throw Error(ErrorKind::InvalidArgument, "stabilized_reduce: V has wrong row count");
  const Matrix ev = sys.e() * v;
  const Matrix& z = stab.z();
  const Matrix zev = z.transpose() * ev;
  Matrix w = sys.solve_e_transposed(v);
  if (z.cols() > 0) w.noalias() += z * zev;

  ReducedSystem rom;
  rom.e = v.transpose() * v + zev.transpose() * zev;
  rom.e = 0.5 * (rom.e + rom.e.transpose()).eval();
  rom.a = w.transpose() * (sys.a() * v);
  rom.b = w.transpose() * sys.b();
  rom.c = sys.c() * v;
  rom.provenance.method = to_string(basis.method);
  rom.provenance.r = v.cols();
  rom.provenance.stabilized = true;
  rom.provenance.w_source = std::string("M~EV (") + to_string(stab.mode()) + ")";
  if (rom.r() > 0 && rom.r() <= tol.dense_cap) rom.provenance.abscissa = rom.spectral_abscissa(tol);
  return rom;
}

ReducedSystem stabilized_reduce(const LinearSystem& sys, const ProjectionBasis& basis, const Matrix& m,
                                const Tolerances& tol) {
  const Matrix& v = basis.v;
  if (v.rows() != sys.n() || m.rows() != sys.n() || m.cols() != sys.n())
    throw Error(ErrorKind::InvalidArgument, "stabilized_reduce: shape mismatch");
  const Matrix ev = sys.e() * v;
  const Matrix w = m * ev;
  ReducedSystem rom;
  rom.e = w.transpose() * ev;
  rom.e = 0.5 * (rom.e + rom.e.transpose()).eval();
  rom.a = w.transpose() * (sys.a() * v);
  rom.b = w.transpose() * sys.b();
  rom.c = sys.c() * v;
  rom.provenance.method = to_string(basis.method);
  rom.provenance.r = v.cols();
  rom.provenance.stabilized = true;
  rom.provenance.w_source = "MEV (dense)";
  if (rom.r() > 0 && rom.r() <= tol.dense_cap) rom.provenance.abscissa = rom.spectral_abscissa(tol);
  return rom;
}

double mass_spectral_norm(const SparseMatrix& e) {
  if (e.rows() == 0) return 0.0;
  if (is_diagonal(e)) {
    double best = 0.0;
    for (Index j = 0; j < e.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(e, j); it; ++it) best = std::max(best, std::abs(it.value()));
    return best;
  }
  if (e.rows() <= 200) {
    const Eigen::JacobiSVD<Matrix> svd{Matrix(e)};
    return svd.singularValues()(0);
  }
  LanczosOptions opts;
  opts.tol = 1e-12;
  const DominantEigs top = dominant_sym_eigs(
      [&e](const Vector& x) -> Vector { return e.transpose() * (e * x); }, e.rows(), 1, opts);
  return std::sqrt(std::max(0.0, top.values(0)));
}

ConditionBound condition_bound_check(const StabilizerFactor& stab, const ReducedSystem& rom) {
  ConditionBound out;
  if (rom.r() > 0) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (rom.e + rom.e.transpose()), Eigen::EigenvaluesOnly);
    out.cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  }
  const double e_norm = mass_spectral_norm(stab.system().e());
  const Matrix& z = stab.z();
  const double z_norm_sq = z.cols() > 0 ? largest_sym_eigenvalue(z.transpose() * z) : 0.0;
  out.bound = 1.0 + e_norm * e_norm * z_norm_sq;
  out.holds = out.cond <= out.bound * (1.0 + 1e-10);
  return out;
}

MatrixSqrt::MatrixSqrt(const Matrix& z) : n_(z.rows()) {
  if (z.cols() > z.rows()) throw Error(ErrorKind::InvalidArgument, "MatrixSqrt: Z needs q <= n");
  qr_ = HouseholderQR<double>(z);
  const Matrix r = qr_.r();
  const Matrix rrt = r * r.transpose();
  const SymEig<double> eig = sym_eig_dense<double>(0.5 * (rrt + rrt.transpose()));
  s_ = eig.vectors;
  d_ = eig.values.cwiseMax(0.0);
}

Matrix MatrixSqrt::apply(const Matrix& x, double power) const {
  if (x.rows() != n_) throw Error(ErrorKind::InvalidArgument, "MatrixSqrt: size mismatch");
  Matrix y = qr_.apply_qt(x);
  const Index q = s_.cols();
  if (q > 0) {
    Matrix head = s_.transpose() * y.topRows(q);
    head = (Vector::Ones(q) + d_).array().pow(power).matrix().asDiagonal() * head;
    y.topRows(q) = s_ * head;
  }
  return qr_.apply_q(y);
}

MatrixSqrt matrix_sqrt_factor(const StabilizerFactor& stab) {
  if (!stab.system().identity_mass())
    throw Error(ErrorKind::NotIdentityMass, "the matrix square root factorization needs E = I");
  return MatrixSqrt(stab.z());
}

}  // namespace stabmor
