#include "stabmor/projection.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/lu.hpp"
#include "stabmor/linalg/schur.hpp"
#include "stabmor/linalg/svd.hpp"

namespace stabmor {

const char* to_string(BasisMethod method) {
  switch (method) {
    case BasisMethod::Arnoldi: return "arnoldi";
    case BasisMethod::Pod: return "pod";
    case BasisMethod::External: return "external";
  }
  return "external";
}

ProjectionBasis ProjectionBasis::external(Matrix v) {
  ProjectionBasis basis;
  basis.requested = v.cols();
  basis.v = std::move(v);
  return basis;
}

double ReducedSystem::spectral_abscissa(const Tolerances& tol) const {
  return stabmor::spectral_abscissa(e, a, tol);
}

ReducedSystem galerkin_reduce(const LinearSystem& sys, const ProjectionBasis& basis,
                              const std::optional<Matrix>& w) {
  const Matrix& v = basis.v;
  if (v.rows() != sys.n()) throw Error(ErrorKind::InvalidArgument, "galerkin_reduce: V has wrong row count");
  const Matrix& wm = w ? *w : v;
  if (wm.rows() != v.rows() || wm.cols() != v.cols())
    throw Error(ErrorKind::InvalidArgument, "galerkin_reduce: W and V shapes differ");
  ReducedSystem rom;
  const Matrix ev = sys.e() * v;
  const Matrix av = sys.a() * v;
  rom.e = wm.transpose() * ev;
  rom.a = wm.transpose() * av;
  rom.b = wm.transpose() * sys.b();
  rom.c = sys.c() * v;
  rom.provenance.method = to_string(basis.method);
  rom.provenance.r = v.cols();
  rom.provenance.stabilized = false;
  rom.provenance.w_source = w ? "external W" : "V";
  if (rom.e.rows() > 0) {
    try {
      LUFactorization check(rom.e);
    } catch (const Error&) {
      throw Error(ErrorKind::SingularReducedMass,
                  "reduced mass matrix is singular; the stabilized reduction keeps it SPD");
    }
  }
  return rom;
}

ProjectionBasis arnoldi_basis(const LinearSystem& sys, Index r, double s0, const Tolerances& tol) {
  const Index n = sys.n();
  if (r < 1 || r > n) throw Error(ErrorKind::InvalidArgument, "arnoldi_basis: need 1 <= r <= n");
  const SparseMatrix shifted = s0 * sys.e() - sys.a();
  std::optional<LUFactorization> lu;
  try {
    lu.emplace(shifted);
  } catch (const Error& e) {
    throw Error(ErrorKind::SingularMatrix, std::string("s0 E - A is singular: ") + e.what());
  }

  ProjectionBasis basis;
  basis.method = BasisMethod::Arnoldi;
  basis.expansion_point = s0;
  basis.requested = r;
  basis.v.resize(n, r);

  // Candidates are processed first-in first-out; each accepted vector v
  // queues (s0 E - A)^{-1} E v. For one input this is plain Arnoldi.
  std::deque<Vector> candidates;
  const Matrix start = lu->solve(sys.b());
  for (Index j = 0; j < start.cols(); ++j) candidates.emplace_back(start.col(j));

  Index accepted = 0;
  while (accepted < r && !candidates.empty()) {
    Vector w = std::move(candidates.front());
    candidates.pop_front();
    const double original = w.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i < accepted; ++i) w -= basis.v.col(i).dot(w) * basis.v.col(i);
    const double remaining = w.norm();
    if (remaining <= tol.deflation_rel * original) continue;
    basis.v.col(accepted) = w / remaining;
    candidates.emplace_back(lu->solve(Vector(sys.e() * basis.v.col(accepted))));
    ++accepted;
  }
  if (accepted < r) {
    basis.v.conservativeResize(Eigen::NoChange, accepted);
    basis.breakdown = true;
  }
  return basis;
}

ProjectionBasis pod_basis(const Matrix& snapshots, Index r, const Tolerances& tol) {
  const Index limit = std::min(snapshots.rows(), snapshots.cols());
  if (r < 1 || r > limit)
    throw Error(ErrorKind::RankDeficient, "pod_basis: r exceeds the snapshot rank bound");
  ThinSvd svd = thin_svd(snapshots, r, tol);
  if (!(svd.sigma(r - 1) > tol.rank_rel * svd.sigma(0)))
    throw Error(ErrorKind::RankDeficient,
                "pod_basis: sigma_r <= " + std::to_string(tol.rank_rel) + " sigma_1");
  ProjectionBasis basis;
  basis.method = BasisMethod::Pod;
  basis.requested = r;
  basis.v = std::move(svd.u);
  basis.singular_values = std::move(svd.sigma);
  return basis;
}

Vector residual(const LinearSystem& sys, const Matrix& v, const Vector& xr, const Vector& xr_dot,
                const Vector& u) {
  if (v.rows() != sys.n() || v.cols() != xr.size() || xr_dot.size() != xr.size() ||
      u.size() != sys.n_in())
    throw Error(ErrorKind::InvalidArgument, "residual: inconsistent shapes");
  return sys.e() * (v * xr_dot) - sys.a() * (v * xr) - sys.b() * u;
}

}  // namespace stabmor
