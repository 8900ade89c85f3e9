#include "stabmor/io.hpp"

#include <fstream>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/mtx.hpp"

namespace fs = std::filesystem;

namespace stabmor {
namespace {

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

void write_matrices(const fs::path& dir, const SparseMatrix& e, const SparseMatrix& a, const Matrix& b,
                    const Matrix& c) {
  fs::create_directories(dir);
  write_mtx(dir / "E.mtx", e);
  write_mtx(dir / "A.mtx", a);
  write_mtx(dir / "B.mtx", b);
  write_mtx(dir / "C.mtx", c);
}

Json dims(Index n, Index n_in, Index n_out, bool descriptor) {
  Json j;
  j["n"] = n;
  j["n_in"] = n_in;
  j["n_out"] = n_out;
  j["descriptor"] = descriptor;
  return j;
}

void check_dims(const Json& m, const SparseMatrix& a, const Matrix& b, const Matrix& c, const fs::path& dir) {
  try {
    if (m.at("n").get<Index>() != a.rows() || m.at("n_in").get<Index>() != b.cols() ||
        m.at("n_out").get<Index>() != c.rows())
      throw Error(ErrorKind::Io, dir.string() + ": manifest dimensions disagree with the matrices");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, dir.string() + ": malformed manifest: " + e.what());
  }
}

}  // namespace

Json to_json(const ReducedProvenance& p) {
  Json j;
  j["method"] = p.method;
  j["r"] = p.r;
  j["stabilized"] = p.stabilized;
  j["w_source"] = p.w_source;
  if (p.abscissa) j["spectral_abscissa"] = *p.abscissa;
  return j;
}

void write_system_bundle(const fs::path& dir, const LinearSystem& sys, const Json& extra) {
  write_matrices(dir, sys.e(), sys.a(), sys.b(), sys.c());
  Json manifest = dims(sys.n(), sys.n_in(), sys.n_out(), !sys.identity_mass());
  for (const auto& [key, value] : extra.items()) manifest[key] = value;
  write_json(dir / "manifest.json", manifest);
}

Json read_manifest(const fs::path& dir) { return read_json(dir / "manifest.json"); }

LinearSystem read_system_bundle(const fs::path& dir) {
  const Json manifest = read_manifest(dir);
  SparseMatrix e = read_mtx_sparse(dir / "E.mtx");
  SparseMatrix a = read_mtx_sparse(dir / "A.mtx");
  Matrix b = read_mtx_dense(dir / "B.mtx");
  Matrix c = read_mtx_dense(dir / "C.mtx");
  check_dims(manifest, a, b, c, dir);
  return LinearSystem(std::move(e), std::move(a), std::move(b), std::move(c));
}

void write_reduced_bundle(const fs::path& dir, const ReducedSystem& rom) {
  write_matrices(dir, rom.e.sparseView(0.0, 0.0), rom.a.sparseView(0.0, 0.0), rom.b, rom.c);
  Json manifest = dims(rom.r(), rom.b.cols(), rom.c.rows(), !rom.e.isIdentity(0.0));
  manifest["provenance"] = to_json(rom.provenance);
  write_json(dir / "manifest.json", manifest);
}

ReducedSystem read_reduced_bundle(const fs::path& dir) {
  const Json manifest = read_manifest(dir);
  ReducedSystem rom;
  rom.e = read_mtx_dense(dir / "E.mtx");
  rom.a = read_mtx_dense(dir / "A.mtx");
  rom.b = read_mtx_dense(dir / "B.mtx");
  rom.c = read_mtx_dense(dir / "C.mtx");
  check_dims(manifest, rom.a.sparseView(), rom.b, rom.c, dir);
  if (manifest.contains("provenance")) {
    const Json& p = manifest["provenance"];
    rom.provenance.method = p.value("method", "");
    rom.provenance.r = p.value("r", rom.r());
    rom.provenance.stabilized = p.value("stabilized", false);
    rom.provenance.w_source = p.value("w_source", "");
    if (p.contains("spectral_abscissa")) rom.provenance.abscissa = p["spectral_abscissa"].get<double>();
  }
  return rom;
}

void write_basis(const fs::path& mtx_path, const ProjectionBasis& basis) {
  write_mtx(mtx_path, basis.v);
  Json j;
  j["method"] = to_string(basis.method);
  j["r"] = basis.r();
  j["requested"] = basis.requested;
  j["breakdown"] = basis.breakdown;
  if (basis.method == BasisMethod::Arnoldi) j["expansion_point"] = basis.expansion_point;
  if (basis.method == BasisMethod::Pod)
    j["singular_values"] = std::vector<double>(basis.singular_values.data(),
                                               basis.singular_values.data() + basis.singular_values.size());
  fs::path sidecar = mtx_path;
  write_json(sidecar.replace_extension(".json"), j);
}

ProjectionBasis read_basis(const fs::path& mtx_path) {
  ProjectionBasis basis;
  basis.v = read_mtx_dense(mtx_path);
  fs::path sidecar = mtx_path;
  sidecar.replace_extension(".json");
  if (!fs::exists(sidecar)) return ProjectionBasis::external(basis.v);
  const Json j = read_json(sidecar);
  const std::string method = j.value("method", "external");
  basis.method = method == "arnoldi" ? BasisMethod::Arnoldi : method == "pod" ? BasisMethod::Pod : BasisMethod::External;
  basis.requested = j.value("requested", basis.r());
  basis.breakdown = j.value("breakdown", false);
  basis.expansion_point = j.value("expansion_point", 0.0);
  if (j.contains("singular_values")) {
    const auto sv = j["singular_values"].get<std::vector<double>>();
    basis.singular_values = Eigen::Map<const Vector>(sv.data(), Index(sv.size()));
  }
  return basis;
}

Json stabilizer_manifest(const StabilizerFactor& stab) {
  Json j;
  j["delta"] = stab.delta();
  j["k"] = stab.k();
  j["mu_max"] = stab.mu_max();
  j["q"] = stab.q();
  j["adi_steps"] = stab.adi_steps();
  j["residual_history"] = stab.residual_history();
  j["delta_effective"] = stab.shift().delta_effective;
  j["lyapunov_mode"] = to_string(stab.mode());
  return j;
}

void write_stabilizer(const fs::path& dir, const StabilizerFactor& stab) {
  fs::create_directories(dir);
  write_mtx(dir / "Z.mtx", stab.z());
  write_mtx(dir / "U_tilde.mtx", stab.u_tilde());
  write_json(dir / "stabilizer.json", stabilizer_manifest(stab));
}

}  // namespace stabmor
