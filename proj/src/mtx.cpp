#include "stabmor/linalg/mtx.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "stabmor/errors.hpp"

namespace stabmor {
namespace {

struct Header {
  bool coordinate = true;
  bool symmetric = false;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Header parse_header(const std::string& line, const std::filesystem::path& path) {
  std::istringstream in(line);
  std::string banner, object, format, field, symmetry;
  in >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw Error(ErrorKind::Io, path.string() + ": missing MatrixMarket banner");
  Header h;
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format == "coordinate") {
    h.coordinate = true;
  } else if (format == "array") {
    h.coordinate = false;
  } else {
    throw Error(ErrorKind::Io, path.string() + ": unknown format " + format);
  }
  if (field != "real" && field != "integer" && field != "double")
    throw Error(ErrorKind::Io, path.string() + ": unsupported field " + field);
  if (symmetry == "symmetric") {
    h.symmetric = true;
  } else if (symmetry != "general") {
    throw Error(ErrorKind::Io, path.string() + ": unsupported symmetry " + symmetry);
  }
  return h;
}

// Reads the file into triplets (expanded when symmetric).
void read_triplets(const std::filesystem::path& path, Index& rows, Index& cols,
                   std::vector<Eigen::Triplet<double>>& triplets) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, path.string() + ": empty file");
  const Header h = parse_header(line, path);
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') break;
  std::istringstream size_line(line);
  long long r = 0, c = 0, nnz = 0;
  if (h.coordinate) {
    if (!(size_line >> r >> c >> nnz)) throw Error(ErrorKind::Io, path.string() + ": bad size line");
  } else {
    if (!(size_line >> r >> c)) throw Error(ErrorKind::Io, path.string() + ": bad size line");
  }
  if (r < 0 || c < 0 || (h.symmetric && r != c))
    throw Error(ErrorKind::Io, path.string() + ": bad dimensions");
  rows = r;
  cols = c;
  triplets.clear();
  auto add = [&](long long i, long long j, double v) {
    if (i < 0 || j < 0 || i >= r || j >= c)
      throw Error(ErrorKind::Io, path.string() + ": index out of range");
    triplets.emplace_back(Index(i), Index(j), v);
    if (h.symmetric && i != j) triplets.emplace_back(Index(j), Index(i), v);
  };
  if (h.coordinate) {
    triplets.reserve(std::size_t(h.symmetric ? 2 * nnz : nnz));
    for (long long k = 0; k < nnz; ++k) {
      long long i, j;
      double v;
      if (!(in >> i >> j >> v)) throw Error(ErrorKind::Io, path.string() + ": truncated entries");
      add(i - 1, j - 1, v);
    }
  } else {
    for (long long j = 0; j < c; ++j) {
      for (long long i = h.symmetric ? j : 0; i < r; ++i) {
        double v;
        if (!(in >> v)) throw Error(ErrorKind::Io, path.string() + ": truncated entries");
        if (v != 0.0) add(i, j, v);
      }
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

SparseMatrix read_mtx_sparse(const std::filesystem::path& path) {
  Index rows = 0, cols = 0;
  std::vector<Eigen::Triplet<double>> triplets;
  read_triplets(path, rows, cols, triplets);
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

Matrix read_mtx_dense(const std::filesystem::path& path) {
  Index rows = 0, cols = 0;
  std::vector<Eigen::Triplet<double>> triplets;
  read_triplets(path, rows, cols, triplets);
  Matrix m = Matrix::Zero(rows, cols);
  for (const auto& t : triplets) m(t.row(), t.col()) += t.value();
  return m;
}

void write_mtx(const std::filesystem::path& path, const SparseMatrix& m, bool symmetric) {
  std::ofstream out = open_out(path);
  Index nnz = 0;
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      if (!symmetric || it.row() >= it.col()) ++nnz;
  out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n'
      << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      if (!symmetric || it.row() >= it.col())
        out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value()) << '\n';
}

void write_mtx(const std::filesystem::path& path, const Matrix& m, bool symmetric) {
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix array real " << (symmetric ? "symmetric" : "general") << '\n'
      << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = symmetric ? j : 0; i < m.rows(); ++i) out << format_double(m(i, j)) << '\n';
}

}  // namespace stabmor
