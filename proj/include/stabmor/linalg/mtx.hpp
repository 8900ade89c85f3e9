#ifndef STABMOR_LINALG_MTX_HPP
#define STABMOR_LINALG_MTX_HPP

#include <filesystem>
#include <string>

#include "stabmor/linalg/types.hpp"

namespace stabmor {

// Matrix Market I/O. Readers accept coordinate and array formats with real
// or integer fields in general or symmetric storage; symmetric input is
// expanded. Values are written in shortest round-trip form.
SparseMatrix read_mtx_sparse(const std::filesystem::path& path);
Matrix read_mtx_dense(const std::filesystem::path& path);

void write_mtx(const std::filesystem::path& path, const SparseMatrix& m, bool symmetric = false);
void write_mtx(const std::filesystem::path& path, const Matrix& m, bool symmetric = false);

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace stabmor

#endif  // STABMOR_LINALG_MTX_HPP
