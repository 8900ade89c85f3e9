#ifndef STABMOR_IO_HPP
#define STABMOR_IO_HPP

#include <filesystem>

#include "json.hpp"
#include "stabmor/dynsys.hpp"
#include "stabmor/projection.hpp"
#include "stabmor/stabilize.hpp"

namespace stabmor {

using Json = nlohmann::ordered_json;

// Directory with E.mtx, A.mtx, B.mtx, C.mtx and manifest.json
// {n, n_in, n_out, descriptor}; `extra` keys are merged into the manifest.
void write_system_bundle(const std::filesystem::path& dir, const LinearSystem& sys, const Json& extra = Json::object());
LinearSystem read_system_bundle(const std::filesystem::path& dir);
Json read_manifest(const std::filesystem::path& dir);

// Same layout; the manifest also carries the provenance.
void write_reduced_bundle(const std::filesystem::path& dir, const ReducedSystem& rom);
ReducedSystem read_reduced_bundle(const std::filesystem::path& dir);

// V as dense .mtx plus a JSON sidecar with the same stem.
void write_basis(const std::filesystem::path& mtx_path, const ProjectionBasis& basis);
ProjectionBasis read_basis(const std::filesystem::path& mtx_path);

// Z.mtx, U_tilde.mtx and stabilizer.json
// {delta, k, mu_max, q, adi_steps, residual_history, ...}.
Json stabilizer_manifest(const StabilizerFactor& stab);
void write_stabilizer(const std::filesystem::path& dir, const StabilizerFactor& stab);

Json to_json(const ReducedProvenance& p);

}  // namespace stabmor

#endif  // STABMOR_IO_HPP
