#ifndef AKSTAB_IO_HPP
#define AKSTAB_IO_HPP

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "akstab/solver.hpp"

namespace akstab::io {

/// AKF4 field files: magic "AKF4", u32 version = 1, u32 n, u32 component_count,
/// u32 reserved = 0, then component_count * n^4 float64 little-endian values,
/// components outermost, i1 slowest to i4 fastest. Form files append a u32
/// rank tag to the header; scalar and endomorphism (16-component) files use
/// the plain header.
void write_scalar(const std::string& path, const ScalarField& f);
ScalarField read_scalar(const std::string& path);

void write_form(const std::string& path, const Form& f);
Form read_form(const std::string& path);

/// J fields as 16-component AKF4 (row-major J^a_b).
void write_endomorphism(const std::string& path, const EndomorphismField& J);
EndomorphismField read_endomorphism(const std::string& path);

struct Config {
  int n = 16;
  DeformationPath path;
  int path_samples = 9;
  ContinuationConfig solver;
  std::string output_dir = "out";
};

/// Parses the JSON config (grid.n, path.*, solver.*, output.dir).
Config load_config(const std::string& path);
Config config_from_json(const nlohmann::json& j);

nlohmann::json result_to_json(const ContinuationResult& result);

}  // namespace akstab::io

#endif
