#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sllg/mesh.hpp"
#include "sllg/stepper.hpp"
#include "sllg/tangent.hpp"

namespace sllg {

struct McParams {
  int paths = 100;
  std::uint64_t base_seed = 1;
};

struct OutputParams {
  int snapshot_stride = 0;
  bool vtk = false;
};

struct NoiseParams {
  int modes = 8;      // J; 0 disables the noise
  double decay = 2.0;  // spectral exponent s
  double amplitude = 1.0;
};

struct RunConfig {
  MeshConfig mesh;
  SchemeParams scheme;
  NoiseParams noise;
  InitSpec init;
  SolverConfig solver;
  McParams mc;
  OutputParams output;
};

struct ConfigParseResult {
  RunConfig config;
  std::vector<std::string> errors;  // all violations, with field paths
  bool ok() const { return errors.empty(); }
};

// Parses the documented "key = value" format (dotted keys, '#' comments).
// Unknown keys are rejected; every violation is reported, not just the first.
ConfigParseResult parse_config(const std::string& text);

ConfigParseResult parse_config_file(const std::string& path);

// Canonical serialization: fixed key order, 17 significant digits.
// parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& config);

// FNV-1a over the canonical serialization; changes iff a semantic field does.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace sllg
