#pragma once

#include <string>
#include <vector>

#include "sllg/config.hpp"
#include "sllg/experiments.hpp"
#include "sllg/stepper.hpp"

namespace sllg {

// 17 significant digits: round-trips any double exactly, so identical runs
// produce byte-identical files.
std::string fmt17(double v);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_ensemble_csv(const std::string& path, const EnsembleStats& stats);
void write_convergence_csv(const std::string& path,
                           const ConvergenceReport& report);

// Nodal field as "mx,my,mz" rows; write/read round-trip is bit exact.
void write_field_csv(const std::string& path, const NodalField& field);
NodalField read_field_csv(const std::string& path);

// Legacy ASCII VTK point data; excluded from reproducibility guarantees.
void write_field_vtk(const std::string& path, const Mesh& mesh,
                     const NodalField& field, const std::string& name);

struct Manifest {
  std::string command;
  std::string config_hash_hex;
  std::uint64_t seed = 0;
  std::string version;
  bool partial = false;
  std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const Manifest& manifest);

inline const char* artifact_version() { return "0.1.0"; }

}  // namespace sllg
