#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sllg/field.hpp"
#include "sllg/mesh.hpp"
#include "sllg/noise.hpp"
#include "sllg/tangent.hpp"

namespace sllg {

struct SchemeParams {
  double T = 1.0;
  int N = 64;
  double theta = 1.0;  // must lie in (1/2, 1]
  double dt() const { return T / N; }
};

struct StepDiagnostics {
  int step = 0;
  double t = 0.0;                  // (step + 1) * dt
  double energy = 0.0;             // ||grad m||^2 after renormalization
  double energy_pre_renorm = 0.0;  // ||grad (m + v)||^2
  double norm_v_sq = 0.0;
  double norm_v_minus_A_sq = 0.0;
  double norm_grad_v_sq = 0.0;
  double residual_identity = 0.0;
  double max_tangency = 0.0;       // max_j |v_j . m_j|
  double max_sphere_dev = 0.0;     // max_j | |m_j| - 1 | after the step
  double solver_residual = 0.0;
  int solver_iterations = 0;
};

struct StepResult {
  NodalField m_next;
  NodalField v;
  NodalField A;  // m x GdW, the per-step martingale increment
  StepDiagnostics diag;
};

struct InitSpec {
  enum class Kind { Constant, Rotation, File };
  Kind kind = Kind::Constant;
  Eigen::Vector3d value{0.0, 0.0, 1.0};
  std::string path;
};

struct Trajectory {
  SchemeParams params;
  double initial_energy = 0.0;
  std::vector<StepDiagnostics> steps;
  std::vector<int> snapshot_steps;
  std::vector<NodalField> snapshots;             // m at snapshot steps
  std::vector<NodalField> martingale_snapshots;  // X at snapshot steps
  NodalField final_m;
  NodalField final_X;
  bool completed = false;
  int failed_step = -1;
  std::string error;
};

// Nodal sampling of the initial profile, renormalized to |m_j| = 1 exactly.
// Rotation profile: m0(x) = (cos 2 pi x, sin 2 pi x, 0) along the first axis.
// Throws on a zero-length nodal vector.
NodalField init_state(const InitSpec& spec, const Mesh& mesh);

// One scheme step: tangent solve, then nodal renormalization
// m' = (m + v)/|m + v|.  Aborts (SolverError) if any |m_j + v_j| < 0.5,
// which cannot happen for exactly tangent v.
StepResult step(const NodalField& m, const NodalField& dW,
                const NoiseModel& noise, const Mesh& mesh,
                const SchemeParams& params, const SolverConfig& solver,
                int step_index = 0);

// Runs the full scheme drawing increments from a fresh NormalSampler(seed);
// bitwise deterministic for fixed inputs.  snapshot_stride 0 stores only the
// initial and final fields.
Trajectory run_path(const Mesh& mesh, const NoiseModel& noise,
                    const SchemeParams& params, const NodalField& m0,
                    const SolverConfig& solver, std::uint64_t seed,
                    int snapshot_stride = 0);

// Same loop, but with the N x J mode-coefficient matrix supplied by the
// caller (one row per step); used by the coupled-refinement driver.
Trajectory run_path_with_coefficients(const Mesh& mesh, const NoiseModel& noise,
                                      const SchemeParams& params,
                                      const NodalField& m0,
                                      const SolverConfig& solver,
                                      const Eigen::MatrixXd& coeffs,
                                      int snapshot_stride = 0);

}  // namespace sllg
