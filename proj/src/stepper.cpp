#include "sllg/stepper.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sllg {

namespace {

constexpr double kPi = 3.14159265358979323846;

NodalField read_field_file(const std::string& path, int expected_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("init_state: cannot open " + path);
  std::vector<Eigen::Vector3d> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Eigen::Vector3d v;
    char comma;
    ss >> v(0) >> comma >> v(1) >> comma >> v(2);
    if (!ss) throw std::runtime_error("init_state: malformed line in " + path);
    rows.push_back(v);
  }
  if (static_cast<int>(rows.size()) != expected_nodes) {
    throw std::runtime_error("init_state: node count mismatch in " + path);
  }
  NodalField f(expected_nodes, 3);
  for (int j = 0; j < expected_nodes; ++j) f.row(j) = rows[j];
  return f;
}

}  // namespace

NodalField init_state(const InitSpec& spec, const Mesh& mesh) {
  const int n = mesh.num_nodes();
  NodalField m(n, 3);
  switch (spec.kind) {
    case InitSpec::Kind::Constant:
      for (int j = 0; j < n; ++j) m.row(j) = spec.value;
      break;
    case InitSpec::Kind::Rotation:
      for (int j = 0; j < n; ++j) {
        const double x = mesh.node_coords(j, 0);
        m.row(j) = Eigen::Vector3d(std::cos(2.0 * kPi * x),
                                   std::sin(2.0 * kPi * x), 0.0);
      }
      break;
    case InitSpec::Kind::File:
      m = read_field_file(spec.path, n);
      break;
  }
  for (int j = 0; j < n; ++j) {
    const double nrm = m.row(j).norm();
    if (nrm == 0.0) {
      throw std::invalid_argument("init_state: zero-length vector at a node");
    }
    m.row(j) /= nrm;
  }
  return m;
}

StepResult step(const NodalField& m, const NodalField& dW,
                const NoiseModel& noise, const Mesh& mesh,
                const SchemeParams& params, const SolverConfig& solver,
                int step_index) {
  const double dt = params.dt();
  StepResult res;

  TangentUpdate upd =
      assemble_and_solve(m, dW, noise, mesh, params.theta, dt, solver);
  res.v = std::move(upd.v);
  res.A = cross_rows(m, dW);

  StepDiagnostics& d = res.diag;
  d.step = step_index;
  d.t = (step_index + 1) * dt;
  d.norm_v_sq = lumped_norm_sq(mesh.lumped_mass, res.v);
  d.norm_v_minus_A_sq = lumped_norm_sq(mesh.lumped_mass, res.v - res.A);
  d.norm_grad_v_sq = grad_pair(mesh, res.v, res.v);
  d.residual_identity =
      step_residual_identity(m, res.v, dW, noise, mesh, params.theta, dt);
  d.solver_residual = upd.solver_residual;
  d.solver_iterations = upd.iterations;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    d.max_tangency = std::max(d.max_tangency,
                              std::abs(res.v.row(j).dot(m.row(j))));
  }

  NodalField sum = m + res.v;
  d.energy_pre_renorm = dirichlet_energy(sum, mesh);
  res.m_next.resize(m.rows(), 3);
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    const double nrm = sum.row(j).norm();
    if (nrm < 0.5) {
      // impossible for exactly tangent v; indicates a corrupted solve
      throw SolverError("step: |m + v| < 0.5 at a node, aborting path", nrm,
                        step_index);
    }
    res.m_next.row(j) = sum.row(j) / nrm;
    d.max_sphere_dev = std::max(d.max_sphere_dev,
                                std::abs(res.m_next.row(j).norm() - 1.0));
  }
  d.energy = dirichlet_energy(res.m_next, mesh);
  return res;
}

namespace {

Trajectory run_loop(const Mesh& mesh, const NoiseModel& noise,
                    const SchemeParams& params, const NodalField& m0,
                    const SolverConfig& solver, int snapshot_stride,
                    NormalSampler* rng, const Eigen::MatrixXd* coeffs) {
  if (params.theta <= 0.5 || params.theta > 1.0) {
    throw std::invalid_argument("run_path: theta must lie in (1/2, 1]");
  }
  if (params.T <= 0.0 || params.N < 1) {
    throw std::invalid_argument("run_path: need T > 0 and N >= 1");
  }
  const double dt = params.dt();

  Trajectory traj;
  traj.params = params;
  traj.initial_energy = dirichlet_energy(m0, mesh);
  traj.steps.reserve(params.N);

  NodalField m = m0;
  NodalField X = NodalField::Zero(m0.rows(), 3);
  if (snapshot_stride > 0) {
    traj.snapshot_steps.push_back(0);
    traj.snapshots.push_back(m);
    traj.martingale_snapshots.push_back(X);
  }

  for (int n = 0; n < params.N; ++n) {
    NodalField dW;
    if (rng != nullptr) {
      dW = increment_from_coefficients(noise, draw_coefficients(noise, *rng, dt));
    } else {
      dW = increment_from_coefficients(noise, coeffs->row(n).transpose());
    }
    StepResult res;
    try {
      res = step(m, dW, noise, mesh, params, solver, n);
    } catch (const SolverError& e) {
      traj.completed = false;
      traj.failed_step = n;
      traj.error = e.what();
      traj.final_m = m;
      traj.final_X = X;
      return traj;
    }
    m = std::move(res.m_next);
    X += res.A;
    traj.steps.push_back(res.diag);
    if (snapshot_stride > 0 && (n + 1) % snapshot_stride == 0) {
      traj.snapshot_steps.push_back(n + 1);
      traj.snapshots.push_back(m);
      traj.martingale_snapshots.push_back(X);
    }
  }
  traj.final_m = std::move(m);
  traj.final_X = std::move(X);
  traj.completed = true;
  return traj;
}

}  // namespace

Trajectory run_path(const Mesh& mesh, const NoiseModel& noise,
                    const SchemeParams& params, const NodalField& m0,
                    const SolverConfig& solver, std::uint64_t seed,
                    int snapshot_stride) {
  NormalSampler rng(seed);
  return run_loop(mesh, noise, params, m0, solver, snapshot_stride, &rng,
                  nullptr);
}

Trajectory run_path_with_coefficients(const Mesh& mesh, const NoiseModel& noise,
                                      const SchemeParams& params,
                                      const NodalField& m0,
                                      const SolverConfig& solver,
                                      const Eigen::MatrixXd& coeffs,
                                      int snapshot_stride) {
  if (coeffs.rows() != params.N || coeffs.cols() != noise.modes) {
    throw std::invalid_argument(
        "run_path_with_coefficients: coefficient matrix must be N x J");
  }
  return run_loop(mesh, noise, params, m0, solver, snapshot_stride, nullptr,
                  &coeffs);
}

}  // namespace sllg
