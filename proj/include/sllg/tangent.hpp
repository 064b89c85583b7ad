#pragma once

#include <string>

#include "sllg/field.hpp"
#include "sllg/mesh.hpp"
#include "sllg/noise.hpp"

namespace sllg {

struct SolverConfig {
  enum class Method { Direct, Iterative };
  Method method = Method::Direct;
  double tol = 1e-10;
  int max_iter = 0;  // 0 = 10 * number of unknowns
};

// Per-node orthonormal pair (t1_j, t2_j) spanning the plane orthogonal to
// m_j, with t2 = m x t1.  Rule: t1 is the Gram-Schmidt complement of the
// coordinate axis with the smallest-magnitude component of m_j (ties broken
// by lowest axis index); deterministic and nondegenerate.
struct TangentFrame {
  NodalField t1, t2;
};

// Throws if any | |m_j| - 1 | > 1e-6 (corrupted state).
TangentFrame build_frames(const NodalField& m);

struct TangentUpdate {
  NodalField v;               // nodal field, v_j orthogonal to m_j
  Eigen::VectorXd reduced;    // 2 frame coordinates per node
  TangentFrame frame;
  int iterations = 0;         // 0 for the direct solver
  double solver_residual = 0.0;
};

struct SolverError : std::runtime_error {
  double residual;
  int iterations;
  SolverError(const std::string& what, double res, int it)
      : std::runtime_error(what), residual(res), iterations(it) {}
};

// Assembles and solves the per-step tangent-space linear problem
//   (v - m x v, phi) + 2 theta dt (grad v, grad phi)
//     = -2 dt (grad m, grad phi) + ((Id - m x)(m x GdW), phi)
//       + (dt/2) sum_i ((Id - m x)((m x G_i) x G_i), phi)
// reduced to 2 unknowns per node via tangent frames.  The system matrix is
// nonsymmetric with positive-definite symmetric part.
TangentUpdate assemble_and_solve(const NodalField& m, const NodalField& dW,
                                 const NoiseModel& noise, const Mesh& mesh,
                                 double theta, double dt,
                                 const SolverConfig& solver);

// Absolute defect of the exact algebraic identity obtained by testing the
// variational problem with phi = v - A, A = m x GdW:
//   2(grad m, grad v) = -(1/dt)||v-A||^2 - 2 theta ||grad v||^2
//     + 2 theta (grad v, grad A) + 2 (grad m, grad A)
//     + (1/2) sum_i ((Id - m x)((m x G_i) x G_i), v - A)
double step_residual_identity(const NodalField& m, const NodalField& v,
                              const NodalField& dW, const NoiseModel& noise,
                              const Mesh& mesh, double theta, double dt);

}  // namespace sllg
