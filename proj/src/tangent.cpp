#include "sllg/tangent.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <stdexcept>

namespace sllg {

TangentFrame build_frames(const NodalField& m) {
  const Eigen::Index n = m.rows();
  TangentFrame f;
  f.t1.resize(n, 3);
  f.t2.resize(n, 3);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Vector3d mj = m.row(j);
    if (std::abs(mj.norm() - 1.0) > 1e-6) {
      throw std::invalid_argument(
          "build_frames: magnetization node off the unit sphere");
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (std::abs(mj(a)) < std::abs(mj(axis))) axis = a;
    }
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(axis) = 1.0;
    Eigen::Vector3d t1 = e - e.dot(mj) * mj;
    t1.normalize();
    f.t1.row(j) = t1;
    f.t2.row(j) = mj.cross(t1);
  }
  return f;
}

TangentUpdate assemble_and_solve(const NodalField& m, const NodalField& dW,
                                 const NoiseModel& noise, const Mesh& mesh,
                                 double theta, double dt,
                                 const SolverConfig& solver) {
  if (theta <= 0.5 || theta > 1.0) {
    throw std::invalid_argument("assemble_and_solve: theta must lie in (1/2, 1]");
  }
  if (dt <= 0.0) {
    throw std::invalid_argument("assemble_and_solve: dt must be > 0");
  }
  const int n = mesh.num_nodes();
  if (m.rows() != n || dW.rows() != n) {
    throw std::invalid_argument("assemble_and_solve: field/mesh mismatch");
  }

  TangentUpdate upd;
  upd.frame = build_frames(m);
  const NodalField& t1 = upd.frame.t1;
  const NodalField& t2 = upd.frame.t2;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * n + 4 * mesh.stiffness.nonZeros());

  // Lumped mass block of (v - m x v, phi): in frame coordinates
  // mu_j * [[1, 1], [-1, 1]] (exactly antisymmetric skew part).
  for (int j = 0; j < n; ++j) {
    const double mu = mesh.lumped_mass(j);
    trip.emplace_back(2 * j, 2 * j, mu);
    trip.emplace_back(2 * j, 2 * j + 1, mu);
    trip.emplace_back(2 * j + 1, 2 * j, -mu);
    trip.emplace_back(2 * j + 1, 2 * j + 1, mu);
  }

  // Stiffness coupling: 2 theta dt K_kj (t^b_j . t^a_k)
  const double cstiff = 2.0 * theta * dt;
  for (int col = 0; col < mesh.stiffness.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(mesh.stiffness, col); it;
         ++it) {
      const int k = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      const double w = cstiff * it.value();
      trip.emplace_back(2 * k, 2 * j, w * t1.row(k).dot(t1.row(j)));
      trip.emplace_back(2 * k, 2 * j + 1, w * t1.row(k).dot(t2.row(j)));
      trip.emplace_back(2 * k + 1, 2 * j, w * t2.row(k).dot(t1.row(j)));
      trip.emplace_back(2 * k + 1, 2 * j + 1, w * t2.row(k).dot(t2.row(j)));
    }
  }

  Eigen::SparseMatrix<double> A(2 * n, 2 * n);
  A.setFromTriplets(trip.begin(), trip.end());

  // Right-hand side: exchange drift, noise, and Ito correction terms.
  const NodalField Anoise = cross_rows(m, dW);
  const NodalField S = ito_correction(noise, m);
  NodalField Km(n, 3);
  for (int c = 0; c < 3; ++c) Km.col(c) = mesh.stiffness * m.col(c);

  Eigen::VectorXd rhs(2 * n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector3d mk = m.row(k);
    const Eigen::Vector3d a = Anoise.row(k);
    const Eigen::Vector3d s = S.row(k);
    const Eigen::Vector3d noise_term = a - mk.cross(a);
    const Eigen::Vector3d corr_term = s - mk.cross(s);
    const Eigen::Vector3d r = -2.0 * dt * Km.row(k).transpose() +
                              mesh.lumped_mass(k) * noise_term +
                              0.5 * dt * mesh.lumped_mass(k) * corr_term;
    rhs(2 * k) = r.dot(t1.row(k));
    rhs(2 * k + 1) = r.dot(t2.row(k));
  }

  Eigen::VectorXd x;
  if (solver.method == SolverConfig::Method::Direct) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
      throw SolverError("assemble_and_solve: sparse LU factorization failed",
                        -1.0, 0);
    }
    x = lu.solve(rhs);
    upd.iterations = 0;
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                    Eigen::IncompleteLUT<double>>
        krylov;
    krylov.setTolerance(solver.tol);
    krylov.setMaxIterations(solver.max_iter > 0 ? solver.max_iter : 10 * 2 * n);
    krylov.compute(A);
    x = krylov.solve(rhs);
    upd.iterations = static_cast<int>(krylov.iterations());
    if (krylov.info() != Eigen::Success) {
      throw SolverError("assemble_and_solve: Krylov iteration did not converge",
                        krylov.error(), upd.iterations);
    }
  }

  const double rhs_norm = rhs.norm();
  upd.solver_residual =
      rhs_norm > 0.0 ? (A * x - rhs).norm() / rhs_norm : (A * x - rhs).norm();
  if (!(upd.solver_residual <= 1e-6) && rhs_norm > 0.0) {
    throw SolverError("assemble_and_solve: solution residual too large",
                      upd.solver_residual, upd.iterations);
  }

  upd.reduced = x;
  upd.v.resize(n, 3);
  for (int j = 0; j < n; ++j) {
    upd.v.row(j) = x(2 * j) * t1.row(j) + x(2 * j + 1) * t2.row(j);
  }
  return upd;
}

double step_residual_identity(const NodalField& m, const NodalField& v,
                              const NodalField& dW, const NoiseModel& noise,
                              const Mesh& mesh, double theta, double dt) {
  const NodalField A = cross_rows(m, dW);
  const NodalField diff = v - A;
  const NodalField S = ito_correction(noise, m);
  const NodalField corr = S - cross_rows(m, S);

  const double lhs = 2.0 * grad_pair(mesh, m, v);
  const double rhs = -lumped_norm_sq(mesh.lumped_mass, diff) / dt -
                     2.0 * theta * grad_pair(mesh, v, v) +
                     2.0 * theta * grad_pair(mesh, v, A) +
                     2.0 * grad_pair(mesh, m, A) +
                     0.5 * lumped_dot(mesh.lumped_mass, corr, diff);
  return std::abs(lhs - rhs);
}

}  // namespace sllg
