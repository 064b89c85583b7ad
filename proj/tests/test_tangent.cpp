#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "sllg/tangent.hpp"

using namespace sllg;

namespace {

Mesh unit_interval(int nodes) {
  MeshConfig cfg;
  cfg.dimension = 1;
  cfg.extent_x = 1.0;
  cfg.nodes_x = nodes;
  return build_mesh(cfg);
}

NodalField random_unit_field(int nodes, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  NodalField m(nodes, 3);
  for (int j = 0; j < nodes; ++j) {
    Eigen::Vector3d v(dist(gen), dist(gen), dist(gen));
    m.row(j) = v.normalized();
  }
  return m;
}

// A single free node: mass 1, no stiffness.  Used for closed-form checks.
Mesh point_mesh() {
  Mesh mesh;
  mesh.dimension = 1;
  mesh.node_coords = Eigen::MatrixXd::Zero(1, 1);
  mesh.lumped_mass = Eigen::VectorXd::Ones(1);
  mesh.stiffness.resize(1, 1);
  mesh.stiffness.setZero();
  mesh.domain_measure = 1.0;
  return mesh;
}

// Independent dense assembly: applies the bilinear form and right-hand side
// of the variational problem to the frame basis fields directly, without the
// per-node block formulas used by the production path.
struct DenseOracle {
  Eigen::MatrixXd A;
  Eigen::VectorXd rhs;
};

DenseOracle dense_assemble(const NodalField& m, const NodalField& dW,
                           const NoiseModel& noise, const Mesh& mesh,
                           double theta, double dt) {
  const int n = mesh.num_nodes();
  TangentFrame frame = build_frames(m);

  auto basis_field = [&](int idx) {
    NodalField f = NodalField::Zero(n, 3);
    const int j = idx / 2;
    f.row(j) = (idx % 2 == 0) ? frame.t1.row(j) : frame.t2.row(j);
    return f;
  };
  auto bilinear = [&](const NodalField& v, const NodalField& phi) {
    const NodalField mv = cross_rows(m, v);
    return lumped_dot(mesh.lumped_mass, v - mv, phi) +
           2.0 * theta * dt * grad_pair(mesh, v, phi);
  };
  const NodalField Anoise = cross_rows(m, dW);
  const NodalField S = ito_correction(noise, m);
  auto load = [&](const NodalField& phi) {
    return -2.0 * dt * grad_pair(mesh, m, phi) +
           lumped_dot(mesh.lumped_mass, Anoise - cross_rows(m, Anoise), phi) +
           0.5 * dt * lumped_dot(mesh.lumped_mass, S - cross_rows(m, S), phi);
  };

  DenseOracle oracle;
  oracle.A.resize(2 * n, 2 * n);
  oracle.rhs.resize(2 * n);
  for (int r = 0; r < 2 * n; ++r) {
    const NodalField phi = basis_field(r);
    oracle.rhs(r) = load(phi);
    for (int c = 0; c < 2 * n; ++c) {
      oracle.A(r, c) = bilinear(basis_field(c), phi);
    }
  }
  return oracle;
}

}  // namespace

TEST_CASE("frames: axis-aligned magnetization gets the canonical frame") {
  NodalField m(2, 3);
  m.row(0) = Eigen::Vector3d(0, 0, 1);
  m.row(1) = Eigen::Vector3d(1, 0, 0);
  TangentFrame f = build_frames(m);

  CHECK((Eigen::Vector3d(f.t1.row(0)) - Eigen::Vector3d(1, 0, 0)).norm() <
        1e-14);
  CHECK((Eigen::Vector3d(f.t2.row(0)) - Eigen::Vector3d(0, 1, 0)).norm() <
        1e-14);
  // m = e_x: frame spans the yz-plane
  CHECK(std::abs(f.t1(1, 0)) < 1e-14);
  CHECK(std::abs(f.t2(1, 0)) < 1e-14);
}

TEST_CASE("frames: randomized orthonormality invariants") {
  const int n = 1000000;
  NodalField m = random_unit_field(n, 11);
  TangentFrame f = build_frames(m);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d mj = m.row(j), t1 = f.t1.row(j), t2 = f.t2.row(j);
    worst = std::max(worst, std::abs(t1.dot(mj)));
    worst = std::max(worst, std::abs(t2.dot(mj)));
    worst = std::max(worst, std::abs(t1.dot(t2)));
    worst = std::max(worst, std::abs(t1.norm() - 1.0));
    worst = std::max(worst, std::abs(t2.norm() - 1.0));
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("frames: reject off-sphere input") {
  NodalField m(1, 3);
  m.row(0) = Eigen::Vector3d(0, 0, 1.001);
  CHECK_THROWS_AS(build_frames(m), std::invalid_argument);
}

TEST_CASE("constant m, no noise: v = 0 exactly") {
  Mesh mesh = unit_interval(9);
  NoiseModel noise = build_noise(mesh, 0, 2.0, 1.0);
  NodalField m = NodalField::Zero(9, 3);
  m.col(2).setOnes();
  NodalField dW = NodalField::Zero(9, 3);
  SolverConfig solver;
  TangentUpdate upd = assemble_and_solve(m, dW, noise, mesh, 1.0, 0.01, solver);
  CHECK(upd.v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single free node: solution is v = A") {
  // (v - m x v, phi) = ((Id - m x) A, phi) for phi orthogonal to m has the
  // unique solution v = A, since (Id - m x) is injective on the tangent plane
  Mesh mesh = point_mesh();
  NoiseModel noise = build_noise(mesh, 0, 2.0, 1.0);
  NodalField m(1, 3);
  m.row(0) = Eigen::Vector3d(0, 0, 1);
  // choose dW so that A = m x dW = (a, 0, 0)
  const double a = 0.37;
  NodalField dW(1, 3);
  dW.row(0) = Eigen::Vector3d(0, a, 0);  // (0,0,1) x (0,a,0) = (-a,0,0)
  SolverConfig solver;
  TangentUpdate upd = assemble_and_solve(m, dW, noise, mesh, 1.0, 0.05, solver);
  const NodalField A = cross_rows(m, dW);
  CHECK((upd.v - A).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("solution matches the dense LU oracle") {
  Mesh mesh = unit_interval(8);
  NoiseModel noise = build_noise(mesh, 2, 2.0, 1.0);
  NodalField m = random_unit_field(8, 21);
  NormalSampler rng(22);
  NodalField dW = sample_increment(noise, rng, 0.01).values;
  const double theta = 0.7, dt = 0.01;

  SolverConfig solver;
  TangentUpdate upd = assemble_and_solve(m, dW, noise, mesh, theta, dt, solver);

  DenseOracle oracle = dense_assemble(m, dW, noise, mesh, theta, dt);
  Eigen::VectorXd x = oracle.A.fullPivLu().solve(oracle.rhs);
  CHECK((upd.reduced - x).norm() <= 1e-10 * std::max(1.0, x.norm()));

  SUBCASE("iterative solver agrees with direct") {
    SolverConfig it;
    it.method = SolverConfig::Method::Iterative;
    it.tol = 1e-12;
    TangentUpdate upd2 = assemble_and_solve(m, dW, noise, mesh, theta, dt, it);
    CHECK((upd2.v - upd.v).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("coercivity: symmetric part positive definite, skew part inert") {
  Mesh mesh = unit_interval(6);
  NoiseModel noise = build_noise(mesh, 3, 2.0, 1.0);
  NodalField m = random_unit_field(6, 31);
  NodalField dW = NodalField::Zero(6, 3);
  DenseOracle oracle = dense_assemble(m, dW, noise, mesh, 0.8, 0.02);

  Eigen::MatrixXd sym = 0.5 * (oracle.A + oracle.A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  Eigen::MatrixXd skew = 0.5 * (oracle.A - oracle.A.transpose());
  std::mt19937_64 gen(4);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd v(oracle.A.rows());
    for (int i = 0; i < v.size(); ++i) v(i) = dist(gen);
    CHECK(std::abs(v.dot(skew * v)) <= 1e-13 * v.squaredNorm());
  }
}

TEST_CASE("tangency of the solution") {
  Mesh mesh = unit_interval(16);
  NoiseModel noise = build_noise(mesh, 4, 2.0, 1.0);
  NodalField m = random_unit_field(16, 41);
  NormalSampler rng(42);
  NodalField dW = sample_increment(noise, rng, 0.02).values;
  SolverConfig solver;
  TangentUpdate upd = assemble_and_solve(m, dW, noise, mesh, 1.0, 0.02, solver);
  for (int j = 0; j < 16; ++j) {
    CHECK(std::abs(upd.v.row(j).dot(m.row(j))) <= 1e-12);
  }
}

TEST_CASE("solution depends continuously on the increment") {
  Mesh mesh = unit_interval(12);
  NoiseModel noise = build_noise(mesh, 3, 2.0, 1.0);
  NodalField m = random_unit_field(12, 51);
  NormalSampler rng(52);
  NodalField dW = sample_increment(noise, rng, 0.02).values;
  NodalField dir = sample_increment(noise, rng, 1.0).values;
  dir /= std::sqrt(lumped_norm_sq(mesh.lumped_mass, dir));
  SolverConfig solver;
  TangentUpdate base = assemble_and_solve(m, dW, noise, mesh, 0.9, 0.02, solver);

  double prev_slope = -1.0;
  for (double delta : {1e-3, 1e-4, 1e-5}) {
    NodalField dWp = dW + delta * dir;
    TangentUpdate pert =
        assemble_and_solve(m, dWp, noise, mesh, 0.9, 0.02, solver);
    const double slope =
        std::sqrt(lumped_norm_sq(mesh.lumped_mass, pert.v - base.v)) / delta;
    if (prev_slope > 0.0) {
      CHECK(slope == doctest::Approx(prev_slope).epsilon(0.01));
    }
    prev_slope = slope;
  }
}

TEST_CASE("residual identity: deterministic specialization") {
  Mesh mesh = unit_interval(24);
  NoiseModel noise = build_noise(mesh, 0, 2.0, 1.0);
  NodalField m(24, 3);
  for (int j = 0; j < 24; ++j) {
    const double x = mesh.node_coords(j, 0);
    m.row(j) = Eigen::Vector3d(std::cos(2 * M_PI * x), std::sin(2 * M_PI * x),
                               0.0);
  }
  NodalField dW = NodalField::Zero(24, 3);
  const double theta = 1.0, dt = 0.005;
  SolverConfig solver;
  TangentUpdate upd = assemble_and_solve(m, dW, noise, mesh, theta, dt, solver);

  // with dW = 0 and J = 0: 2(grad m, grad v) = -(1/dt)||v||^2 - 2theta||grad v||^2
  const double lhs = 2.0 * grad_pair(mesh, m, upd.v);
  const double rhs = -lumped_norm_sq(mesh.lumped_mass, upd.v) / dt -
                     2.0 * theta * grad_pair(mesh, upd.v, upd.v);
  const double scale = std::abs(lhs) + std::abs(rhs) + 1.0;
  CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
  CHECK(step_residual_identity(m, upd.v, dW, noise, mesh, theta, dt) <=
        1e-10 * scale);
}

TEST_CASE("residual identity: converged steps and sensitivity to perturbation") {
  Mesh mesh = unit_interval(16);
  NoiseModel noise = build_noise(mesh, 4, 2.0, 1.0);
  NodalField m = random_unit_field(16, 61);
  NormalSampler rng(62);
  NodalField dW = sample_increment(noise, rng, 0.01).values;
  const double theta = 0.75, dt = 0.01;
  SolverConfig solver;
  TangentUpdate upd = assemble_and_solve(m, dW, noise, mesh, theta, dt, solver);

  const double scale =
      std::abs(2.0 * grad_pair(mesh, m, upd.v)) +
      lumped_norm_sq(mesh.lumped_mass, upd.v) / dt + 1.0;
  const double res0 =
      step_residual_identity(m, upd.v, dW, noise, mesh, theta, dt);
  CHECK(res0 <= 100.0 * solver.tol * scale);

  // residual grows linearly when the solution is perturbed tangentially
  TangentFrame frame = build_frames(m);
  NodalField tang = frame.t1 + 0.5 * frame.t2;
  tang /= std::sqrt(lumped_norm_sq(mesh.lumped_mass, tang));
  double prev = 0.0;
  for (double eps : {1e-5, 1e-4, 1e-3}) {
    const double res = step_residual_identity(m, (upd.v + eps * tang).eval(),
                                              dW, noise, mesh, theta, dt);
    CHECK(res > res0);
    if (prev > 0.0) {
      const double ratio = res / prev;  // Theta(eps): ~10 per decade
      CHECK(ratio > 5.0);
      CHECK(ratio < 20.0);
    }
    prev = res;
  }
}

TEST_CASE("theta outside (1/2, 1] is rejected") {
  Mesh mesh = unit_interval(4);
  NoiseModel noise = build_noise(mesh, 0, 2.0, 1.0);
  NodalField m = NodalField::Zero(4, 3);
  m.col(2).setOnes();
  NodalField dW = NodalField::Zero(4, 3);
  SolverConfig solver;
  CHECK_THROWS_AS(assemble_and_solve(m, dW, noise, mesh, 0.5, 0.01, solver),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_and_solve(m, dW, noise, mesh, 1.01, 0.01, solver),
                  std::invalid_argument);
  CHECK_NOTHROW(assemble_and_solve(m, dW, noise, mesh, 1.0, 0.01, solver));
}
