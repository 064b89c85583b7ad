#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "sllg/noise.hpp"

using namespace sllg;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mesh unit_interval(int nodes) {
  MeshConfig cfg;
  cfg.dimension = 1;
  cfg.extent_x = 1.0;
  cfg.nodes_x = nodes;
  return build_mesh(cfg);
}

}  // namespace

TEST_CASE("J=0: empty basis, increments identically zero") {
  Mesh mesh = unit_interval(9);
  NoiseModel noise = build_noise(mesh, 0, 2.0, 1.0);
  NormalSampler rng(1);
  WienerIncrement inc = sample_increment(noise, rng, 0.1);
  CHECK(inc.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mode k=0 is a constant field of magnitude c") {
  Mesh mesh = unit_interval(17);
  const double c = 0.7;
  NoiseModel noise = build_noise(mesh, 3, 2.0, c);
  // modes cycle x,y,z over the same k=0 eigenfunction
  for (int i = 0; i < 3; ++i) {
    NodalField g = noise.mode_field(i);
    for (int j = 0; j < mesh.num_nodes(); ++j) {
      CHECK(g(j, i) == doctest::Approx(c).epsilon(1e-13));
    }
  }
}

TEST_CASE("discrete mode norms equal the multipliers, modes orthonormal") {
  Mesh mesh = unit_interval(33);
  NoiseModel noise = build_noise(mesh, 12, 2.0, 1.3);
  for (int i = 0; i < noise.modes; ++i) {
    NodalField gi = noise.mode_field(i);
    const double norm = std::sqrt(lumped_norm_sq(mesh.lumped_mass, gi));
    CHECK(norm == doctest::Approx(noise.multiplier(i)).epsilon(1e-12));
    for (int k = 0; k < i; ++k) {
      const double ip = lumped_dot(mesh.lumped_mass, gi, noise.mode_field(k));
      CHECK(std::abs(ip) < 1e-12);
    }
  }
}

TEST_CASE("aliasing: too many modes for the resolution is rejected") {
  Mesh mesh = unit_interval(4);
  CHECK_THROWS_AS(build_noise(mesh, 13, 2.0, 1.0), std::invalid_argument);
  CHECK_NOTHROW(build_noise(mesh, 12, 2.0, 1.0));
  CHECK_THROWS_AS(build_noise(mesh, -1, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_noise(mesh, 2, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_noise(mesh, 2, 2.0, -0.5), std::invalid_argument);
}

TEST_CASE("Hilbert-Schmidt partial sums bounded by the analytic series") {
  // scalar oracle: sum over spatial modes k of 3 c^2 (1 + lambda_k)^{2-2s}
  // with lambda_k = (k pi)^2 on [0,1], summed far past the truncation
  const double s = 2.0, c = 1.0;
  double series = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double lam = (k * kPi) * (k * kPi);
    series += 3.0 * c * c * std::pow(1.0 + lam, 2.0 - 2.0 * s);
  }

  Mesh mesh = unit_interval(64);
  double prev = 0.0;
  for (int J = 3; J <= 3 * 64; J += 3) {
    NoiseModel noise = build_noise(mesh, J, s, c);
    CHECK(noise.hs_norm_sq >= prev);         // nondecreasing in J
    CHECK(noise.hs_norm_sq <= series + 1e-12);
    prev = noise.hs_norm_sq;
  }
}

TEST_CASE("sample_increment determinism and draw-order contract") {
  Mesh mesh = unit_interval(9);
  NoiseModel noise = build_noise(mesh, 3, 2.0, 1.0);
  NormalSampler a(42), b(42);
  WienerIncrement ia = sample_increment(noise, a, 0.01);
  WienerIncrement ib = sample_increment(noise, b, 0.01);
  CHECK((ia.values - ib.values).cwiseAbs().maxCoeff() == 0.0);

  // consuming exactly J normals: continuing both streams stays in sync
  CHECK(a.next() == b.next());
}

TEST_CASE("ensemble mean and covariance of increments") {
  Mesh mesh = unit_interval(9);
  const int J = 4;
  const double dt = 0.01;
  NoiseModel noise = build_noise(mesh, J, 2.0, 1.0);
  const int M = 10000;

  // fixed probe
  NodalField probe = NodalField::Zero(mesh.num_nodes(), 3);
  probe.col(2).setOnes();
  probe.col(0) = mesh.node_coords.col(0);

  // covariance identity by direct mode summation
  double expected_var = 0.0;
  for (int i = 0; i < J; ++i) {
    const double gi = lumped_dot(mesh.lumped_mass, noise.mode_field(i), probe);
    expected_var += dt * gi * gi;
  }

  NormalSampler rng(2024);
  NodalField mean = NodalField::Zero(mesh.num_nodes(), 3);
  double var_acc = 0.0;
  for (int i = 0; i < M; ++i) {
    WienerIncrement inc = sample_increment(noise, rng, dt);
    mean += inc.values;
    const double ip = lumped_dot(mesh.lumped_mass, inc.values, probe);
    var_acc += ip * ip;
  }
  mean /= static_cast<double>(M);
  const double sample_var = var_acc / (M - 1);

  // per-component mean within 4 sigma / sqrt(M) (direct mode summation)
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    for (int c = 0; c < 3; ++c) {
      double var_jc = 0.0;
      for (int i = 0; i < J; ++i) {
        NodalField gi = noise.mode_field(i);
        var_jc += dt * gi(j, c) * gi(j, c);
      }
      CHECK(std::abs(mean(j, c)) <= 4.0 * std::sqrt(var_jc) / 100.0 + 1e-15);
    }
  }
  CHECK(std::abs(sample_var - expected_var) <= 0.1 * expected_var);
}

TEST_CASE("ito correction: perpendicular and parallel special cases") {
  Mesh mesh = unit_interval(5);
  NoiseModel noise = build_noise(mesh, 3, 2.0, 0.9);

  // single active mode per direction; m aligned with x sees the x-mode vanish
  NodalField m = NodalField::Zero(mesh.num_nodes(), 3);
  m.col(0).setOnes();
  NodalField s = ito_correction(noise, m);
  // x mode contributes 0 (parallel); y and z modes each give -g^2 m
  const double g = noise.multiplier(1);  // same magnitude for all k=0 modes
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    CHECK(s(j, 0) == doctest::Approx(-2.0 * g * g).epsilon(1e-12));
    CHECK(std::abs(s(j, 1)) < 1e-13);
    CHECK(std::abs(s(j, 2)) < 1e-13);
  }
}

TEST_CASE("ito correction matches a brute-force cross-product oracle") {
  Mesh mesh = unit_interval(11);
  NoiseModel noise = build_noise(mesh, 5, 2.0, 1.1);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> dist;
  NodalField m(mesh.num_nodes(), 3);
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    Eigen::Vector3d v(dist(gen), dist(gen), dist(gen));
    m.row(j) = v.normalized();
  }
  NodalField s = ito_correction(noise, m);

  for (int j = 0; j < mesh.num_nodes(); ++j) {
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int i = 0; i < noise.modes; ++i) {
      NodalField gi = noise.mode_field(i);
      const Eigen::Vector3d g = gi.row(j);
      const Eigen::Vector3d mj = m.row(j);
      acc += (mj.cross(g)).cross(g);
    }
    CHECK((Eigen::Vector3d(s.row(j)) - acc).norm() <= 1e-14);
    // m . ((m x G) x G) = -|m x G|^2 <= 0, per mode
    for (int i = 0; i < noise.modes; ++i) {
      NodalField gi = noise.mode_field(i);
      const Eigen::Vector3d g = gi.row(j);
      const Eigen::Vector3d mj = m.row(j);
      const double lhs = mj.dot((mj.cross(g)).cross(g));
      CHECK(std::abs(lhs + mj.cross(g).squaredNorm()) <= 1e-13);
    }
  }
}

TEST_CASE("increments independent across steps") {
  Mesh mesh = unit_interval(9);
  NoiseModel noise = build_noise(mesh, 4, 2.0, 1.0);
  const double dt = 0.02;
  NodalField probe = NodalField::Zero(mesh.num_nodes(), 3);
  probe.col(1).setOnes();

  const int M = 10000;
  std::vector<double> x(M), y(M);
  NormalSampler rng(77);
  for (int i = 0; i < M; ++i) {
    WienerIncrement a = sample_increment(noise, rng, dt);
    WienerIncrement b = sample_increment(noise, rng, dt);
    x[i] = lumped_dot(mesh.lumped_mass, a.values, probe);
    y[i] = lumped_dot(mesh.lumped_mass, b.values, probe);
  }
  double mean_xy = 0.0;
  for (int i = 0; i < M; ++i) mean_xy += x[i] * y[i];
  mean_xy /= M;
  double var_xy = 0.0;
  for (int i = 0; i < M; ++i) {
    var_xy += (x[i] * y[i] - mean_xy) * (x[i] * y[i] - mean_xy);
  }
  var_xy /= (M - 1);
  CHECK(std::abs(mean_xy) <= 3.0 * std::sqrt(var_xy / M));
}

TEST_CASE("moment surrogates: E||m x GdW||^2 and fourth-moment scaling") {
  Mesh mesh = unit_interval(9);
  NoiseModel noise = build_noise(mesh, 4, 2.0, 1.0);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> dist;
  NodalField m(mesh.num_nodes(), 3);
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    Eigen::Vector3d v(dist(gen), dist(gen), dist(gen));
    m.row(j) = v.normalized();
  }

  double sum_g_sq = 0.0;
  for (int i = 0; i < noise.modes; ++i) {
    sum_g_sq += noise.multiplier(i) * noise.multiplier(i);
  }

  const int M = 20000;
  auto moments = [&](double dt) {
    NormalSampler rng(99);
    double m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < M; ++i) {
      WienerIncrement inc = sample_increment(noise, rng, dt);
      NodalField a = cross_rows(m, inc.values);
      m2 += lumped_norm_sq(mesh.lumped_mass, a);
      m4 += lumped_l4_pow4(mesh.lumped_mass, a);
    }
    return std::pair<double, double>{m2 / M, m4 / M};
  };

  const double dt = 0.02;
  auto [m2_full, m4_full] = moments(dt);
  auto [m2_half, m4_half] = moments(dt / 2);

  // |D| = 1 here, so E||m x GdW||^2 <= dt * sum g_i^2 up to sampling error
  CHECK(m2_full <= dt * sum_g_sq * 1.1);
  // E||.||^4_{L4} = O(dt^2): halving dt should quarter it, within 25%
  const double ratio = m4_full / m4_half;
  CHECK(ratio > 4.0 * 0.75);
  CHECK(ratio < 4.0 * 1.25);
}

TEST_CASE("apply_G is the spectral diagonal operator") {
  Mesh mesh = unit_interval(17);
  NoiseModel noise = build_noise(mesh, 9, 2.0, 1.0);
  // a = e_4 field direction: G a = g_4 e_4
  NodalField a = noise.mode_field(4);
  a /= noise.multiplier(4);
  NodalField ga = apply_G(noise, mesh, a);
  CHECK((ga - noise.multiplier(4) * a).cwiseAbs().maxCoeff() < 1e-12);
}
