#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace sllg {

// Nodal vector field: one R^3 value per mesh node (row-per-node layout).
using NodalField = Eigen::Matrix<double, Eigen::Dynamic, 3>;

inline NodalField cross_rows(const NodalField& a, const NodalField& b) {
  NodalField out(a.rows(), 3);
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    out.row(j) = Eigen::Vector3d(a.row(j)).cross(Eigen::Vector3d(b.row(j)));
  }
  return out;
}

// Mass-weighted L2 pairing: sum_j mu_j a_j . b_j
inline double lumped_dot(const Eigen::VectorXd& mass, const NodalField& a,
                         const NodalField& b) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    s += mass(j) * a.row(j).dot(b.row(j));
  }
  return s;
}

inline double lumped_norm_sq(const Eigen::VectorXd& mass, const NodalField& a) {
  return lumped_dot(mass, a, a);
}

// Discrete L4 norm to the fourth power: sum_j mu_j |a_j|^4
inline double lumped_l4_pow4(const Eigen::VectorXd& mass, const NodalField& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    const double n2 = a.row(j).squaredNorm();
    s += mass(j) * n2 * n2;
  }
  return s;
}

inline void normalize_rows(NodalField& a) {
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    a.row(j) /= a.row(j).norm();
  }
}

// Per-path seed derivation: splitmix64-style mix of (base seed, path index).
// Adding paths to an ensemble never perturbs the streams of existing paths.
inline std::uint64_t path_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sllg
