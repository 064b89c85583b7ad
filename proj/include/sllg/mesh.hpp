#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "sllg/field.hpp"

namespace sllg {

struct MeshConfig {
  int dimension = 1;
  double extent_x = 1.0;
  double extent_y = 1.0;
  int nodes_x = 64;
  int nodes_y = 2;
};

// P1 discretization of an interval (1D) or a rectangle split into right
// triangles (2D), with natural Neumann boundary conditions.  The mass matrix
// is lumped, so L2 pairings reduce to mass-weighted nodal dot products.
// Immutable after construction.
struct Mesh {
  int dimension = 1;
  Eigen::MatrixXd node_coords;                 // n x dimension
  std::vector<std::array<int, 3>> elements;    // 1D segments use slots 0,1 (slot 2 = -1)
  Eigen::VectorXd lumped_mass;                 // strictly positive, sums to |D|
  Eigen::SparseMatrix<double> stiffness;       // symmetric PSD, K*1 = 0
  double domain_measure = 0.0;

  int num_nodes() const { return static_cast<int>(node_coords.rows()); }
};

// Throws std::invalid_argument on nonpositive extents or node counts < 2.
Mesh build_mesh(const MeshConfig& config);

// sum_c a_c^T K b_c over the three vector components
double grad_pair(const Mesh& mesh, const NodalField& a, const NodalField& b);

// Discrete Dirichlet energy sum_c m_c^T K m_c; zero iff m nodally constant.
double dirichlet_energy(const NodalField& m, const Mesh& mesh);

}  // namespace sllg
