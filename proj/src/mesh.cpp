#include "sllg/mesh.hpp"

#include <stdexcept>

namespace sllg {

namespace {

Mesh build_interval(const MeshConfig& cfg) {
  const int n = cfg.nodes_x;
  const double L = cfg.extent_x;
  const double h = L / (n - 1);

  Mesh mesh;
  mesh.dimension = 1;
  mesh.domain_measure = L;
  mesh.node_coords.resize(n, 1);
  for (int i = 0; i < n; ++i) mesh.node_coords(i, 0) = i * h;

  mesh.lumped_mass = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * (n - 1));
  for (int e = 0; e < n - 1; ++e) {
    mesh.elements.push_back({e, e + 1, -1});
    mesh.lumped_mass(e) += 0.5 * h;
    mesh.lumped_mass(e + 1) += 0.5 * h;
    const double k = 1.0 / h;
    trip.emplace_back(e, e, k);
    trip.emplace_back(e + 1, e + 1, k);
    trip.emplace_back(e, e + 1, -k);
    trip.emplace_back(e + 1, e, -k);
  }
  mesh.stiffness.resize(n, n);
  mesh.stiffness.setFromTriplets(trip.begin(), trip.end());
  return mesh;
}

Mesh build_rectangle(const MeshConfig& cfg) {
  const int nx = cfg.nodes_x;
  const int ny = cfg.nodes_y;
  const double hx = cfg.extent_x / (nx - 1);
  const double hy = cfg.extent_y / (ny - 1);
  const int n = nx * ny;

  Mesh mesh;
  mesh.dimension = 2;
  mesh.domain_measure = cfg.extent_x * cfg.extent_y;
  mesh.node_coords.resize(n, 2);
  auto id = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.node_coords(id(i, j), 0) = i * hx;
      mesh.node_coords(id(i, j), 1) = j * hy;
    }
  }

  mesh.lumped_mass = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;

  // P1 stiffness on triangle (p0,p1,p2): K_ab = area * grad(phi_a).grad(phi_b)
  auto add_triangle = [&](int v0, int v1, int v2) {
    mesh.elements.push_back({v0, v1, v2});
    const int vs[3] = {v0, v1, v2};
    Eigen::Vector2d p[3];
    for (int a = 0; a < 3; ++a) p[a] = mesh.node_coords.row(vs[a]).transpose();
    const Eigen::Vector2d e1 = p[1] - p[0], e2 = p[2] - p[0];
    const double det = e1.x() * e2.y() - e1.y() * e2.x();
    const double area = 0.5 * std::abs(det);
    Eigen::Vector2d grad[3];
    grad[1] = Eigen::Vector2d(e2.y(), -e2.x()) / det;
    grad[2] = Eigen::Vector2d(-e1.y(), e1.x()) / det;
    grad[0] = -grad[1] - grad[2];
    for (int a = 0; a < 3; ++a) {
      mesh.lumped_mass(vs[a]) += area / 3.0;
      for (int b = 0; b < 3; ++b) {
        trip.emplace_back(vs[a], vs[b], area * grad[a].dot(grad[b]));
      }
    }
  };

  // Uniform right-triangle split: nonobtuse elements, so nodal renormalization
  // does not increase the discrete Dirichlet energy.
  for (int j = 0; j < ny - 1; ++j) {
    for (int i = 0; i < nx - 1; ++i) {
      add_triangle(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      add_triangle(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
  }
  mesh.stiffness.resize(n, n);
  mesh.stiffness.setFromTriplets(trip.begin(), trip.end());
  return mesh;
}

}  // namespace

Mesh build_mesh(const MeshConfig& cfg) {
  if (cfg.dimension != 1 && cfg.dimension != 2) {
    throw std::invalid_argument("mesh: dimension must be 1 or 2");
  }
  if (cfg.extent_x <= 0.0 || (cfg.dimension == 2 && cfg.extent_y <= 0.0)) {
    throw std::invalid_argument("mesh: domain extents must be positive");
  }
  if (cfg.nodes_x < 2 || (cfg.dimension == 2 && cfg.nodes_y < 2)) {
    throw std::invalid_argument("mesh: need at least 2 nodes per axis");
  }
  return cfg.dimension == 1 ? build_interval(cfg) : build_rectangle(cfg);
}

double grad_pair(const Mesh& mesh, const NodalField& a, const NodalField& b) {
  if (a.rows() != mesh.num_nodes() || b.rows() != mesh.num_nodes()) {
    throw std::invalid_argument("grad_pair: field/mesh dimension mismatch");
  }
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    s += b.col(c).dot(mesh.stiffness * a.col(c));
  }
  return s;
}

double dirichlet_energy(const NodalField& m, const Mesh& mesh) {
  return grad_pair(mesh, m, m);
}

}  // namespace sllg
