#include "sllg/noise.hpp"

#include <algorithm>
#include <stdexcept>

namespace sllg {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SpatialMode {
  int kx = 0, ky = 0;
  double lambda = 0.0;
};

// Neumann Laplacian eigenfunctions on the interval/rectangle: products of
// cosines.  Distinct modes are limited by the grid resolution (aliasing).
std::vector<SpatialMode> spatial_modes(const Mesh& mesh, const MeshConfig*) {
  std::vector<SpatialMode> out;
  if (mesh.dimension == 1) {
    const int nx = mesh.num_nodes();
    const double L = mesh.domain_measure;
    for (int k = 0; k < nx; ++k) {
      out.push_back({k, 0, (k * kPi / L) * (k * kPi / L)});
    }
  } else {
    // recover grid sizes from coordinates
    const double Lx = mesh.node_coords.col(0).maxCoeff();
    const double Ly = mesh.node_coords.col(1).maxCoeff();
    int nx = 0;
    for (int j = 0; j < mesh.num_nodes(); ++j) {
      if (mesh.node_coords(j, 1) == 0.0) ++nx;
    }
    const int ny = mesh.num_nodes() / nx;
    for (int ky = 0; ky < ny; ++ky) {
      for (int kx = 0; kx < nx; ++kx) {
        const double lam = (kx * kPi / Lx) * (kx * kPi / Lx) +
                           (ky * kPi / Ly) * (ky * kPi / Ly);
        out.push_back({kx, ky, lam});
      }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SpatialMode& a, const SpatialMode& b) {
                       return a.lambda < b.lambda;
                     });
  }
  return out;
}

Eigen::VectorXd sample_eigenfunction(const Mesh& mesh, const SpatialMode& sm) {
  const int n = mesh.num_nodes();
  Eigen::VectorXd phi(n);
  if (mesh.dimension == 1) {
    const double L = mesh.domain_measure;
    for (int j = 0; j < n; ++j) {
      phi(j) = std::cos(sm.kx * kPi * mesh.node_coords(j, 0) / L);
    }
  } else {
    const double Lx = mesh.node_coords.col(0).maxCoeff();
    const double Ly = mesh.node_coords.col(1).maxCoeff();
    for (int j = 0; j < n; ++j) {
      phi(j) = std::cos(sm.kx * kPi * mesh.node_coords(j, 0) / Lx) *
               std::cos(sm.ky * kPi * mesh.node_coords(j, 1) / Ly);
    }
  }
  // normalize in the discrete (lumped) L2 norm so ||G_i|| = g_i exactly
  double nrm2 = 0.0;
  for (int j = 0; j < n; ++j) nrm2 += mesh.lumped_mass(j) * phi(j) * phi(j);
  return phi / std::sqrt(nrm2);
}

}  // namespace

NodalField NoiseModel::mode_field(int i) const {
  NodalField f = NodalField::Zero(basis.rows(), 3);
  f.col(direction[i]) = multiplier(i) * basis.col(i);
  return f;
}

NoiseModel build_noise(const Mesh& mesh, int J, double s, double c) {
  if (J < 0) throw std::invalid_argument("noise: J must be >= 0");
  if (s <= 0.0) throw std::invalid_argument("noise: decay exponent s must be > 0");
  if (c < 0.0) throw std::invalid_argument("noise: amplitude c must be >= 0");

  const auto sm = spatial_modes(mesh, nullptr);
  if (J > 3 * static_cast<int>(sm.size())) {
    throw std::invalid_argument(
        "noise: J exceeds the distinct modes resolvable on this mesh");
  }

  NoiseModel noise;
  noise.modes = J;
  noise.decay_s = s;
  noise.amplitude_c = c;
  noise.basis.resize(mesh.num_nodes(), J);
  noise.direction.resize(J);
  noise.multiplier.resize(J);
  noise.eigenvalue.resize(J);
  noise.hs_norm_sq = 0.0;
  for (int i = 0; i < J; ++i) {
    const SpatialMode& mode = sm[i / 3];
    noise.basis.col(i) = sample_eigenfunction(mesh, mode);
    noise.direction[i] = i % 3;
    noise.eigenvalue(i) = mode.lambda;
    noise.multiplier(i) = c * std::pow(1.0 + mode.lambda, -s);
    const double w = noise.multiplier(i) * (1.0 + mode.lambda);
    noise.hs_norm_sq += w * w;
  }
  return noise;
}

NodalField increment_from_coefficients(const NoiseModel& noise,
                                       const Eigen::VectorXd& coeffs) {
  NodalField out = NodalField::Zero(noise.basis.rows(), 3);
  for (int i = 0; i < noise.modes; ++i) {
    out.col(noise.direction[i]) +=
        coeffs(i) * noise.multiplier(i) * noise.basis.col(i);
  }
  return out;
}

Eigen::VectorXd draw_coefficients(const NoiseModel& noise, NormalSampler& rng,
                                  double dt) {
  Eigen::VectorXd coeffs(noise.modes);
  const double sq = std::sqrt(dt);
  for (int i = 0; i < noise.modes; ++i) coeffs(i) = sq * rng.next();
  return coeffs;
}

WienerIncrement sample_increment(const NoiseModel& noise, NormalSampler& rng,
                                 double dt, int step) {
  if (dt <= 0.0) throw std::invalid_argument("sample_increment: dt must be > 0");
  WienerIncrement inc;
  inc.step = step;
  inc.dt = dt;
  inc.values = increment_from_coefficients(noise, draw_coefficients(noise, rng, dt));
  return inc;
}

NodalField ito_correction(const NoiseModel& noise, const NodalField& m) {
  if (m.rows() != noise.basis.rows()) {
    throw std::invalid_argument("ito_correction: field/mesh mismatch");
  }
  NodalField out = NodalField::Zero(m.rows(), 3);
  for (int i = 0; i < noise.modes; ++i) {
    const int d = noise.direction[i];
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      g(d) = noise.multiplier(i) * noise.basis(j, i);
      const Eigen::Vector3d mj = m.row(j);
      out.row(j) += (mj.cross(g)).cross(g).transpose();
    }
  }
  return out;
}

NodalField apply_G(const NoiseModel& noise, const Mesh& mesh,
                   const NodalField& a) {
  NodalField out = NodalField::Zero(a.rows(), 3);
  for (int i = 0; i < noise.modes; ++i) {
    const int d = noise.direction[i];
    double proj = 0.0;
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      proj += mesh.lumped_mass(j) * noise.basis(j, i) * a(j, d);
    }
    out.col(d) += noise.multiplier(i) * proj * noise.basis.col(i);
  }
  return out;
}

}  // namespace sllg
