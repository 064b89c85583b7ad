#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sllg/field.hpp"
#include "sllg/mesh.hpp"

namespace sllg {

// Deterministic standard-normal stream.  Box-Muller with a fixed draw order
// (two raw 64-bit draws per normal, no cached spare), so the number of raw
// draws consumed per sample is part of the reproducibility contract.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

  double next() {
    const double u1 = to_unit(gen_());
    const double u2 = to_unit(gen_());
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  static double to_unit(std::uint64_t x) {
    // (0,1]: never feeds log(0)
    return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
  }
  std::mt19937_64 gen_;
};

// Truncated spectral representation of the covariance factor G.  Modes are
// mass-orthonormalized samples of Neumann Laplacian eigenfunctions (cosines)
// times a coordinate direction, scaled by g_k = c (1 + lambda_k)^(-s).
// Mode i uses spatial eigenfunction i/3 and coordinate direction i%3.
// Immutable after construction.
struct NoiseModel {
  int modes = 0;                 // J; 0 means a deterministic (noise-free) run
  double decay_s = 2.0;
  double amplitude_c = 1.0;
  Eigen::MatrixXd basis;         // n x J scalar samples, discretely normalized
  std::vector<int> direction;    // J entries in {0,1,2}
  Eigen::VectorXd multiplier;    // g_i
  Eigen::VectorXd eigenvalue;    // lambda_i of the underlying eigenfunction
  double hs_norm_sq = 0.0;       // sum g_i^2 (1 + lambda_i)^2

  // Nodal values of G_i = g_i e_i
  NodalField mode_field(int i) const;
};

struct WienerIncrement {
  NodalField values;    // G dW, one R^3 value per node
  int step = 0;
  double dt = 0.0;
};

// Throws if J < 0, s <= 0, c < 0, or J exceeds the distinct modes resolvable
// on the mesh (3 per spatial eigenfunction).
NoiseModel build_noise(const Mesh& mesh, int J, double s, double c);

// G dW = sum_i coeff_i G_i; used directly by the coupled-refinement driver,
// where coarse coefficients are exact sums of fine ones.
NodalField increment_from_coefficients(const NoiseModel& noise,
                                       const Eigen::VectorXd& coeffs);

// Draws the J mode coefficients sqrt(dt) xi_i in index order, consuming
// exactly J normals from the sampler.
Eigen::VectorXd draw_coefficients(const NoiseModel& noise, NormalSampler& rng,
                                  double dt);

WienerIncrement sample_increment(const NoiseModel& noise, NormalSampler& rng,
                                 double dt, int step = 0);

// S(m)_j = sum_i (m_j x G_i(x_j)) x G_i(x_j); the 1/2 factor is applied by
// the caller in the variational right-hand side.
NodalField ito_correction(const NoiseModel& noise, const NodalField& m);

// G applied to a nodal field: Ga = sum_i g_i <e_i, a>_mass e_i.
NodalField apply_G(const NoiseModel& noise, const Mesh& mesh,
                   const NodalField& a);

}  // namespace sllg
