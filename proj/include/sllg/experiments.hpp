#pragma once

#include <cstdint>
#include <vector>

#include "sllg/stepper.hpp"

namespace sllg {

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 3 sigma of the mean
  bool contains_zero() const { return std::abs(mean) <= half_width; }
};

struct EnsembleStats {
  int paths = 0;
  int failures = 0;
  std::vector<double> t;             // per-step times
  std::vector<double> mean_energy;   // per-step ensemble mean of ||grad m||^2
  std::vector<double> var_energy;
  std::vector<double> energy_half_width;
  Estimate sum_v_minus_A_sq;  // E sum_n ||v^n - A^n||^2
  Estimate sum_v_sq;          // E sum_n ||v^n||^2
  Estimate sum_grad_v_sq;     // E sum_n ||grad v^n||^2
  double max_mean_energy = 0.0;  // max_n mean ||grad m^n||^2
};

// M independent paths with seeds path_seed(base_seed, i); statistics reduced
// in path order, so the result is identical for any thread count.
EnsembleStats run_ensemble(const Mesh& mesh, const NoiseModel& noise,
                           const SchemeParams& params, const NodalField& m0,
                           const SolverConfig& solver, int M,
                           std::uint64_t base_seed, int threads = 1);

struct ConvergenceReport {
  std::vector<int> ladder_N;      // per level, doubling
  std::vector<double> d;          // mean L2(time,space) squared differences
  std::vector<double> order_sq;   // log2(d_k / d_{k+1}) (squared-norm order)
  std::vector<double> order;      // order_sq / 2 (norm order; reported only)
  bool monotone = false;          // d strictly decreasing
};

// Coupled-path self-convergence: the same Brownian path is used at every
// ladder level, coarse increments being exact partial sums of the finest
// ones.  params describes the coarsest level; each level doubles N.
ConvergenceReport run_convergence(const Mesh& mesh, const NoiseModel& noise,
                                  const SchemeParams& params,
                                  const NodalField& m0,
                                  const SolverConfig& solver, int levels,
                                  int M, std::uint64_t base_seed,
                                  int threads = 1);

struct MartingaleReport {
  struct PairStat {
    int n = 0, n_prime = 0;
    int probe_a = 0, probe_b = 0;
    Estimate value;
  };
  std::vector<PairStat> increment_mean;       // E (A^n, a)
  std::vector<PairStat> cross_increment;      // E (A^n, a)(A^m, a), n != m
  std::vector<PairStat> quadratic_variation;  // discrete QV identity defect
  bool pass = false;
};

// Statistical checks of the martingale structure of X_N against fixed probe
// fields.  misadapted_pairing pairs the post-update magnetization with each
// increment, a deliberately broken estimator used as a negative control.
MartingaleReport martingale_diagnostics(const Mesh& mesh,
                                        const NoiseModel& noise,
                                        const SchemeParams& params,
                                        const NodalField& m0,
                                        const SolverConfig& solver, int M,
                                        std::uint64_t base_seed,
                                        const std::vector<NodalField>& probes,
                                        int threads = 1,
                                        bool misadapted_pairing = false);

struct NoiseCheckReport {
  struct ProbeStat {
    Estimate mean;              // sample mean of (GdW, a)
    double sample_variance = 0.0;
    double expected_variance = 0.0;  // dt * sum_i (G_i, a)^2
    double variance_half_width = 0.0;
    bool pass = false;
  };
  std::vector<ProbeStat> probes;
  double max_component_mean = 0.0;
  double component_mean_bound = 0.0;  // 4 (dt sum G_i^2)^{1/2} / sqrt(M)
  bool pass = false;
};

// Covariance check of M sampled increments against direct mode summation.
NoiseCheckReport noise_check(const Mesh& mesh, const NoiseModel& noise,
                             double dt, int M, std::uint64_t seed,
                             const std::vector<NodalField>& probes);

// Default probe set: two constant coordinate fields and a cosine profile.
std::vector<NodalField> default_probes(const Mesh& mesh);

}  // namespace sllg
