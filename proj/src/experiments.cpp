#include "sllg/experiments.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sllg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Runs fn(i) for i in [0, M) on the requested number of threads.  Each call
// writes only to its own result slot, so scheduling order does not matter.
template <typename F>
void parallel_paths(int M, int threads, F&& fn) {
  if (threads <= 1 || M <= 1) {
    for (int i = 0; i < M; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error = nullptr;
  std::mutex error_mutex;
  const int workers = std::min(threads, M);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < M; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Estimate estimate_from_samples(const std::vector<double>& x) {
  Estimate e;
  const int n = static_cast<int>(x.size());
  if (n == 0) return e;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var = n > 1 ? var / (n - 1) : 0.0;
  e.mean = mean;
  e.half_width = 3.0 * std::sqrt(var / n);
  return e;
}

}  // namespace

std::vector<NodalField> default_probes(const Mesh& mesh) {
  const int n = mesh.num_nodes();
  std::vector<NodalField> probes;
  NodalField p0 = NodalField::Zero(n, 3);
  p0.col(2).setOnes();
  NodalField p1 = NodalField::Zero(n, 3);
  p1.col(0).setOnes();
  NodalField p2 = NodalField::Zero(n, 3);
  const double L = mesh.node_coords.col(0).maxCoeff();
  for (int j = 0; j < n; ++j) {
    p2(j, 1) = std::cos(kPi * mesh.node_coords(j, 0) / L);
  }
  probes.push_back(std::move(p0));
  probes.push_back(std::move(p1));
  probes.push_back(std::move(p2));
  return probes;
}

EnsembleStats run_ensemble(const Mesh& mesh, const NoiseModel& noise,
                           const SchemeParams& params, const NodalField& m0,
                           const SolverConfig& solver, int M,
                           std::uint64_t base_seed, int threads) {
  if (M < 2) throw std::invalid_argument("run_ensemble: need M >= 2");

  struct PathResult {
    bool ok = false;
    std::vector<double> energy;
    double sum_vA = 0.0, sum_v = 0.0, sum_gv = 0.0;
  };
  std::vector<PathResult> results(M);

  parallel_paths(M, threads, [&](int i) {
    Trajectory traj = run_path(mesh, noise, params, m0, solver,
                               path_seed(base_seed, i));
    PathResult& r = results[i];
    r.ok = traj.completed;
    if (!traj.completed) return;
    r.energy.reserve(params.N);
    for (const auto& d : traj.steps) {
      r.energy.push_back(d.energy);
      r.sum_vA += d.norm_v_minus_A_sq;
      r.sum_v += d.norm_v_sq;
      r.sum_gv += d.norm_grad_v_sq;
    }
  });

  EnsembleStats stats;
  stats.paths = M;
  std::vector<double> s_vA, s_v, s_gv;
  for (const auto& r : results) {
    if (!r.ok) {
      ++stats.failures;
      continue;
    }
    s_vA.push_back(r.sum_vA);
    s_v.push_back(r.sum_v);
    s_gv.push_back(r.sum_gv);
  }
  const int survivors = M - stats.failures;
  if (survivors == 0) throw std::runtime_error("run_ensemble: all paths failed");

  const double dt = params.dt();
  stats.t.resize(params.N);
  stats.mean_energy.assign(params.N, 0.0);
  stats.var_energy.assign(params.N, 0.0);
  stats.energy_half_width.assign(params.N, 0.0);
  for (int n = 0; n < params.N; ++n) {
    stats.t[n] = (n + 1) * dt;
    double mean = 0.0;
    for (const auto& r : results) {
      if (r.ok) mean += r.energy[n];
    }
    mean /= survivors;
    double var = 0.0;
    for (const auto& r : results) {
      if (r.ok) var += (r.energy[n] - mean) * (r.energy[n] - mean);
    }
    var = survivors > 1 ? var / (survivors - 1) : 0.0;
    stats.mean_energy[n] = mean;
    stats.var_energy[n] = var;
    stats.energy_half_width[n] = 3.0 * std::sqrt(var / survivors);
    stats.max_mean_energy = std::max(stats.max_mean_energy, mean);
  }
  stats.sum_v_minus_A_sq = estimate_from_samples(s_vA);
  stats.sum_v_sq = estimate_from_samples(s_v);
  stats.sum_grad_v_sq = estimate_from_samples(s_gv);
  return stats;
}

ConvergenceReport run_convergence(const Mesh& mesh, const NoiseModel& noise,
                                  const SchemeParams& params,
                                  const NodalField& m0,
                                  const SolverConfig& solver, int levels,
                                  int M, std::uint64_t base_seed,
                                  int threads) {
  if (levels < 3) throw std::invalid_argument("run_convergence: need >= 3 levels");
  if (M < 1) throw std::invalid_argument("run_convergence: need M >= 1");

  const int N0 = params.N;
  const int N_fine = N0 << (levels - 1);
  const double dt_fine = params.T / N_fine;
  const int J = noise.modes;

  // one row of squared differences per path, levels-1 entries
  std::vector<std::vector<double>> diffs(M,
                                         std::vector<double>(levels - 1, 0.0));

  parallel_paths(M, threads, [&](int i) {
    // Finest-level coefficients drawn first, in the same step-major,
    // mode-minor order as run_path; coarse rows are exact partial sums.
    NormalSampler rng(path_seed(base_seed, i));
    Eigen::MatrixXd fine(N_fine, J);
    const double sq = std::sqrt(dt_fine);
    for (int n = 0; n < N_fine; ++n) {
      for (int k = 0; k < J; ++k) fine(n, k) = sq * rng.next();
    }

    std::vector<Trajectory> trajs(levels);
    for (int l = 0; l < levels; ++l) {
      const int Nl = N0 << l;
      const int ratio = N_fine / Nl;
      Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(Nl, J);
      for (int n = 0; n < Nl; ++n) {
        for (int r = 0; r < ratio; ++r) coeffs.row(n) += fine.row(n * ratio + r);
      }
      SchemeParams pl = params;
      pl.N = Nl;
      trajs[l] = run_path_with_coefficients(mesh, noise, pl, m0, solver,
                                            coeffs, /*snapshot_stride=*/1);
      if (!trajs[l].completed) {
        throw std::runtime_error("run_convergence: path failed at level " +
                                 std::to_string(l));
      }
    }

    // L2([0,T] x D)^2 difference of the piecewise constant trajectories,
    // evaluated on the finest time grid.
    for (int l = 0; l + 1 < levels; ++l) {
      const int ra = N_fine / (N0 << l);
      const int rb = N_fine / (N0 << (l + 1));
      double acc = 0.0;
      for (int k = 0; k < N_fine; ++k) {
        const NodalField& ma = trajs[l].snapshots[k / ra];
        const NodalField& mb = trajs[l + 1].snapshots[k / rb];
        acc += dt_fine * lumped_norm_sq(mesh.lumped_mass, ma - mb);
      }
      diffs[i][l] = acc;
    }
  });

  ConvergenceReport report;
  for (int l = 0; l < levels; ++l) report.ladder_N.push_back(N0 << l);
  for (int l = 0; l + 1 < levels; ++l) {
    double mean = 0.0;
    for (int i = 0; i < M; ++i) mean += diffs[i][l];
    report.d.push_back(mean / M);
  }
  report.monotone = true;
  for (size_t k = 0; k + 1 < report.d.size(); ++k) {
    if (!(report.d[k + 1] < report.d[k])) report.monotone = false;
    const double os = std::log2(report.d[k] / report.d[k + 1]);
    report.order_sq.push_back(os);
    report.order.push_back(0.5 * os);
  }
  return report;
}

MartingaleReport martingale_diagnostics(const Mesh& mesh,
                                        const NoiseModel& noise,
                                        const SchemeParams& params,
                                        const NodalField& m0,
                                        const SolverConfig& solver, int M,
                                        std::uint64_t base_seed,
                                        const std::vector<NodalField>& probes,
                                        int threads, bool misadapted_pairing) {
  const int N = params.N;
  const int P = static_cast<int>(probes.size());
  const double dt = params.dt();
  if (P == 0) throw std::invalid_argument("martingale_diagnostics: no probes");

  std::vector<NodalField> G_mode(noise.modes);
  for (int k = 0; k < noise.modes; ++k) G_mode[k] = noise.mode_field(k);

  const int q = std::max(1, N / 4);
  struct QvPair {
    int n, np, pa, pb;
  };
  std::vector<QvPair> qv_pairs;
  for (int p = 0; p < P; ++p) {
    qv_pairs.push_back({0, q, p, p});
    qv_pairs.push_back({q, std::min(2 * q, N), p, p});
    qv_pairs.push_back({0, N, p, p});
  }
  if (P >= 2) qv_pairs.push_back({0, N, 0, 1});

  struct CrossPair {
    int n, m, p;
  };
  std::vector<CrossPair> cross_pairs;
  const int steps_used[3] = {0, std::min(q, N - 1), N - 1};
  for (int p = 0; p < P; ++p) {
    cross_pairs.push_back({steps_used[0], steps_used[2], p});
    if (steps_used[1] != steps_used[0] && steps_used[1] != steps_used[2]) {
      cross_pairs.push_back({steps_used[0], steps_used[1], p});
      cross_pairs.push_back({steps_used[1], steps_used[2], p});
    }
  }

  const int n_mean = P * 3;
  const int n_cross = static_cast<int>(cross_pairs.size());
  const int n_qv = static_cast<int>(qv_pairs.size());
  std::vector<std::vector<double>> mean_s(n_mean, std::vector<double>(M));
  std::vector<std::vector<double>> cross_s(n_cross, std::vector<double>(M));
  std::vector<std::vector<double>> qv_s(n_qv, std::vector<double>(M));

  parallel_paths(M, threads, [&](int i) {
    NormalSampler rng(path_seed(base_seed, i));
    NodalField m = m0;
    NodalField X = NodalField::Zero(m0.rows(), 3);

    // per-step records
    std::vector<std::vector<double>> A_probe(P, std::vector<double>(N, 0.0));
    // running QV compensator per probe pair, recorded at every step boundary
    Eigen::MatrixXd qv_run(P * P, N + 1);
    qv_run.col(0).setZero();
    std::vector<std::vector<double>> X_probe(P, std::vector<double>(N + 1, 0.0));

    for (int n = 0; n < N; ++n) {
      // conditional covariance of ((A,a),(A,b)) given m: dt sum_i s_ia s_ib
      // with s_ip = (m x G_i, probe_p)
      Eigen::MatrixXd s(noise.modes, P);
      for (int k = 0; k < noise.modes; ++k) {
        const NodalField mxG = cross_rows(m, G_mode[k]);
        for (int p = 0; p < P; ++p) {
          s(k, p) = lumped_dot(mesh.lumped_mass, mxG, probes[p]);
        }
      }
      for (int pa = 0; pa < P; ++pa) {
        for (int pb = 0; pb < P; ++pb) {
          qv_run(pa * P + pb, n + 1) =
              qv_run(pa * P + pb, n) + dt * s.col(pa).dot(s.col(pb));
        }
      }
      const NodalField dW =
          increment_from_coefficients(noise, draw_coefficients(noise, rng, dt));
      StepResult res = step(m, dW, noise, mesh, params, solver, n);
      NodalField A = misadapted_pairing ? cross_rows(res.m_next, dW)
                                        : std::move(res.A);
      X += A;
      for (int p = 0; p < P; ++p) {
        A_probe[p][n] = lumped_dot(mesh.lumped_mass, A, probes[p]);
        X_probe[p][n + 1] = lumped_dot(mesh.lumped_mass, X, probes[p]);
      }
      m = std::move(res.m_next);
    }

    for (int p = 0; p < P; ++p) {
      for (int k = 0; k < 3; ++k) {
        mean_s[p * 3 + k][i] = A_probe[p][steps_used[k]];
      }
    }
    for (int c = 0; c < n_cross; ++c) {
      const CrossPair& cp = cross_pairs[c];
      cross_s[c][i] = A_probe[cp.p][cp.n] * A_probe[cp.p][cp.m];
    }
    for (int c = 0; c < n_qv; ++c) {
      const QvPair& qp = qv_pairs[c];
      qv_s[c][i] =
          X_probe[qp.pa][qp.np] * X_probe[qp.pb][qp.np] -
          X_probe[qp.pa][qp.n] * X_probe[qp.pb][qp.n] -
          (qv_run(qp.pa * P + qp.pb, qp.np) - qv_run(qp.pa * P + qp.pb, qp.n));
    }
  });

  MartingaleReport report;
  report.pass = true;
  for (int p = 0; p < P; ++p) {
    for (int k = 0; k < 3; ++k) {
      MartingaleReport::PairStat s;
      s.n = steps_used[k];
      s.n_prime = steps_used[k];
      s.probe_a = p;
      s.probe_b = p;
      s.value = estimate_from_samples(mean_s[p * 3 + k]);
      report.pass = report.pass && s.value.contains_zero();
      report.increment_mean.push_back(s);
    }
  }
  for (int c = 0; c < n_cross; ++c) {
    MartingaleReport::PairStat s;
    s.n = cross_pairs[c].n;
    s.n_prime = cross_pairs[c].m;
    s.probe_a = cross_pairs[c].p;
    s.probe_b = cross_pairs[c].p;
    s.value = estimate_from_samples(cross_s[c]);
    report.pass = report.pass && s.value.contains_zero();
    report.cross_increment.push_back(s);
  }
  for (int c = 0; c < n_qv; ++c) {
    MartingaleReport::PairStat s;
    s.n = qv_pairs[c].n;
    s.n_prime = qv_pairs[c].np;
    s.probe_a = qv_pairs[c].pa;
    s.probe_b = qv_pairs[c].pb;
    s.value = estimate_from_samples(qv_s[c]);
    report.pass = report.pass && s.value.contains_zero();
    report.quadratic_variation.push_back(s);
  }
  return report;
}

NoiseCheckReport noise_check(const Mesh& mesh, const NoiseModel& noise,
                             double dt, int M, std::uint64_t seed,
                             const std::vector<NodalField>& probes) {
  if (M < 2) throw std::invalid_argument("noise_check: need M >= 2");
  const int P = static_cast<int>(probes.size());
  const int n = mesh.num_nodes();

  NormalSampler rng(seed);
  std::vector<std::vector<double>> samples(P, std::vector<double>(M));
  NodalField comp_mean = NodalField::Zero(n, 3);
  for (int i = 0; i < M; ++i) {
    const NodalField dW =
        increment_from_coefficients(noise, draw_coefficients(noise, rng, dt));
    comp_mean += dW;
    for (int p = 0; p < P; ++p) {
      samples[p][i] = lumped_dot(mesh.lumped_mass, dW, probes[p]);
    }
  }
  comp_mean /= static_cast<double>(M);

  NoiseCheckReport report;
  report.pass = true;

  // nodal-component mean bound: 4 sigma_jc / sqrt(M) by direct mode summation
  double worst_ratio = 0.0;
  double worst_mean = 0.0, worst_bound = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < 3; ++c) {
      double var_jc = 0.0;
      for (int k = 0; k < noise.modes; ++k) {
        if (noise.direction[k] != c) continue;
        const double g = noise.multiplier(k) * noise.basis(j, k);
        var_jc += dt * g * g;
      }
      const double bound = 4.0 * std::sqrt(var_jc / M);
      const double mean = std::abs(comp_mean(j, c));
      const double ratio = bound > 0.0 ? mean / bound : (mean > 0.0 ? 2.0 : 0.0);
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst_mean = mean;
        worst_bound = bound;
      }
    }
  }
  report.max_component_mean = worst_mean;
  report.component_mean_bound = worst_bound;
  if (worst_ratio > 1.0) report.pass = false;

  for (int p = 0; p < P; ++p) {
    NoiseCheckReport::ProbeStat stat;
    stat.mean = estimate_from_samples(samples[p]);
    double mean = 0.0;
    for (double v : samples[p]) mean += v;
    mean /= M;
    double var = 0.0;
    for (double v : samples[p]) var += (v - mean) * (v - mean);
    stat.sample_variance = var / (M - 1);
    double expected = 0.0;
    for (int k = 0; k < noise.modes; ++k) {
      const double gi = lumped_dot(mesh.lumped_mass, noise.mode_field(k),
                                   probes[p]);
      expected += dt * gi * gi;
    }
    stat.expected_variance = expected;
    // absolute floor for probes nearly orthogonal to every mode, where both
    // variances are pure roundoff and a relative band is meaningless
    double sum_g_sq = 0.0;
    for (int k = 0; k < noise.modes; ++k) {
      sum_g_sq += noise.multiplier(k) * noise.multiplier(k);
    }
    const double floor =
        1e-12 * dt * sum_g_sq * lumped_norm_sq(mesh.lumped_mass, probes[p]);
    stat.variance_half_width =
        3.0 * stat.sample_variance * std::sqrt(2.0 / (M - 1)) + floor;
    stat.pass = stat.mean.contains_zero() &&
                std::abs(stat.sample_variance - stat.expected_variance) <=
                    stat.variance_half_width;
    report.pass = report.pass && stat.pass;
    report.probes.push_back(stat);
  }
  return report;
}

}  // namespace sllg
