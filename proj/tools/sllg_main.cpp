#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sllg/config.hpp"
#include "sllg/experiments.hpp"
#include "sllg/io.hpp"

namespace {

using namespace sllg;

// exit codes: 0 success / all tests pass, 1 statistical or monotonicity
// failure, 2 config error, 3 runtime failure
constexpr int kExitOk = 0;
constexpr int kExitTestFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeFailure = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

std::string hash_hex(const RunConfig& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

int load(const CommonOpts& opts, RunConfig& cfg) {
  ConfigParseResult parsed = parse_config_file(opts.config_path);
  if (!parsed.ok()) {
    std::cerr << "config errors in " << opts.config_path << ":\n";
    for (const auto& e : parsed.errors) std::cerr << "  " << e << "\n";
    return kExitConfigError;
  }
  cfg = parsed.config;
  return kExitOk;
}

struct Problem {
  Mesh mesh;
  NoiseModel noise;
  NodalField m0;
};

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.mesh = build_mesh(cfg.mesh);
  p.noise = build_noise(p.mesh, cfg.noise.modes, cfg.noise.decay,
                        cfg.noise.amplitude);
  p.m0 = init_state(cfg.init, p.mesh);
  return p;
}

int cmd_run(const CommonOpts& opts) {
  RunConfig cfg;
  if (int rc = load(opts, cfg)) return rc;
  const std::uint64_t seed = opts.seed_set ? opts.seed : cfg.mc.base_seed;
  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);

  Manifest manifest;
  manifest.command = "run";
  manifest.config_hash_hex = hash_hex(cfg);
  manifest.seed = seed;
  manifest.version = artifact_version();

  try {
    Problem p = build_problem(cfg);
    Trajectory traj =
        run_path(p.mesh, p.noise, cfg.scheme, p.m0, cfg.solver,
                 path_seed(seed, 0), cfg.output.snapshot_stride);

    const std::string traj_path = opts.out_dir + "/trajectory.csv";
    write_trajectory_csv(traj_path, traj);
    manifest.outputs.push_back("trajectory.csv");
    const std::string final_path = opts.out_dir + "/final_state.csv";
    write_field_csv(final_path, traj.final_m);
    manifest.outputs.push_back("final_state.csv");
    if (cfg.output.vtk) {
      for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        char name[64];
        std::snprintf(name, sizeof(name), "m_%06d.vtk",
                      traj.snapshot_steps[s]);
        write_field_vtk(opts.out_dir + "/" + name, p.mesh, traj.snapshots[s],
                        "m");
        manifest.outputs.push_back(name);
      }
    }
    manifest.partial = !traj.completed;
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    if (!traj.completed) {
      std::cerr << "path aborted at step " << traj.failed_step << ": "
                << traj.error << "\n";
      return kExitRuntimeFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    manifest.partial = true;
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    return kExitRuntimeFailure;
  }
  return kExitOk;
}

int cmd_ensemble(const CommonOpts& opts, int paths_override) {
  RunConfig cfg;
  if (int rc = load(opts, cfg)) return rc;
  if (paths_override > 0) cfg.mc.paths = paths_override;
  const std::uint64_t seed = opts.seed_set ? opts.seed : cfg.mc.base_seed;
  std::filesystem::create_directories(opts.out_dir);

  Manifest manifest;
  manifest.command = "ensemble";
  manifest.config_hash_hex = hash_hex(cfg);
  manifest.seed = seed;
  manifest.version = artifact_version();

  try {
    Problem p = build_problem(cfg);
    EnsembleStats stats =
        run_ensemble(p.mesh, p.noise, cfg.scheme, p.m0, cfg.solver,
                     cfg.mc.paths, seed, opts.threads);

    write_ensemble_csv(opts.out_dir + "/ensemble.csv", stats);
    manifest.outputs.push_back("ensemble.csv");

    nlohmann::json j;
    j["paths"] = stats.paths;
    j["failures"] = stats.failures;
    j["max_mean_energy"] = stats.max_mean_energy;
    j["sum_v_minus_A_sq"] = {{"mean", stats.sum_v_minus_A_sq.mean},
                             {"half_width", stats.sum_v_minus_A_sq.half_width}};
    j["sum_v_sq"] = {{"mean", stats.sum_v_sq.mean},
                     {"half_width", stats.sum_v_sq.half_width}};
    j["sum_grad_v_sq"] = {{"mean", stats.sum_grad_v_sq.mean},
                          {"half_width", stats.sum_grad_v_sq.half_width}};
    std::ofstream out(opts.out_dir + "/summary.json");
    out << j.dump(2) << '\n';
    manifest.outputs.push_back("summary.json");
    manifest.partial = stats.failures > 0;
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    if (stats.failures > 0) return kExitRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "ensemble failed: " << e.what() << "\n";
    manifest.partial = true;
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    return kExitRuntimeFailure;
  }
  return kExitOk;
}

int cmd_converge(const CommonOpts& opts, int levels, int paths_override) {
  RunConfig cfg;
  if (int rc = load(opts, cfg)) return rc;
  const int M = paths_override > 0 ? paths_override : 8;
  const std::uint64_t seed = opts.seed_set ? opts.seed : cfg.mc.base_seed;
  std::filesystem::create_directories(opts.out_dir);

  Manifest manifest;
  manifest.command = "converge";
  manifest.config_hash_hex = hash_hex(cfg);
  manifest.seed = seed;
  manifest.version = artifact_version();

  try {
    Problem p = build_problem(cfg);
    ConvergenceReport report =
        run_convergence(p.mesh, p.noise, cfg.scheme, p.m0, cfg.solver, levels,
                        M, seed, opts.threads);

    write_convergence_csv(opts.out_dir + "/convergence.csv", report);
    manifest.outputs.push_back("convergence.csv");
    nlohmann::json j;
    j["monotone"] = report.monotone;
    j["ladder_N"] = report.ladder_N;
    j["d"] = report.d;
    j["order"] = report.order;  // reported, not asserted
    std::ofstream out(opts.out_dir + "/summary.json");
    out << j.dump(2) << '\n';
    manifest.outputs.push_back("summary.json");
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    if (!report.monotone) {
      std::cerr << "coupled differences are not strictly decreasing\n";
      return kExitTestFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "converge failed: " << e.what() << "\n";
    manifest.partial = true;
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    return kExitRuntimeFailure;
  }
  return kExitOk;
}

int cmd_noise_check(const CommonOpts& opts, int paths_override, int probes) {
  RunConfig cfg;
  if (int rc = load(opts, cfg)) return rc;
  const int M = paths_override > 0 ? paths_override : 10000;
  const std::uint64_t seed = opts.seed_set ? opts.seed : cfg.mc.base_seed;
  std::filesystem::create_directories(opts.out_dir);

  Manifest manifest;
  manifest.command = "noise-check";
  manifest.config_hash_hex = hash_hex(cfg);
  manifest.seed = seed;
  manifest.version = artifact_version();

  try {
    Problem p = build_problem(cfg);
    std::vector<NodalField> probe_fields = default_probes(p.mesh);
    if (probes > 0 && probes < static_cast<int>(probe_fields.size())) {
      probe_fields.resize(probes);
    }
    NoiseCheckReport report = noise_check(p.mesh, p.noise, cfg.scheme.dt(), M,
                                          seed, probe_fields);

    nlohmann::json j;
    j["pass"] = report.pass;
    j["max_component_mean"] = report.max_component_mean;
    j["component_mean_bound"] = report.component_mean_bound;
    j["probes"] = nlohmann::json::array();
    for (const auto& s : report.probes) {
      j["probes"].push_back({{"mean", s.mean.mean},
                             {"mean_half_width", s.mean.half_width},
                             {"sample_variance", s.sample_variance},
                             {"expected_variance", s.expected_variance},
                             {"variance_half_width", s.variance_half_width},
                             {"pass", s.pass}});
    }
    std::ofstream out(opts.out_dir + "/noise_check.json");
    out << j.dump(2) << '\n';
    manifest.outputs.push_back("noise_check.json");
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    if (!report.pass) {
      std::cerr << "noise covariance check failed\n";
      return kExitTestFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "noise-check failed: " << e.what() << "\n";
    manifest.partial = true;
    write_manifest(opts.out_dir + "/manifest.json", manifest);
    return kExitRuntimeFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearly implicit tangent-plane theta-scheme for the "
               "stochastic Landau-Lifshitz-Gilbert equation"};
  app.require_subcommand(1);

  CommonOpts opts;
  int levels = 4;
  int paths = 0;
  int probes = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "configuration file")
        ->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "base seed (overrides mc.base_seed)")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--threads", opts.threads, "worker threads");
  };

  CLI::App* run = app.add_subcommand("run", "single trajectory");
  add_common(run);
  CLI::App* ens = app.add_subcommand("ensemble", "Monte Carlo ensemble");
  add_common(ens);
  ens->add_option("--paths", paths, "number of paths (overrides mc.paths)");
  CLI::App* conv =
      app.add_subcommand("converge", "coupled-path self-convergence ladder");
  add_common(conv);
  conv->add_option("--levels", levels, "ladder levels (>= 3)");
  conv->add_option("--paths", paths, "paths per level");
  CLI::App* nc =
      app.add_subcommand("noise-check", "Wiener increment covariance check");
  add_common(nc);
  nc->add_option("--paths", paths, "number of sampled increments");
  nc->add_option("--probes", probes, "number of probe fields (1-3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  if (run->parsed()) return cmd_run(opts);
  if (ens->parsed()) return cmd_ensemble(opts, paths);
  if (conv->parsed()) return cmd_converge(opts, levels, paths);
  if (nc->parsed()) return cmd_noise_check(opts, paths, probes);
  return kExitConfigError;
}
