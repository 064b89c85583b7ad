#include "sllg/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sllg {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << "step,t,energy,norm_v_sq,norm_v_minus_A_sq,norm_grad_v_sq,residual\n";
  for (const auto& d : traj.steps) {
    out << d.step << ',' << fmt17(d.t) << ',' << fmt17(d.energy) << ','
        << fmt17(d.norm_v_sq) << ',' << fmt17(d.norm_v_minus_A_sq) << ','
        << fmt17(d.norm_grad_v_sq) << ',' << fmt17(d.residual_identity)
        << '\n';
  }
}

void write_ensemble_csv(const std::string& path, const EnsembleStats& stats) {
  std::ofstream out = open_out(path);
  out << "step,t,mean_energy,var_energy,energy_half_width\n";
  for (size_t n = 0; n < stats.t.size(); ++n) {
    out << n << ',' << fmt17(stats.t[n]) << ',' << fmt17(stats.mean_energy[n])
        << ',' << fmt17(stats.var_energy[n]) << ','
        << fmt17(stats.energy_half_width[n]) << '\n';
  }
}

void write_convergence_csv(const std::string& path,
                           const ConvergenceReport& report) {
  std::ofstream out = open_out(path);
  out << "level,N,d,order_sq,order\n";
  for (size_t l = 0; l < report.ladder_N.size(); ++l) {
    out << l << ',' << report.ladder_N[l] << ',';
    out << (l < report.d.size() ? fmt17(report.d[l]) : "");
    out << ',';
    out << (l < report.order_sq.size() ? fmt17(report.order_sq[l]) : "");
    out << ',';
    out << (l < report.order.size() ? fmt17(report.order[l]) : "");
    out << '\n';
  }
}

void write_field_csv(const std::string& path, const NodalField& field) {
  std::ofstream out = open_out(path);
  for (Eigen::Index j = 0; j < field.rows(); ++j) {
    out << fmt17(field(j, 0)) << ',' << fmt17(field(j, 1)) << ','
        << fmt17(field(j, 2)) << '\n';
  }
}

NodalField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<Eigen::Vector3d> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Eigen::Vector3d v;
    char comma;
    ss >> v(0) >> comma >> v(1) >> comma >> v(2);
    if (!ss) throw std::runtime_error("malformed field row in " + path);
    rows.push_back(v);
  }
  NodalField f(static_cast<Eigen::Index>(rows.size()), 3);
  for (size_t j = 0; j < rows.size(); ++j) {
    f.row(static_cast<Eigen::Index>(j)) = rows[j];
  }
  return f;
}

void write_field_vtk(const std::string& path, const Mesh& mesh,
                     const NodalField& field, const std::string& name) {
  std::ofstream out = open_out(path);
  const int n = mesh.num_nodes();
  out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\n";
  out << "DATASET POLYDATA\nPOINTS " << n << " double\n";
  for (int j = 0; j < n; ++j) {
    out << mesh.node_coords(j, 0) << ' '
        << (mesh.dimension > 1 ? mesh.node_coords(j, 1) : 0.0) << " 0\n";
  }
  out << "POINT_DATA " << n << "\nVECTORS " << name << " double\n";
  for (int j = 0; j < n; ++j) {
    out << field(j, 0) << ' ' << field(j, 1) << ' ' << field(j, 2) << '\n';
  }
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config_hash"] = manifest.config_hash_hex;
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["partial"] = manifest.partial;
  j["outputs"] = manifest.outputs;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace sllg
