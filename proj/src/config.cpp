#include "sllg/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sllg {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Parser {
  std::map<std::string, std::string> kv;
  std::vector<std::string>* errors;

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  void get_double(const std::string& key, double& out) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      size_t pos = 0;
      out = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
    } catch (...) {
      errors->push_back(key + ": not a number: '" + it->second + "'");
    }
  }

  void get_int(const std::string& key, int& out) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      size_t pos = 0;
      out = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
    } catch (...) {
      errors->push_back(key + ": not an integer: '" + it->second + "'");
    }
  }

  void get_u64(const std::string& key, std::uint64_t& out) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      size_t pos = 0;
      out = std::stoull(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
    } catch (...) {
      errors->push_back(key + ": not an unsigned integer: '" + it->second + "'");
    }
  }

  void get_bool(const std::string& key, bool& out) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    if (it->second == "true") {
      out = true;
    } else if (it->second == "false") {
      out = false;
    } else {
      errors->push_back(key + ": expected true or false");
    }
  }

  void get_string(const std::string& key, std::string& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = it->second;
  }
};

const char* const kKnownKeys[] = {
    "mesh.dimension",     "mesh.extent_x",   "mesh.extent_y",
    "mesh.nodes_x",       "mesh.nodes_y",    "scheme.T",
    "scheme.N",           "scheme.theta",    "noise.modes",
    "noise.decay",        "noise.amplitude", "init.kind",
    "init.value",         "init.path",       "solver.method",
    "solver.tol",         "solver.max_iter", "mc.paths",
    "mc.base_seed",       "output.snapshot_stride", "output.vtk",
};

}  // namespace

ConfigParseResult parse_config(const std::string& text) {
  ConfigParseResult result;
  auto& errors = result.errors;
  RunConfig& cfg = result.config;

  Parser p;
  p.errors = &errors;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) +
                       ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool known = false;
    for (const char* k : kKnownKeys) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      errors.push_back(key + ": unknown key");
      continue;
    }
    if (p.kv.count(key)) {
      errors.push_back(key + ": duplicate key");
      continue;
    }
    p.kv[key] = value;
  }

  p.get_int("mesh.dimension", cfg.mesh.dimension);
  p.get_double("mesh.extent_x", cfg.mesh.extent_x);
  p.get_double("mesh.extent_y", cfg.mesh.extent_y);
  p.get_int("mesh.nodes_x", cfg.mesh.nodes_x);
  p.get_int("mesh.nodes_y", cfg.mesh.nodes_y);
  p.get_double("scheme.T", cfg.scheme.T);
  p.get_int("scheme.N", cfg.scheme.N);
  p.get_double("scheme.theta", cfg.scheme.theta);
  p.get_int("noise.modes", cfg.noise.modes);
  p.get_double("noise.decay", cfg.noise.decay);
  p.get_double("noise.amplitude", cfg.noise.amplitude);
  p.get_double("solver.tol", cfg.solver.tol);
  p.get_int("solver.max_iter", cfg.solver.max_iter);
  p.get_int("mc.paths", cfg.mc.paths);
  p.get_u64("mc.base_seed", cfg.mc.base_seed);
  p.get_int("output.snapshot_stride", cfg.output.snapshot_stride);
  p.get_bool("output.vtk", cfg.output.vtk);

  std::string init_kind = "constant";
  p.get_string("init.kind", init_kind);
  if (init_kind == "constant") {
    cfg.init.kind = InitSpec::Kind::Constant;
  } else if (init_kind == "rotation") {
    cfg.init.kind = InitSpec::Kind::Rotation;
  } else if (init_kind == "file") {
    cfg.init.kind = InitSpec::Kind::File;
  } else {
    errors.push_back("init.kind: must be constant, rotation, or file");
  }
  if (p.has("init.value")) {
    std::string v;
    p.get_string("init.value", v);
    std::istringstream vs(v);
    double a, b, c;
    char c1, c2;
    vs >> a >> c1 >> b >> c2 >> c;
    if (!vs || c1 != ',' || c2 != ',') {
      errors.push_back("init.value: expected 'x,y,z'");
    } else {
      cfg.init.value = Eigen::Vector3d(a, b, c);
    }
  }
  p.get_string("init.path", cfg.init.path);

  std::string method = "direct";
  p.get_string("solver.method", method);
  if (method == "direct") {
    cfg.solver.method = SolverConfig::Method::Direct;
  } else if (method == "iterative") {
    cfg.solver.method = SolverConfig::Method::Iterative;
  } else {
    errors.push_back("solver.method: must be direct or iterative");
  }

  // range validation (collect every violation)
  if (cfg.mesh.dimension != 1 && cfg.mesh.dimension != 2) {
    errors.push_back("mesh.dimension: must be 1 or 2");
  }
  if (cfg.mesh.extent_x <= 0.0) errors.push_back("mesh.extent_x: must be > 0");
  if (cfg.mesh.dimension == 2 && cfg.mesh.extent_y <= 0.0) {
    errors.push_back("mesh.extent_y: must be > 0");
  }
  if (cfg.mesh.nodes_x < 2) errors.push_back("mesh.nodes_x: must be >= 2");
  if (cfg.mesh.dimension == 2 && cfg.mesh.nodes_y < 2) {
    errors.push_back("mesh.nodes_y: must be >= 2");
  }
  if (cfg.scheme.T <= 0.0) errors.push_back("scheme.T: must be > 0");
  if (cfg.scheme.N < 1) errors.push_back("scheme.N: must be >= 1");
  if (!(cfg.scheme.theta > 0.5 && cfg.scheme.theta <= 1.0)) {
    errors.push_back(
        "scheme.theta: must lie in the open-closed interval (1/2, 1]; the "
        "boundary value 1/2 is excluded");
  }
  if (cfg.noise.modes < 0) errors.push_back("noise.modes: must be >= 0");
  if (cfg.noise.decay <= 0.0) errors.push_back("noise.decay: must be > 0");
  if (cfg.noise.amplitude < 0.0) {
    errors.push_back("noise.amplitude: must be >= 0");
  }
  if (cfg.solver.tol <= 0.0) errors.push_back("solver.tol: must be > 0");
  if (cfg.solver.max_iter < 0) errors.push_back("solver.max_iter: must be >= 0");
  if (cfg.mc.paths < 1) errors.push_back("mc.paths: must be >= 1");
  if (cfg.output.snapshot_stride < 0) {
    errors.push_back("output.snapshot_stride: must be >= 0");
  }
  if (cfg.init.kind == InitSpec::Kind::File && cfg.init.path.empty()) {
    errors.push_back("init.path: required when init.kind = file");
  }
  return result;
}

ConfigParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigParseResult r;
    r.errors.push_back("config: cannot open " + path);
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "mesh.dimension = " << cfg.mesh.dimension << "\n";
  out << "mesh.extent_x = " << fmt_double(cfg.mesh.extent_x) << "\n";
  out << "mesh.extent_y = " << fmt_double(cfg.mesh.extent_y) << "\n";
  out << "mesh.nodes_x = " << cfg.mesh.nodes_x << "\n";
  out << "mesh.nodes_y = " << cfg.mesh.nodes_y << "\n";
  out << "scheme.T = " << fmt_double(cfg.scheme.T) << "\n";
  out << "scheme.N = " << cfg.scheme.N << "\n";
  out << "scheme.theta = " << fmt_double(cfg.scheme.theta) << "\n";
  out << "noise.modes = " << cfg.noise.modes << "\n";
  out << "noise.decay = " << fmt_double(cfg.noise.decay) << "\n";
  out << "noise.amplitude = " << fmt_double(cfg.noise.amplitude) << "\n";
  switch (cfg.init.kind) {
    case InitSpec::Kind::Constant:
      out << "init.kind = constant\n";
      out << "init.value = " << fmt_double(cfg.init.value(0)) << ","
          << fmt_double(cfg.init.value(1)) << ","
          << fmt_double(cfg.init.value(2)) << "\n";
      break;
    case InitSpec::Kind::Rotation:
      out << "init.kind = rotation\n";
      break;
    case InitSpec::Kind::File:
      out << "init.kind = file\n";
      out << "init.path = " << cfg.init.path << "\n";
      break;
  }
  out << "solver.method = "
      << (cfg.solver.method == SolverConfig::Method::Direct ? "direct"
                                                            : "iterative")
      << "\n";
  out << "solver.tol = " << fmt_double(cfg.solver.tol) << "\n";
  out << "solver.max_iter = " << cfg.solver.max_iter << "\n";
  out << "mc.paths = " << cfg.mc.paths << "\n";
  out << "mc.base_seed = " << cfg.mc.base_seed << "\n";
  out << "output.snapshot_stride = " << cfg.output.snapshot_stride << "\n";
  out << "output.vtk = " << (cfg.output.vtk ? "true" : "false") << "\n";
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sllg
