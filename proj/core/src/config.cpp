#include "osmoflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "osmoflow/transport.hpp"

namespace osmoflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': cannot parse '" + v + "' as a number");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ParseError("key '" + key + "': expected an integer");
  return int(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ParseError("key '" + key + "': cannot parse '" + v + "' as a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  cfg.source_text = text;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> setters;
  auto num = [&](const std::string& sec, const std::string& key, double* p) {
    setters[sec + "." + key] = [p](const std::string& k, const std::string& v) {
      *p = to_double(k, v);
    };
  };
  auto integer = [&](const std::string& sec, const std::string& key, int* p) {
    setters[sec + "." + key] = [p](const std::string& k, const std::string& v) {
      *p = to_int(k, v);
    };
  };
  auto str = [&](const std::string& sec, const std::string& key, std::string* p) {
    setters[sec + "." + key] = [p](const std::string&, const std::string& v) { *p = v; };
  };
  auto boolean = [&](const std::string& sec, const std::string& key, bool* p) {
    setters[sec + "." + key] = [p](const std::string& k, const std::string& v) {
      *p = to_bool(k, v);
    };
  };
  auto list = [&](const std::string& sec, const std::string& key, std::vector<double>* p) {
    setters[sec + "." + key] = [p](const std::string& k, const std::string& v) {
      *p = to_list(k, v);
    };
  };

  str("run", "mode", &cfg.mode);
  num("run", "kappa", &cfg.kappa);
  integer("run", "n_phi", &cfg.n_phi);
  integer("run", "n_s", &cfg.n_s);
  num("run", "dt", &cfg.dt);
  num("run", "t_final", &cfg.t_final);
  num("run", "dt_factor", &cfg.dt_factor);
  str("run", "derivative_scheme", &cfg.derivative_scheme);
  integer("run", "oracle_n_s", &cfg.oracle_n_s);
  num("run", "oracle_dt", &cfg.oracle_dt);

  str("initial", "shape", &cfg.shape);
  num("initial", "radius", &cfg.radius);
  num("initial", "a", &cfg.a);
  num("initial", "b", &cfg.b);
  num("initial", "base", &cfg.base);
  list("initial", "cos_coeffs", &cfg.cos_coeffs);
  list("initial", "sin_coeffs", &cfg.sin_coeffs);
  str("initial", "concentration", &cfg.concentration);
  num("initial", "value", &cfg.value);
  num("initial", "amplitude", &cfg.amplitude);
  num("initial", "width", &cfg.width);
  num("initial", "center_x", &cfg.center_x);
  num("initial", "center_y", &cfg.center_y);
  num("initial", "background", &cfg.background);

  str("tolerances", "i2_policy", &cfg.i2_policy);
  num("tolerances", "i2_tol", &cfg.i2_tol);
  num("tolerances", "i2_projection_dt", &cfg.i2_projection_dt);
  num("tolerances", "solvability_tol", &cfg.solvability_tol);
  num("tolerances", "r_floor", &cfg.r_floor);
  num("tolerances", "c_floor", &cfg.c_floor);
  num("tolerances", "cfl_factor", &cfg.cfl_factor);

  str("output", "out_dir", &cfg.out_dir);
  num("output", "snapshot_interval", &cfg.snapshot_interval);
  boolean("output", "emit_svg", &cfg.emit_svg);

  const std::vector<std::string> sections = {"run", "initial", "tolerances", "output"};
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw ValidationError("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ParseError("line " + std::to_string(lineno) + ": key outside any section");
    auto it = setters.find(section + "." + key);
    if (it == setters.end())
      throw ValidationError("unknown key '" + key + "' in section [" + section + "]");
    it->second(key, value);
  }

  // Range and consistency checks.
  mode_from_string(cfg.mode);  // throws on unknown names
  scheme_from_string(cfg.derivative_scheme);
  if (cfg.kappa < 0.0) throw ValidationError("kappa must be nonnegative");
  if (cfg.n_phi < 8 || cfg.n_phi % 2 != 0)
    throw ValidationError("n_phi must be even and at least 8");
  if (cfg.n_s < 4) throw ValidationError("n_s must be at least 4");
  if (cfg.dt < 0.0) throw ValidationError("dt must be nonnegative");
  if (cfg.t_final < 0.0) throw ValidationError("t_final must be nonnegative");
  if (cfg.dt_factor <= 0.0) throw ValidationError("dt_factor must be positive");
  if (cfg.oracle_n_s < 3) throw ValidationError("oracle_n_s must be at least 3");
  if (cfg.shape != "circle" && cfg.shape != "ellipse" && cfg.shape != "fourier")
    throw ValidationError("unknown shape '" + cfg.shape + "'");
  if (cfg.radius <= 0.0 || cfg.a <= 0.0 || cfg.b <= 0.0 || cfg.base <= 0.0)
    throw ValidationError("shape dimensions must be positive");
  if (cfg.concentration != "uniform" && cfg.concentration != "equilibrium" &&
      cfg.concentration != "gaussian")
    throw ValidationError("unknown concentration preset '" + cfg.concentration + "'");
  if (cfg.value < 0.0 || cfg.background < 0.0 || cfg.amplitude < 0.0)
    throw ValidationError("concentration levels must be nonnegative");
  if (cfg.width <= 0.0) throw ValidationError("width must be positive");
  if (cfg.i2_policy != "project" && cfg.i2_policy != "reject")
    throw ValidationError("i2_policy must be 'project' or 'reject'");
  if (cfg.i2_tol <= 0.0 || cfg.i2_projection_dt <= 0.0)
    throw ValidationError("i2 tolerances must be positive");
  if (cfg.r_floor <= 0.0) throw ValidationError("r_floor must be positive");
  if (cfg.c_floor < 0.0) throw ValidationError("c_floor must be nonnegative");
  if (cfg.cfl_factor <= 0.0) throw ValidationError("cfl_factor must be positive");
  if (cfg.snapshot_interval < 0.0)
    throw ValidationError("snapshot_interval must be nonnegative");
  if (cfg.concentration == "equilibrium" && cfg.shape != "circle")
    throw ValidationError("the equilibrium concentration preset requires a circle");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

DerivScheme scheme_from_string(const std::string& name) {
  if (name == "fd4") return DerivScheme::Fd4;
  if (name == "spectral") return DerivScheme::Spectral;
  throw ValidationError("unknown derivative_scheme '" + name + "'");
}

InitialData prepare_initial(const RunConfig& cfg) {
  InitialData init;
  if (cfg.shape == "circle") {
    init.curve = PolarCurve::circle(cfg.radius, cfg.n_phi);
  } else if (cfg.shape == "ellipse") {
    init.curve = PolarCurve::ellipse(cfg.a, cfg.b, cfg.n_phi);
  } else {
    Eigen::ArrayXd cc = Eigen::Map<const Eigen::ArrayXd>(
        cfg.cos_coeffs.data(), long(cfg.cos_coeffs.size()));
    Eigen::ArrayXd sc = Eigen::Map<const Eigen::ArrayXd>(
        cfg.sin_coeffs.data(), long(cfg.sin_coeffs.size()));
    init.curve = PolarCurve::fourier(cfg.base, cc, sc, cfg.n_phi);
  }
  if (!init.curve.valid())
    throw ValidationError("configured shape is not a valid star-shaped curve");

  const DerivScheme scheme = scheme_from_string(cfg.derivative_scheme);
  DomainMap map = build_domain_map(init.curve, nullptr, cfg.n_s, scheme);
  init.xi.resize(cfg.n_s, cfg.n_phi);
  if (cfg.concentration == "uniform") {
    init.xi.setConstant(cfg.value);
  } else if (cfg.concentration == "equilibrium") {
    init.xi.setConstant(cfg.kappa / cfg.radius);
  } else {
    for (int i = 0; i < cfg.n_s; ++i) {
      for (int j = 0; j < cfg.n_phi; ++j) {
        const Eigen::Vector2d x = map.position(i, j);
        const double dx = x[0] - cfg.center_x, dy = x[1] - cfg.center_y;
        init.xi(i, j) = cfg.background +
                        cfg.amplitude *
                            std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.width * cfg.width));
      }
    }
  }

  const bool identically_zero = init.xi.cwiseAbs().maxCoeff() == 0.0;
  if (!identically_zero && init.xi.minCoeff() < cfg.c_floor)
    throw ValidationError("initial concentration falls below c_floor");

  // The compatibility condition is the Robin membrane condition, or plain
  // zero flux in the impermeable mode.
  const bool robin = mode_from_string(cfg.mode) != Mode::Impermeable;
  BoundaryScalar H = curvature(init.curve, scheme);
  const double scale = 1.0 + init.xi.cwiseAbs().maxCoeff();
  auto defect = [&](const InteriorScalar& c) {
    if (robin) return membrane_bc_residual(c, H, map, cfg.kappa).abs().maxCoeff();
    return normal_derivative(map, c).abs().maxCoeff();
  };
  init.i2_residual_raw = defect(init.xi);
  init.i2_residual_final = init.i2_residual_raw;
  if (init.i2_residual_raw > cfg.i2_tol * scale) {
    if (cfg.i2_policy == "reject")
      throw I2Error("initial data violates the membrane compatibility condition: residual " +
                    std::to_string(init.i2_residual_raw));
    init.xi = project_initial_data(init.xi, map, H, cfg.kappa, cfg.i2_projection_dt,
                                   cfg.i2_tol, 50, robin);
    init.projected = true;
    init.i2_residual_final = defect(init.xi);
  }
  return init;
}

SimState make_state(const RunConfig& cfg, const InitialData& init) {
  SimState st;
  st.t = 0.0;
  st.kappa = cfg.kappa;
  st.mode = mode_from_string(cfg.mode);
  st.curve = init.curve;
  st.xi = init.xi;
  return st;
}

EvolutionOptions make_options(const RunConfig& cfg) {
  EvolutionOptions opts;
  opts.scheme = scheme_from_string(cfg.derivative_scheme);
  opts.dt_factor = cfg.dt_factor;
  opts.r_floor = cfg.r_floor;
  opts.cfl_factor = cfg.cfl_factor;
  opts.solvability_tol = cfg.solvability_tol;
  return opts;
}

}  // namespace osmoflow
