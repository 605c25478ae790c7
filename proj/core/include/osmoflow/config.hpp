#pragma once

#include <string>
#include <vector>

#include "osmoflow/errors.hpp"
#include "osmoflow/evolution.hpp"

namespace osmoflow {

// Malformed file (bad syntax, unreadable numbers).
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

// Well-formed file with unacceptable content (unknown keys, bad ranges).
struct ValidationError : ConfigError {
  using ConfigError::ConfigError;
};

// Initial data fails the membrane compatibility check under policy "reject".
struct I2Error : ConfigError {
  using ConfigError::ConfigError;
};

// INI-style file with sections [run], [initial], [tolerances], [output].
// Unknown sections or keys are rejected.
struct RunConfig {
  // [run]
  std::string mode = "full";
  double kappa = 1.0;
  int n_phi = 128;
  int n_s = 128;
  double dt = 0.0;  // 0 selects the automatic step
  double t_final = 1.0;
  double dt_factor = 0.25;
  std::string derivative_scheme = "fd4";  // fd4 | spectral
  int oracle_n_s = 1024;
  double oracle_dt = 0.0;  // 0 selects the grid spacing

  // [initial]
  std::string shape = "circle";  // circle | ellipse | fourier
  double radius = 1.0;
  double a = 1.5, b = 1.0;  // ellipse semi-axes
  double base = 1.0;        // fourier mean radius
  std::vector<double> cos_coeffs, sin_coeffs;
  std::string concentration = "uniform";  // uniform | equilibrium | gaussian
  double value = 1.0;                     // uniform level
  double amplitude = 0.5, width = 0.25;   // gaussian bump
  double center_x = 0.0, center_y = 0.0;
  double background = 0.5;

  // [tolerances]
  std::string i2_policy = "project";  // project | reject
  double i2_tol = 1e-6;
  double i2_projection_dt = 1e-3;
  double solvability_tol = 1e-8;
  double r_floor = 1e-3;
  double c_floor = 0.0;
  double cfl_factor = 1.0;

  // [output]
  std::string out_dir = "out";
  double snapshot_interval = 0.0;  // 0: only the final snapshot
  bool emit_svg = false;

  std::string source_text;  // verbatim file contents, echoed into snapshots
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

DerivScheme scheme_from_string(const std::string& name);

struct InitialData {
  PolarCurve curve;
  InteriorScalar xi;
  double i2_residual_raw = 0.0;    // compatibility defect of the sampled data
  double i2_residual_final = 0.0;  // after projection, when applied
  bool projected = false;
};

// Samples the configured shape and concentration and applies the I2 policy.
InitialData prepare_initial(const RunConfig& cfg);

SimState make_state(const RunConfig& cfg, const InitialData& init);
EvolutionOptions make_options(const RunConfig& cfg);

}  // namespace osmoflow
