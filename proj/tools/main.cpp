#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "osmoflow/config.hpp"
#include "osmoflow/oracle.hpp"
#include "osmoflow/output.hpp"

namespace fs = std::filesystem;
using namespace osmoflow;

namespace {

// Exit codes: 2 parse, 3 validation, 4 initial-data compatibility, 5 I/O,
// 6 snapshot schema, 1 anything else.
int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return 2;
  if (dynamic_cast<const I2Error*>(&e)) return 4;
  if (dynamic_cast<const ValidationError*>(&e)) return 3;
  if (dynamic_cast<const SchemaError*>(&e)) return 6;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  if (dynamic_cast<const ConfigError*>(&e)) return 3;
  return 1;
}

struct RunFiles {
  DiagnosticsWriter* csv = nullptr;
  RunManifest manifest;
};

bool do_run(RunConfig cfg, const std::string& out_override, bool quiet,
            const std::optional<std::string>& restart) {
  RunParams params;
  if (restart) {
    Snapshot snap = read_snapshot(*restart);
    cfg = parse_config_text(snap.config_text);
    params.initial = snap.state;
    params.initial_record = snap.record;
  } else {
    InitialData init = prepare_initial(cfg);
    params.initial = make_state(cfg, init);
    if (!quiet && init.projected)
      std::printf("initial data projected: compatibility residual %.3e -> %.3e\n",
                  init.i2_residual_raw, init.i2_residual_final);
  }
  const std::string out_dir = out_override.empty() ? cfg.out_dir : out_override;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");
  params.options = make_options(cfg);
  params.dt = cfg.dt;
  params.t_final = cfg.t_final;

  DiagnosticsWriter csv(out_dir + "/diagnostics.csv");
  RunManifest manifest;
  const double interval = cfg.snapshot_interval;
  double next_snap = interval > 0.0
                         ? (std::floor(params.initial.t / interval + 1e-9) + 1.0) * interval
                         : std::numeric_limits<double>::infinity();

  auto on_record = [&](const SimState& st, const DiagnosticsRecord& rec) {
    csv.write(rec);
    if (st.t + 1e-12 >= next_snap && st.t < params.t_final - 1e-12) {
      const int idx = int(std::lround(next_snap / interval));
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%04d.json", idx);
      write_snapshot({st, rec, cfg.derivative_scheme, cfg.source_text},
                     out_dir + "/" + name);
      manifest.snapshots.push_back(name);
      if (cfg.emit_svg) {
        std::snprintf(name, sizeof name, "frame_%04d.svg", idx);
        write_svg_frame(st, out_dir + "/" + name);
      }
      next_snap += interval;
    }
  };

  RunResult res = run(params, on_record);

  write_snapshot({res.final_state, res.records.back(), cfg.derivative_scheme,
                  cfg.source_text},
                 out_dir + "/final.json");
  manifest.snapshots.push_back("final.json");
  if (cfg.emit_svg) write_svg_frame(res.final_state, out_dir + "/final.svg");

  manifest.completed = res.completed;
  manifest.error = res.error;
  manifest.final_time = res.final_state.t;
  manifest.n_records = int(res.records.size());
  write_manifest(manifest, out_dir + "/run_manifest.json");

  if (!quiet) {
    if (res.completed)
      std::printf("run complete: t = %.6g, %d records, out: %s\n", res.final_state.t,
                  manifest.n_records, out_dir.c_str());
    else
      std::fprintf(stderr, "run stopped at t = %.6g: %s\n", res.final_state.t,
                   res.error.c_str());
  }
  return res.completed;
}

double radial_entropy(const RadialState& st) {
  const int n = int(st.c_hat.size());
  const double h = 1.0 / (n - 1);
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = (i == 0) ? 0.0 : (i * h - 0.5 * h);
    const double b = (i == n - 1) ? 1.0 : (i * h + 0.5 * h);
    const double w = 0.5 * (b * b - a * a);
    const double c = st.c_hat[i];
    e += (c > 1e-300 ? c * std::log(c) : 0.0) * w;
  }
  return 2.0 * M_PI * st.R * st.R * e;
}

DiagnosticsRecord radial_record(const RadialState& st, double kappa) {
  const int n = int(st.c_hat.size());
  const double h = 1.0 / (n - 1);
  DiagnosticsRecord rec;
  rec.t = st.t;
  rec.area = M_PI * st.R * st.R;
  rec.perimeter = 2.0 * M_PI * st.R;
  rec.mass = st.mass();
  rec.energy = radial_entropy(st) + kappa * rec.perimeter;
  double ds = 0.0;
  for (int i = 1; i < n; ++i) {  // midpoint gradient quadrature
    const double cs = (st.c_hat[i] - st.c_hat[i - 1]) / h / st.R;
    const double cm = 0.5 * (st.c_hat[i] + st.c_hat[i - 1]);
    const double sm = (i - 0.5) * h;
    if (cm > 1e-14) ds += 0.5 * cs * cs / cm * sm * h;
  }
  rec.diss_solute = 2.0 * M_PI * st.R * st.R * ds;
  rec.diss_viscous = 0.0;
  const double jump = -kappa / st.R + st.c_hat[n - 1];
  rec.diss_membrane = 0.5 * jump * jump * rec.perimeter;
  rec.diss_total = rec.diss_solute + rec.diss_membrane;
  rec.min_c = st.c_hat.minCoeff();
  rec.max_c = st.c_hat.maxCoeff();
  rec.min_r = st.R;
  return rec;
}

int do_oracle(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  if (cfg.shape != "circle")
    throw ValidationError("the radial reference solver requires a circular shape");
  if (cfg.concentration == "gaussian" && (cfg.center_x != 0.0 || cfg.center_y != 0.0))
    throw ValidationError("the radial reference solver requires centered data");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");
  DiagnosticsWriter csv(out_dir + "/diagnostics.csv");

  const Mode mode = mode_from_string(cfg.mode);
  const double c0 = cfg.concentration == "equilibrium" ? cfg.kappa / cfg.radius : cfg.value;

  if (!mode_has_transport(mode)) {
    const double mass = c0 * M_PI * cfg.radius * cfg.radius;
    const double dt = cfg.oracle_dt > 0.0 ? cfg.oracle_dt : 1e-4;
    FastDiffusionResult res = fastdiff_ode(cfg.radius, mass, cfg.kappa, cfg.t_final, dt);
    DiagnosticsRecord prev;
    for (size_t k = 0; k < res.t.size(); ++k) {
      const double R = res.R[k];
      DiagnosticsRecord rec;
      rec.t = res.t[k];
      rec.area = M_PI * R * R;
      rec.perimeter = 2.0 * M_PI * R;
      rec.mass = mass;
      const double c = mass / rec.area;
      rec.energy = (c > 1e-300 ? mass * std::log(c) : 0.0) + cfg.kappa * rec.perimeter;
      const double jump = -cfg.kappa / R + c;
      rec.diss_membrane = 0.5 * jump * jump * rec.perimeter;
      rec.diss_total = rec.diss_membrane;
      rec.min_c = rec.max_c = c;
      rec.min_r = R;
      rec.dt_used = k ? res.t[k] - res.t[k - 1] : 0.0;
      if (k) rec.var_residual = variational_residual(prev.energy, rec.energy,
                                                     prev.diss_total, rec.diss_total,
                                                     rec.dt_used);
      csv.write(rec);
      prev = rec;
    }
    if (!quiet) {
      if (res.extinct)
        std::printf("radius extinct between t = %.10g and %.10g\n", res.extinction_lo,
                    res.extinction_hi);
      else
        std::printf("oracle complete: R(%.6g) = %.12g\n", cfg.t_final, res.R.back());
    }
    return 0;
  }

  if (cfg.concentration == "gaussian")
    throw ValidationError("the radial reference solver supports uniform data only");
  RadialState st = RadialState::uniform(cfg.radius, c0, cfg.kappa, cfg.oracle_n_s);
  const double dt_max = cfg.oracle_dt > 0.0 ? cfg.oracle_dt : 1.0 / (cfg.oracle_n_s - 1);
  DiagnosticsRecord rec = radial_record(st, cfg.kappa);
  csv.write(rec);
  DiagnosticsRecord prev = rec;
  while (st.t < cfg.t_final - 1e-14) {
    const double dt = std::min(dt_max, cfg.t_final - st.t);
    st = radial_step(st, dt);
    rec = radial_record(st, cfg.kappa);
    rec.dt_used = dt;
    rec.var_residual = variational_residual(prev.energy, rec.energy, prev.diss_total,
                                            rec.diss_total, dt);
    csv.write(rec);
    prev = rec;
  }
  if (!quiet)
    std::printf("oracle complete: R(%.6g) = %.12g, boundary c = %.12g\n", cfg.t_final,
                st.R, st.boundary_value());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Osmotically driven moving-boundary flow solver"};
  app.require_subcommand(1);

  std::string config_path, out_override, mode_override, restart_path;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", config_path, "configuration file");
    if (need_config) opt->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };

  auto* cmd_run = app.add_subcommand("run", "advance the coupled system");
  add_common(cmd_run, false);
  cmd_run->add_option("--mode", mode_override, "limit-mode override");
  cmd_run->add_option("--restart", restart_path, "snapshot to continue from");

  auto* cmd_oracle =
      app.add_subcommand("oracle", "radially symmetric reference solution");
  add_common(cmd_oracle, true);

  auto* cmd_validate = app.add_subcommand("validate", "check a configuration file");
  add_common(cmd_validate, true);

  auto* cmd_modes = app.add_subcommand("modes", "list the limit modes");

  auto* cmd_sweep = app.add_subcommand("sweep", "run several configurations");
  std::vector<std::string> sweep_configs;
  cmd_sweep->add_option("configs", sweep_configs, "configuration files")->required();
  cmd_sweep->add_flag("--quiet", quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_modes->parsed()) {
      std::printf("full                   flow, osmosis and diffusion coupled\n");
      std::printf("osmosis                resting solvent, V_n = kappa H + c\n");
      std::printf("impermeable            V_n = u.n, no solute through the membrane\n");
      std::printf("fast_diffusion         c uniform = M/|Omega|, with flow\n");
      std::printf("fast_diffusion_noflow  c uniform = M/|Omega|, resting solvent\n");
      return 0;
    }
    if (cmd_validate->parsed()) {
      RunConfig cfg = load_config(config_path);
      InitialData init = prepare_initial(cfg);
      std::printf("ok: mode %s, %d x %d, compatibility residual %.3e%s\n",
                  cfg.mode.c_str(), cfg.n_s, cfg.n_phi, init.i2_residual_final,
                  init.projected ? " (projected)" : "");
      return 0;
    }
    if (cmd_oracle->parsed()) {
      RunConfig cfg = load_config(config_path);
      const std::string out = out_override.empty() ? cfg.out_dir : out_override;
      return do_oracle(cfg, out, quiet);
    }
    if (cmd_run->parsed()) {
      std::optional<std::string> restart;
      if (!restart_path.empty()) restart = restart_path;
      RunConfig cfg;
      if (restart) {
        if (config_path.empty() && mode_override.empty()) {
          // configuration comes from the snapshot; placeholder until then
        } else if (!mode_override.empty()) {
          throw ValidationError("--mode cannot be combined with --restart");
        }
        if (!config_path.empty()) cfg = load_config(config_path);
      } else {
        if (config_path.empty()) throw ValidationError("run requires --config");
        cfg = load_config(config_path);
        if (!mode_override.empty()) {
          mode_from_string(mode_override);
          cfg.mode = mode_override;
        }
      }
      return do_run(cfg, out_override, quiet, restart) ? 0 : 1;
    }
    if (cmd_sweep->parsed()) {
      int failures = 0;
      for (const auto& path : sweep_configs) {
        try {
          RunConfig cfg = load_config(path);
          if (!do_run(cfg, cfg.out_dir, quiet, std::nullopt)) ++failures;
        } catch (const std::exception& e) {
          std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
          ++failures;
        }
      }
      if (!quiet) std::printf("sweep: %zu runs, %d failures\n", sweep_configs.size(), failures);
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
