#include "osmoflow/evolution.hpp"

#include <cmath>

#include "osmoflow/errors.hpp"

namespace osmoflow {

Mode mode_from_string(const std::string& name) {
  if (name == "full") return Mode::Full;
  if (name == "osmosis") return Mode::Osmosis;
  if (name == "impermeable") return Mode::Impermeable;
  if (name == "fast_diffusion") return Mode::FastDiffusion;
  if (name == "fast_diffusion_noflow") return Mode::FastDiffusionNoFlow;
  throw ConfigError("unknown mode '" + name + "'");
}

std::string mode_to_string(Mode m) {
  switch (m) {
    case Mode::Full: return "full";
    case Mode::Osmosis: return "osmosis";
    case Mode::Impermeable: return "impermeable";
    case Mode::FastDiffusion: return "fast_diffusion";
    case Mode::FastDiffusionNoFlow: return "fast_diffusion_noflow";
  }
  return "?";
}

bool mode_has_flow(Mode m) {
  return m == Mode::Full || m == Mode::Impermeable || m == Mode::FastDiffusion;
}

bool mode_has_transport(Mode m) {
  return m == Mode::Full || m == Mode::Osmosis || m == Mode::Impermeable;
}

namespace {

// Periodic tridiagonal solve (diag b, off-diagonals -beta_j on both sides of
// row j) via the usual rank-one correction of the open-chain solve.
Eigen::ArrayXd cyclic_solve(const Eigen::ArrayXd& beta, const Eigen::ArrayXd& rhs) {
  const int n = int(rhs.size());
  Eigen::ArrayXd b = 1.0 + 2.0 * beta;
  const double corner_top = -beta[0];        // A(0, n-1)
  const double corner_bot = -beta[n - 1];    // A(n-1, 0)
  const double gamma = -b[0];

  auto thomas = [&](const Eigen::ArrayXd& bb, Eigen::ArrayXd r) {
    Eigen::ArrayXd d = bb;
    for (int i = 1; i < n; ++i) {
      const double m = -beta[i] / d[i - 1];
      d[i] -= m * -beta[i - 1];
      r[i] -= m * r[i - 1];
    }
    r[n - 1] /= d[n - 1];
    for (int i = n - 2; i >= 0; --i) r[i] = (r[i] + beta[i] * r[i + 1]) / d[i];
    return r;
  };

  Eigen::ArrayXd bb = b;
  bb[0] -= gamma;
  bb[n - 1] -= corner_top * corner_bot / gamma;
  Eigen::ArrayXd x = thomas(bb, rhs);
  Eigen::ArrayXd u = Eigen::ArrayXd::Zero(n);
  u[0] = gamma;
  u[n - 1] = corner_bot;
  Eigen::ArrayXd z = thomas(bb, u);
  const double fact = (x[0] + corner_top * x[n - 1] / gamma) /
                      (1.0 + z[0] + corner_top * z[n - 1] / gamma);
  return x - fact * z;
}

InteriorVector zero_field(int n_s, int n_phi) {
  InteriorVector v;
  v.x = Eigen::MatrixXd::Zero(n_s, n_phi);
  v.y = Eigen::MatrixXd::Zero(n_s, n_phi);
  return v;
}

}  // namespace

Processes evaluate_processes(const SimState& state, const EvolutionOptions& opts) {
  state.curve.require_valid();
  const int n_phi = state.curve.n();
  const int n_s = int(state.xi.rows());
  if (state.xi.cols() != n_phi)
    throw ConfigError("state: concentration grid does not match the curve");

  Processes pr;
  pr.H = curvature(state.curve, opts.scheme);
  pr.Lambda = normal_velocity_factor(state.curve, opts.scheme);
  pr.meas = measures(state.curve, opts.scheme);
  pr.map = build_domain_map(state.curve, nullptr, n_s, opts.scheme);

  if (mode_has_flow(state.mode)) {
    BoundaryVector nrm = normal(state.curve, opts.scheme);
    BoundaryVector traction(2, n_phi);
    for (int j = 0; j < n_phi; ++j) traction.col(j) = state.kappa * pr.H[j] * nrm.col(j);
    StokesOptions sopts;
    sopts.solvability_tol = opts.solvability_tol;
    sopts.scheme = opts.scheme;
    pr.stokes = solve_traction(state.curve, traction, pr.map, sopts);
    pr.velocity = pr.stokes->interior_velocity;
  } else {
    pr.velocity = zero_field(n_s, n_phi);
  }

  // Boundary concentration entering the law: the trace, or the uniform value
  // in the fast-diffusion limits.
  BoundaryScalar c_b(n_phi);
  if (mode_has_transport(state.mode)) {
    c_b = state.xi.row(n_s - 1).transpose().array();
  } else {
    c_b.setConstant(solute_mass(pr.map, state.xi) / pr.meas.area);
  }

  BoundaryVector nrm = normal(state.curve, opts.scheme);
  pr.V_n = BoundaryScalar::Zero(n_phi);
  for (int j = 0; j < n_phi; ++j) {
    double un = 0.0;
    if (mode_has_flow(state.mode)) {
      un = pr.velocity.x(n_s - 1, j) * nrm(0, j) + pr.velocity.y(n_s - 1, j) * nrm(1, j);
    }
    switch (state.mode) {
      case Mode::Full: pr.V_n[j] = state.kappa * pr.H[j] + c_b[j] + un; break;
      case Mode::Osmosis: pr.V_n[j] = state.kappa * pr.H[j] + c_b[j]; break;
      case Mode::Impermeable: pr.V_n[j] = un; break;
      case Mode::FastDiffusion: pr.V_n[j] = state.kappa * pr.H[j] + c_b[j] + un; break;
      case Mode::FastDiffusionNoFlow: pr.V_n[j] = state.kappa * pr.H[j] + c_b[j]; break;
    }
  }
  pr.max_Vn = pr.V_n.abs().maxCoeff();
  return pr;
}

DiagnosticsRecord diagnostics_of(const SimState& state, const Processes& pr) {
  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.area = pr.meas.area;
  rec.perimeter = pr.meas.perimeter;
  rec.mass = solute_mass(pr.map, state.xi);
  rec.energy = energy(pr.map, state.xi, state.kappa);
  const InteriorVector* u = mode_has_flow(state.mode) ? &pr.velocity : nullptr;
  DissipationBreakdown d = dissipation(pr.map, state.xi, u, pr.H, state.kappa, &pr.V_n);
  if (state.mode == Mode::Impermeable) {
    // No solute passes the membrane; that dissipation channel is absent.
    d.total -= d.membrane;
    d.membrane = 0.0;
  }
  rec.diss_solute = d.solute;
  rec.diss_viscous = d.viscous;
  rec.diss_membrane = d.membrane;
  rec.diss_total = d.total;
  rec.min_c = state.xi.minCoeff();
  rec.max_c = state.xi.maxCoeff();
  rec.min_r = state.curve.r.minCoeff();
  return rec;
}

double variational_residual(double e_prev, double e_cur, double psi_prev, double psi_cur,
                            double dt, double floor) {
  const double dEdt = (e_cur - e_prev) / dt;
  return std::abs(dEdt + (psi_prev + psi_cur)) / std::max(std::abs(dEdt), floor);
}

StepResult advance(const SimState& state, const Processes& pr, double dt_request,
                   double dt_max, const EvolutionOptions& opts) {
  const int n_phi = state.curve.n();
  const int n_s = int(state.xi.rows());
  const double h = 2.0 * M_PI / n_phi;

  double dt = dt_request;
  if (dt <= 0.0) {
    dt = opts.dt_factor * h * h;
    if (pr.max_Vn > 0.0) dt = std::min(dt, opts.dt_factor * h / pr.max_Vn);
  }
  dt = std::min(dt, dt_max);
  if (!(dt > 0.0)) throw ConfigError("advance: nonpositive time step");

  if (!mode_has_transport(state.mode)) {
    // Fast-diffusion limits: the concentration is algebraic (M/|Omega|), so
    // the whole step is an ODE for the curve; explicit Heun keeps it second
    // order in time, and the automatic step obeys the explicit curvature
    // stability bound dt <= h^2/2 with margin.
    const double mass = solute_mass(pr.map, state.xi);
    auto check = [&](const Eigen::ArrayXd& r, double t) {
      if (r.minCoeff() < opts.r_floor || !r.isFinite().all())
        throw StarShapeLoss("boundary radius fell below " + std::to_string(opts.r_floor) +
                            " at t = " + std::to_string(t));
    };
    auto uniform_fill = [&](SimState& st) {
      DomainMap m = build_domain_map(st.curve, nullptr, n_s, opts.scheme);
      const double cells = solute_mass(m, InteriorScalar::Ones(n_s, n_phi));
      st.xi = InteriorScalar::Constant(n_s, n_phi, mass / cells);
    };
    const Eigen::ArrayXd d1 = dt * pr.Lambda * pr.V_n;
    SimState mid = state;
    mid.t = state.t + dt;
    mid.curve.r = state.curve.r + d1;
    check(mid.curve.r, mid.t);
    uniform_fill(mid);
    Processes pr2 = evaluate_processes(mid, opts);
    const Eigen::ArrayXd d2 = dt * pr2.Lambda * pr2.V_n;
    SimState next = state;
    next.t = state.t + dt;
    next.curve.r = state.curve.r + 0.5 * (d1 + d2);
    check(next.curve.r, next.t);
    uniform_fill(next);
    return {next, dt};
  }

  // Curve update, the curvature part of V_n taken semi-implicitly:
  // (I - dt kappa Lambda a D2) delta = dt Lambda V_n, a = r/(r^2+r'^2)^{3/2}.
  // The impermeable mode has no explicit curvature term in V_n.
  auto curve_delta = [&](double step) {
    Eigen::ArrayXd rhs = step * pr.Lambda * pr.V_n;
    if (state.mode != Mode::Impermeable && state.kappa > 0.0) {
      const Eigen::ArrayXd speed2 = pr.map.r * pr.map.r + pr.map.dr * pr.map.dr;
      const Eigen::ArrayXd a = pr.map.r / (speed2 * speed2.sqrt());
      const Eigen::ArrayXd beta = step * state.kappa * pr.Lambda * a / (h * h);
      return cyclic_solve(beta, rhs);
    }
    return rhs;
  };

  Eigen::ArrayXd delta = curve_delta(dt);
  if (dt_request <= 0.0 && mode_has_transport(state.mode)) {
    // Shrink the automatic step to the advective guard of the transport
    // scheme. The relative speed depends on the mesh rate delta/dt, which is
    // nearly step independent, so one or two passes settle it.
    for (int pass = 0; pass < 4; ++pass) {
      double vmax = 0.0;
      const Eigen::ArrayXd rate = delta / dt;
      for (int i = 0; i < n_s; ++i) {
        const double s = double(i) / (n_s - 1);
        for (int j = 0; j < n_phi; ++j) {
          const double p = 2.0 * M_PI * j / n_phi;
          const double wx = s * rate[j] * std::cos(p);
          const double wy = s * rate[j] * std::sin(p);
          vmax = std::max(vmax, std::hypot(pr.velocity.x(i, j) - wx,
                                           pr.velocity.y(i, j) - wy));
        }
      }
      if (vmax <= 0.0) break;
      const double bound =
          opts.cfl_factor * (1.0 / (n_s - 1)) * state.curve.r.minCoeff() / vmax;
      if (dt <= bound) break;
      dt = 0.9 * bound;
      delta = curve_delta(dt);
    }
  }

  SimState next = state;
  next.t = state.t + dt;
  next.curve.r = state.curve.r + delta;
  if (next.curve.r.minCoeff() < opts.r_floor || !next.curve.r.isFinite().all())
    throw StarShapeLoss("boundary radius fell below " + std::to_string(opts.r_floor) +
                        " at t = " + std::to_string(next.t));

  const Eigen::ArrayXd rate = delta / dt;
  DomainMap map_old = build_domain_map(state.curve, &rate, n_s, opts.scheme);
  DomainMap map_new = build_domain_map(next.curve, nullptr, n_s, opts.scheme);

  TransportInput in;
  in.map_old = &map_old;
  in.map_new = &map_new;
  in.velocity = mode_has_flow(state.mode) ? &pr.velocity : nullptr;
  in.cfl_factor = opts.cfl_factor;
  next.xi = transport_step(state.xi, dt, in);

  return {next, dt};
}

StepResult step_coupled(const SimState& state, double dt_request,
                        const EvolutionOptions& opts, double dt_max) {
  return advance(state, evaluate_processes(state, opts), dt_request, dt_max, opts);
}

RunResult run(const RunParams& params,
              const std::function<void(const SimState&, const DiagnosticsRecord&)>&
                  on_record) {
  RunResult res;
  SimState st = params.initial;
  const EvolutionOptions& opts = params.options;
  double prev_energy = 0.0, prev_psi = 0.0, prev_dt = 0.0;
  bool have_prev = false;
  bool first = true;

  try {
    while (true) {
      Processes pr = evaluate_processes(st, opts);
      DiagnosticsRecord rec;
      if (first && params.initial_record) {
        rec = *params.initial_record;
      } else {
        rec = diagnostics_of(st, pr);
        rec.dt_used = prev_dt;
        if (have_prev)
          rec.var_residual = variational_residual(prev_energy, rec.energy, prev_psi,
                                                  rec.diss_total, prev_dt,
                                                  opts.var_residual_floor);
      }
      first = false;
      res.records.push_back(rec);
      if (on_record) on_record(st, rec);

      if (st.t >= params.t_final - 1e-12) break;
      StepResult sr = advance(st, pr, params.dt, params.t_final - st.t, opts);
      prev_energy = rec.energy;
      prev_psi = rec.diss_total;
      prev_dt = sr.dt_used;
      have_prev = true;
      st = sr.state;
    }
    res.completed = true;
  } catch (const SimulationError& e) {
    res.error = e.what();
  }
  res.final_state = st;
  return res;
}

}  // namespace osmoflow
