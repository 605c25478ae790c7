#include "osmoflow/oracle.hpp"

#include <cmath>

#include "osmoflow/errors.hpp"

namespace osmoflow {

namespace {

// omega_N: measure of the unit sphere S^{N-1}.
inline double sphere_measure(int dim) { return dim == 2 ? 2.0 * M_PI : 4.0 * M_PI; }

// Exact integral of s^{N-1} over the vertex-centered cell around node i.
double cell_weight(int i, int n, double h, int dim) {
  const double a = (i == 0) ? 0.0 : (i * h - 0.5 * h);
  const double b = (i == n - 1) ? 1.0 : (i * h + 0.5 * h);
  return (std::pow(b, dim) - std::pow(a, dim)) / dim;
}

// Face flux divergence: dG_i = G_{i+1/2} - G_{i-1/2} with zero flux at both
// s = 0 (no face) and s = 1 (membrane: diffusive and convective parts cancel
// by the boundary condition, enforced exactly).
Eigen::ArrayXd flux_divergence(const Eigen::ArrayXd& c, double R, double Rdot, double h,
                               int dim) {
  const int n = int(c.size());
  Eigen::ArrayXd div = Eigen::ArrayXd::Zero(n);
  const double dcoef = std::pow(R, dim - 2);
  const double acoef = std::pow(R, dim - 1) * Rdot;
  for (int i = 0; i + 1 < n; ++i) {
    const double sf = (i + 0.5) * h;
    const double G = dcoef * std::pow(sf, dim - 1) * (c[i + 1] - c[i]) / h +
                     acoef * std::pow(sf, dim) * 0.5 * (c[i] + c[i + 1]);
    div[i] += G;
    div[i + 1] -= G;
  }
  return div;
}

void thomas_solve(Eigen::ArrayXd& lo, Eigen::ArrayXd& di, Eigen::ArrayXd& up,
                  Eigen::ArrayXd& rhs) {
  const int n = int(rhs.size());
  for (int i = 1; i < n; ++i) {
    const double m = lo[i] / di[i - 1];
    di[i] -= m * up[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= di[n - 1];
  for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
}

}  // namespace

RadialState RadialState::uniform(double R0, double c0, double kappa, int n_s, int dim) {
  if (R0 <= 0.0 || n_s < 3) throw ConfigError("radial oracle: need R0 > 0 and n_s >= 3");
  RadialState st;
  st.R = R0;
  st.kappa = kappa;
  st.dim = dim;
  st.c_hat = Eigen::ArrayXd::Constant(n_s, c0);
  return st;
}

double RadialState::mass() const {
  const int n = int(c_hat.size());
  const double h = 1.0 / (n - 1);
  double m = 0.0;
  for (int i = 0; i < n; ++i) m += cell_weight(i, n, h, dim) * c_hat[i];
  return sphere_measure(dim) * std::pow(R, dim) * m;
}

RadialState radial_project(const RadialState& state, double dt_reg, double tol,
                           int max_iter) {
  const int n = int(state.c_hat.size());
  const double h = 1.0 / (n - 1);
  const int dim = state.dim;
  const double R = state.R;
  const double kH = -state.kappa * (dim - 1) / R;

  auto residual = [&](const Eigen::ArrayXd& c) {
    const double dn = (3.0 * c[n - 1] - 4.0 * c[n - 2] + c[n - 3]) / (2.0 * h) / R;
    return std::abs(dn + c[n - 1] * (kH + c[n - 1]));
  };

  const double scale = 1.0 + state.c_hat.abs().maxCoeff();
  Eigen::ArrayXd cur = state.c_hat;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (residual(cur) <= tol * scale) break;
    Eigen::ArrayXd lo = Eigen::ArrayXd::Zero(n), di = Eigen::ArrayXd::Zero(n),
                   up = Eigen::ArrayXd::Zero(n), rhs = Eigen::ArrayXd::Zero(n);
    // Interior rows: m c - dt_reg * div(diffusive flux) = m c0.
    for (int i = 0; i + 1 < n; ++i) {
      const double w = cell_weight(i, n, h, dim);
      di[i] += w;
      rhs[i] = w * state.c_hat[i];
    }
    const double dcoef = std::pow(R, dim - 2);
    for (int i = 0; i + 1 < n; ++i) {
      const double gd = dcoef * std::pow((i + 0.5) * h, dim - 1) / h;
      di[i] += dt_reg * gd;
      up[i] -= dt_reg * gd;
      if (i + 1 < n - 1) {
        lo[i + 1] -= dt_reg * gd;
        di[i + 1] += dt_reg * gd;
      }
    }
    // Boundary row: one-sided membrane condition with the quadratic lagged.
    // The three-point stencil exceeds the tridiagonal band; fold the c_{n-3}
    // term to the right-hand side, lagged as well.
    di[n - 1] = 3.0 / (2.0 * h * R) + kH + cur[n - 1];
    lo[n - 1] = -4.0 / (2.0 * h * R);
    rhs[n - 1] = -cur[n - 3] / (2.0 * h * R);
    thomas_solve(lo, di, up, rhs);
    cur = rhs;
  }
  if (residual(cur) > tol * scale)
    throw SimulationError("radial initial-data projection did not converge");
  RadialState out = state;
  out.c_hat = cur;
  return out;
}

RadialState radial_step(const RadialState& state, double dt) {
  const int n = int(state.c_hat.size());
  const double h = 1.0 / (n - 1);
  const int dim = state.dim;
  const double kappa = state.kappa;

  const double Rdot_old = state.drdt();
  const double ydot_old = 2.0 * state.R * Rdot_old;
  const Eigen::ArrayXd div_old =
      flux_divergence(state.c_hat, state.R, Rdot_old, h, dim);
  const double mcoef_old = std::pow(state.R, dim) / dt;

  double R_new = state.R + dt * Rdot_old;
  Eigen::ArrayXd c_new = state.c_hat;
  for (int pass = 0; pass < 3; ++pass) {
    const double Rdot_new = -kappa * (dim - 1) / R_new + c_new[n - 1];
    const double y_new =
        state.R * state.R + 0.5 * dt * (ydot_old + 2.0 * R_new * Rdot_new);
    if (!(y_new > 0.0)) throw StarShapeLoss("radial oracle: radius reached zero");
    R_new = std::sqrt(y_new);

    // Crank-Nicolson tridiagonal system for c_new.
    const double mcoef = std::pow(R_new, dim) / dt;
    const double dcoef = std::pow(R_new, dim - 2);
    const double acoef = std::pow(R_new, dim - 1) * Rdot_new;
    Eigen::ArrayXd lo = Eigen::ArrayXd::Zero(n), di = Eigen::ArrayXd::Zero(n),
                   up = Eigen::ArrayXd::Zero(n), rhs(n);
    for (int i = 0; i < n; ++i) {
      const double w = cell_weight(i, n, h, dim);
      di[i] = w * mcoef;
      rhs[i] = w * mcoef_old * state.c_hat[i] + 0.5 * div_old[i];
    }
    for (int i = 0; i + 1 < n; ++i) {
      const double sf = (i + 0.5) * h;
      const double gd = dcoef * std::pow(sf, dim - 1) / h;
      const double ga = 0.5 * acoef * std::pow(sf, dim);
      // flux G = gd (c_{i+1} - c_i) + ga (c_i + c_{i+1}); implicit half on LHS
      di[i] += 0.5 * (gd - ga);
      up[i] -= 0.5 * (gd + ga);
      lo[i + 1] += 0.5 * (-gd + ga);
      di[i + 1] += 0.5 * (gd + ga);
    }
    thomas_solve(lo, di, up, rhs);
    c_new = rhs;
  }

  RadialState out = state;
  out.t = state.t + dt;
  out.R = R_new;
  out.c_hat = c_new;
  return out;
}

RadialState radial_run(RadialState state, double t_final, double dt_max) {
  const int n = int(state.c_hat.size());
  if (dt_max <= 0.0) dt_max = 1.0 / (n - 1);
  while (state.t < t_final - 1e-14) {
    const double remaining = t_final - state.t;
    const int steps = std::max(1, int(std::ceil(remaining / dt_max - 1e-12)));
    const double dt = remaining / steps;
    for (int k = 0; k < steps; ++k) state = radial_step(state, dt);
    state.t = t_final;  // absorb roundoff in the time accumulator
  }
  return state;
}

FastDiffusionResult fastdiff_ode(double R0, double mass, double kappa, double t_final,
                                 double dt, int dim) {
  if (R0 <= 0.0 || dt <= 0.0) throw ConfigError("fastdiff_ode: need R0 > 0 and dt > 0");
  const double omega = sphere_measure(dim);
  auto f = [&](double R) {
    return -kappa * (dim - 1) / R + dim * mass / (omega * std::pow(R, dim));
  };

  FastDiffusionResult res;
  res.t.push_back(0.0);
  res.R.push_back(R0);
  double t = 0.0, R = R0;
  while (t < t_final - 1e-14) {
    const double step = std::min(dt, t_final - t);
    const double k1 = f(R);
    const double R2 = R + 0.5 * step * k1;
    if (!(R2 > 0.0)) break;
    const double k2 = f(R2);
    const double R3 = R + 0.5 * step * k2;
    if (!(R3 > 0.0)) break;
    const double k3 = f(R3);
    const double R4 = R + step * k3;
    if (!(R4 > 0.0)) break;
    const double k4 = f(R4);
    const double Rn = R + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(Rn > 0.0) || !std::isfinite(Rn)) break;
    t += step;
    R = Rn;
    res.t.push_back(t);
    res.R.push_back(R);
  }
  if (t < t_final - 1e-14) {
    res.extinct = true;
    res.extinction_lo = t;
    res.extinction_hi = std::min(t + dt, t_final);
  }
  return res;
}

}  // namespace osmoflow
