#pragma once

#include <Eigen/Dense>
#include <vector>

namespace osmoflow {

// Radially symmetric reference solver. A circle stays a circle, so the full
// problem reduces to a 1D advection-diffusion equation for c_hat(s, t) on the
// mapped interval s in [0, 1] coupled to the radius ODE
//   R' = -kappa (N-1)/R + c_hat(1).
// The fluid velocity vanishes by symmetry (any radial Stokes field with zero
// flux through the boundary is zero), so the radial solver covers the full,
// osmosis and impermeable modes at once.
struct RadialState {
  double t = 0.0;
  double R = 1.0;
  double kappa = 1.0;
  int dim = 2;
  Eigen::ArrayXd c_hat;  // vertex values on s_i = i/(n_s-1)

  static RadialState uniform(double R0, double c0, double kappa, int n_s, int dim = 2);
  double mass() const;           // int c dx over the ball
  double boundary_value() const { return c_hat[c_hat.size() - 1]; }
  double drdt() const { return -kappa * (dim - 1) / R + boundary_value(); }
};

// Radial analogue of the initial-data projection: c - dt_reg * Lap c = c0 with
// the membrane condition (quadratic factor lagged, iterated). Discretizes the
// same regularized problem as the 2D projection, so both solvers can start a
// comparison run from the same continuum data.
RadialState radial_project(const RadialState& state, double dt_reg, double tol,
                           int max_iter = 50);

// One Crank-Nicolson step of the conservative mapped scheme. The membrane
// face carries zero combined flux, so mass is conserved to rounding; R^2 is
// advanced by the trapezoid rule (exact when c_hat is zero). The c/R coupling
// is resolved by a short fixed-point iteration.
RadialState radial_step(const RadialState& state, double dt);

// Integrate to time t_final with steps of at most dt_max (default h_s).
RadialState radial_run(RadialState state, double t_final, double dt_max = 0.0);

// Fast-diffusion limit: c = M / |Omega(t)| uniform, R' = -kappa (N-1)/R + c.
// Classical RK4 with fixed dt; if the radius reaches zero the trajectory stops
// and the extinction time is bracketed between the last two sample times.
struct FastDiffusionResult {
  std::vector<double> t, R;
  bool extinct = false;
  double extinction_lo = 0.0, extinction_hi = 0.0;
};

FastDiffusionResult fastdiff_ode(double R0, double mass, double kappa, double t_final,
                                 double dt = 1e-4, int dim = 2);

}  // namespace osmoflow
