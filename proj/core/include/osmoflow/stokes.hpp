#pragma once

#include <Eigen/Dense>

#include "osmoflow/geometry.hpp"

namespace osmoflow {

// Interior Stokes traction problem, viscosity mu = 1/2 so that the stress is
// eps(u) - p I and -(1/2) Lap u + grad p = 0. Discretized with a single-layer
// Stokeslet representation on the periodic trapezoid grid; the log-singular
// self interaction uses the spectrally accurate quadrature for the
// ln(4 sin^2((t-tau)/2)) kernel, the traction (adjoint double-layer) kernel is
// smooth and keeps plain trapezoid with its analytic diagonal limit.
struct StokesSolution {
  BoundaryVector boundary_velocity;   // trace of u after rigid projection
  BoundaryVector layer_density;
  InteriorVector interior_velocity;   // on the map grid, rigid part removed
  double effective_pressure_const = 0.0;  // pressure evaluated at the origin
  Eigen::Vector3d rigid_components = Eigen::Vector3d::Zero();  // post-projection moments
  Eigen::Vector3d rigid_coeffs = Eigen::Vector3d::Zero();      // subtracted rigid field
  Eigen::Vector3d border_multipliers = Eigen::Vector3d::Zero();
  double flux_residual = 0.0;         // discrete contour integral of u.n ds
};

struct StokesOptions {
  double solvability_tol = 1e-8;  // relative to traction scale
  DerivScheme scheme = DerivScheme::Fd4;
};

// Momenta of the traction against translations (1,0), (0,1) and the rotation
// (-y, x); all three must vanish for the problem to be solvable.
Eigen::Vector3d solvability_check(const PolarCurve& curve, const BoundaryVector& traction,
                                  DerivScheme scheme = DerivScheme::Fd4);

StokesSolution solve_traction(const PolarCurve& curve, const BoundaryVector& traction,
                              const DomainMap& map, const StokesOptions& opts = {});

// Velocity on the reference grid. Values cached by solve_traction are reused
// when the grid matches; near-boundary nodes are filled by interpolation
// between the boundary trace and the nearest accurate interior ring.
InteriorVector evaluate_interior(const PolarCurve& curve, const StokesSolution& sol,
                                 const DomainMap& map);

// Single-layer velocity at arbitrary points (no near-boundary mitigation);
// used for interior evaluation and by tests against analytic Stokeslets.
BoundaryVector single_layer_velocity(const PolarCurve& curve, const BoundaryVector& density,
                                     const Eigen::Matrix2Xd& targets,
                                     DerivScheme scheme = DerivScheme::Fd4);

// Quadrature weights R_d for the periodic log kernel:
//   int_0^{2pi} ln(4 sin^2((t_i - tau)/2)) f(tau) dtau ~= sum_j R_{|i-j|} f(t_j)
Eigen::ArrayXd log_kernel_weights(int n);

// 2D Stokeslet kernels for mu = 1/2 (force normalization: -mu Lap u + grad p
// = b delta). Exposed for tests.
Eigen::Matrix2d stokeslet_velocity(const Eigen::Vector2d& d);
Eigen::Vector2d stokeslet_pressure(const Eigen::Vector2d& d);
// Traction kernel: row i, column j gives traction component i at normal nx
// from a unit force in direction j.
Eigen::Matrix2d stokeslet_traction(const Eigen::Vector2d& d, const Eigen::Vector2d& nx);

}  // namespace osmoflow
