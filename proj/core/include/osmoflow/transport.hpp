#pragma once

#include <Eigen/Dense>

#include "osmoflow/geometry.hpp"

namespace osmoflow {

// Advection-diffusion of the solute on the moving domain, solved in mapped
// (ALE) form on the reference grid. The scheme is a vertex-centered finite
// volume method in conservation form: interior fluxes telescope, and the
// membrane faces carry zero combined (diffusive + convective-relative) flux,
// which is the discrete form of the impermeability of the membrane to solute.
// Solute mass is therefore conserved to rounding. Diffusion is implicit
// (backward Euler), convection is implicit in the concentration with the
// velocity lagged; the angular direction near the polar origin would
// otherwise impose a severe explicit CFL limit.

// Mapped Laplacian A applied to a field (second order; origin closed by the
// finite-volume balance of the center cell).
InteriorScalar apply_laplacian(const DomainMap& map, const InteriorScalar& f);

// Physical gradient K of a mapped field (Cartesian components).
InteriorVector gradient(const DomainMap& map, const InteriorScalar& f);

// Outward co-normal derivative B on the s = 1 ring (one-sided, second order).
BoundaryScalar normal_derivative(const DomainMap& map, const InteriorScalar& f);

// B xi + kappa xi H + xi^2 on the boundary ring; zero when the membrane flux
// condition holds, also used to validate initial data.
BoundaryScalar membrane_bc_residual(const InteriorScalar& xi, const BoundaryScalar& H,
                                    const DomainMap& map, double kappa);

// Discrete solute mass with the vertex-centered cell weights.
double solute_mass(const DomainMap& map, const InteriorScalar& xi);

struct TransportInput {
  const DomainMap* map_old = nullptr;  // carries the mesh rate (r-dot)
  const DomainMap* map_new = nullptr;  // geometry after the curve update
  const InteriorVector* velocity = nullptr;  // fluid velocity, null means zero
  const InteriorScalar* forcing = nullptr;   // optional manufactured source
  double cfl_factor = 1.0;
};

InteriorScalar transport_step(const InteriorScalar& xi, double dt, const TransportInput& in);

// Replace initial data by the solution of c - dt_reg * Lap c = c0 with the
// nonlinear membrane condition (lagged, iterated); smooths the data near the
// boundary until the compatibility residual is below tol. With robin = false
// the boundary condition is the homogeneous Neumann one (impermeable mode).
InteriorScalar project_initial_data(const InteriorScalar& xi0, const DomainMap& map,
                                    const BoundaryScalar& H, double kappa, double dt_reg,
                                    double tol, int max_iter = 50, bool robin = true);

}  // namespace osmoflow
