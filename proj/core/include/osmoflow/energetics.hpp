#pragma once

#include <Eigen/Dense>

#include "osmoflow/geometry.hpp"

namespace osmoflow {

// Entropy + surface energy, and the quadratic dissipation of the three
// processes (solute flux, fluid strain, membrane flux), all in the
// nondimensional normalization where every weight is 1.

struct DissipationBreakdown {
  double solute = 0.0;    // (1/2) int |grad c|^2 / c
  double viscous = 0.0;   // (1/2) int |eps(u)|^2
  double membrane = 0.0;  // (1/2) oint (kappa H + c)^2 ds
  double total = 0.0;
  // Same membrane term evaluated from (u.n - V_n) when V_n is available;
  // agrees with `membrane` by the stationarity of the minimization.
  double membrane_kinematic = 0.0;
};

struct PhysicalParameters {
  double eta1 = 1.0;   // inverse solute mobility
  double eta2 = 1.0;   // shear viscosity
  double eta3 = 1.0;   // inverse membrane permeability
  double alpha = 1.0;  // surface energy density
  double gamma = 1.0;  // entropy scale
  int dim = 2;
};

struct Scales {
  double length, time, force, molarity, kappa;
};

// E = int c ln c dx + kappa |boundary|; c ln c is 0 below 1e-300.
double energy(const DomainMap& map, const InteriorScalar& xi, double kappa);

// f = c u - grad c (Fick's law plus transport by the solvent).
InteriorVector recovered_flux(const DomainMap& map, const InteriorScalar& xi,
                              const InteriorVector* velocity);

// velocity may be null (resting solvent); V_n, when given, additionally fills
// membrane_kinematic.
DissipationBreakdown dissipation(const DomainMap& map, const InteriorScalar& xi,
                                 const InteriorVector* velocity, const BoundaryScalar& H,
                                 double kappa, const BoundaryScalar* V_n = nullptr);

Scales nondimensionalize(const PhysicalParameters& p);

}  // namespace osmoflow
