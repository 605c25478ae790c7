#include "osmoflow/energetics.hpp"

#include <cmath>

#include "osmoflow/transport.hpp"

namespace osmoflow {

namespace {

// Cell quadrature weight in s, matching the vertex-centered finite volumes of
// the transport scheme so that mass and energy use the same measure.
inline double s_weight(int i, int n_s, double h) {
  if (i == 0) return h * h / 8.0;
  if (i == n_s - 1) return 0.5 * h - h * h / 8.0;
  return (i * h) * h;
}

inline double cell_mass(const DomainMap& map, int i, int j) {
  return s_weight(i, map.n_s, map.h_s) * map.r[j] * map.r[j] * map.h_phi;
}

inline double clogc(double c) { return c > 1e-300 ? c * std::log(c) : 0.0; }

}  // namespace

double energy(const DomainMap& map, const InteriorScalar& xi, double kappa) {
  double e = 0.0;
  for (int i = 0; i < map.n_s; ++i)
    for (int j = 0; j < map.n_phi; ++j) e += clogc(xi(i, j)) * cell_mass(map, i, j);
  double per = 0.0;
  for (int j = 0; j < map.n_phi; ++j) per += map.boundary_weight(j) * map.h_phi;
  return e + kappa * per;
}

InteriorVector recovered_flux(const DomainMap& map, const InteriorScalar& xi,
                              const InteriorVector* velocity) {
  InteriorVector g = gradient(map, xi);
  InteriorVector f;
  f.x = -g.x;
  f.y = -g.y;
  if (velocity) {
    f.x += xi.cwiseProduct(velocity->x);
    f.y += xi.cwiseProduct(velocity->y);
  }
  return f;
}

DissipationBreakdown dissipation(const DomainMap& map, const InteriorScalar& xi,
                                 const InteriorVector* velocity, const BoundaryScalar& H,
                                 double kappa, const BoundaryScalar* V_n) {
  DissipationBreakdown d;

  InteriorVector g = gradient(map, xi);
  for (int i = 0; i < map.n_s; ++i) {
    for (int j = 0; j < map.n_phi; ++j) {
      const double c = xi(i, j);
      if (c < 1e-14) continue;
      const double g2 = g.x(i, j) * g.x(i, j) + g.y(i, j) * g.y(i, j);
      d.solute += 0.5 * g2 / c * cell_mass(map, i, j);
    }
  }

  if (velocity) {
    InteriorVector gx = gradient(map, velocity->x);
    InteriorVector gy = gradient(map, velocity->y);
    for (int i = 0; i < map.n_s; ++i) {
      for (int j = 0; j < map.n_phi; ++j) {
        const double exx = gx.x(i, j);
        const double eyy = gy.y(i, j);
        const double exy = 0.5 * (gx.y(i, j) + gy.x(i, j));
        d.viscous += 0.5 * (exx * exx + eyy * eyy + 2.0 * exy * exy) * cell_mass(map, i, j);
      }
    }
  }

  const int last = map.n_s - 1;
  for (int j = 0; j < map.n_phi; ++j) {
    const double bw = map.boundary_weight(j);
    const double jump = kappa * H[j] + xi(last, j);
    d.membrane += 0.5 * jump * jump * bw * map.h_phi;
    if (V_n) {
      double un = 0.0;
      if (velocity) {
        const double p = 2.0 * M_PI * j / map.n_phi;
        const double cs = std::cos(p), sn = std::sin(p);
        // exterior normal (r e_r - r' e_phi)/|.|
        const double nx = (map.r[j] * cs + map.dr[j] * sn) / bw;
        const double ny = (map.r[j] * sn - map.dr[j] * cs) / bw;
        un = velocity->x(last, j) * nx + velocity->y(last, j) * ny;
      }
      const double rel = un - (*V_n)[j];
      d.membrane_kinematic += 0.5 * rel * rel * bw * map.h_phi;
    }
  }

  d.total = d.solute + d.viscous + d.membrane;
  return d;
}

Scales nondimensionalize(const PhysicalParameters& p) {
  Scales s;
  const int N = p.dim;
  s.length = p.eta2 / p.eta3;
  s.time = s.length * s.length * p.eta1 / p.gamma;
  s.force = std::pow(s.length, N - 1) * p.eta2 / s.time;
  s.molarity = s.length * s.force / p.gamma;
  s.kappa = p.alpha * p.eta1 * std::pow(p.eta2, N - 1) / (p.gamma * std::pow(p.eta3, N));
  return s;
}

}  // namespace osmoflow
