#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "osmoflow/fourier.hpp"

namespace osmoflow {

using BoundaryScalar = Eigen::ArrayXd;      // one value per boundary node
using BoundaryVector = Eigen::Matrix2Xd;    // one 2-vector per boundary node

// Scalar field on the mapped polar reference grid, n_s x n_phi, row i at
// s_i = i/(n_s-1). Row 0 is the origin and must be constant across phi.
using InteriorScalar = Eigen::MatrixXd;

struct InteriorVector {
  Eigen::MatrixXd x, y;  // physical Cartesian components on the reference grid
};

// Star-shaped boundary about the origin: radius samples r(phi_j) on the
// uniform periodic grid phi_j = 2*pi*j/n_phi.
struct PolarCurve {
  Eigen::ArrayXd r;

  int n() const { return int(r.size()); }
  double phi(int j) const { return 2.0 * M_PI * j / n(); }
  bool valid() const { return r.size() >= 8 && (r > 0.0).all() && r.isFinite().all(); }
  void require_valid() const;

  Eigen::Vector2d point(int j) const {
    const double p = phi(j);
    return {r[j] * std::cos(p), r[j] * std::sin(p)};
  }

  static PolarCurve circle(double radius, int n_phi);
  // Polar graph of the ellipse x^2/a^2 + y^2/b^2 = 1.
  static PolarCurve ellipse(double a, double b, int n_phi);
  // r(phi) = base + sum_k cos_k cos(k phi) + sin_k sin(k phi), k starting at 1.
  static PolarCurve fourier(double base, const Eigen::ArrayXd& cos_coeffs,
                            const Eigen::ArrayXd& sin_coeffs, int n_phi);
};

// Sum-of-principal-curvatures with the convention H = -1/R on a circle of
// radius R (outward normal, H < 0 for convex domains).
BoundaryScalar curvature(const PolarCurve& curve, DerivScheme scheme = DerivScheme::Fd4);

// Exterior unit normals.
BoundaryVector normal(const PolarCurve& curve, DerivScheme scheme = DerivScheme::Fd4);

struct Measures {
  double area = 0.0;
  double perimeter = 0.0;
  BoundaryScalar arclength_weights;  // ds at each node (trapezoid measure)
};
Measures measures(const PolarCurve& curve, DerivScheme scheme = DerivScheme::Fd4);

// Factor Lambda with r-dot = Lambda * V_n, i.e. sqrt(r^2 + r'^2)/r.
BoundaryScalar normal_velocity_factor(const PolarCurve& curve,
                                      DerivScheme scheme = DerivScheme::Fd4);

// Metric data of the radial-scaling map Theta(s,phi) = s r(phi) e_r(phi) from
// the unit disk onto the star-shaped domain, discretized on the vertex grid
// s_i = i/(n_s-1), phi_j = 2*pi*j/n_phi.
//
// In reference coordinates, with J = s r^2:
//   J grad s . grad s     = s (1 + (r'/r)^2)
//   J grad s . grad phi   = -r'/r
//   J grad phi . grad phi = 1/s
struct DomainMap {
  int n_s = 0;
  int n_phi = 0;
  double h_s = 0.0, h_phi = 0.0;
  Eigen::ArrayXd s;     // n_s values
  Eigen::ArrayXd r, dr; // curve radii and d r/d phi, n_phi values
  Eigen::ArrayXd rate;  // r-dot per phi node; zero when the curve is static
  bool has_rate = false;

  double jac(int i, int j) const { return s[i] * r[j] * r[j]; }
  Eigen::Vector2d position(int i, int j) const {
    const double p = 2.0 * M_PI * j / n_phi;
    return {s[i] * r[j] * std::cos(p), s[i] * r[j] * std::sin(p)};
  }
  // w(s,phi) = s * r-dot * e_r
  Eigen::Vector2d mesh_velocity(int i, int j) const {
    const double p = 2.0 * M_PI * j / n_phi;
    return {s[i] * rate[j] * std::cos(p), s[i] * rate[j] * std::sin(p)};
  }
  // Boundary arclength factor sqrt(r^2 + r'^2) = J |grad s| at s = 1.
  double boundary_weight(int j) const { return std::hypot(r[j], dr[j]); }
};

DomainMap build_domain_map(const PolarCurve& curve, const Eigen::ArrayXd* curve_rate,
                           int n_s, DerivScheme scheme = DerivScheme::Fd4);

}  // namespace osmoflow
