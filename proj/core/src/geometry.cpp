#include "osmoflow/geometry.hpp"

#include "osmoflow/errors.hpp"

namespace osmoflow {

void PolarCurve::require_valid() const {
  if (!valid()) throw DegenerateCurve("polar curve invalid: need n >= 8 and r > 0 everywhere");
}

PolarCurve PolarCurve::circle(double radius, int n_phi) {
  PolarCurve c;
  c.r = Eigen::ArrayXd::Constant(n_phi, radius);
  return c;
}

PolarCurve PolarCurve::ellipse(double a, double b, int n_phi) {
  PolarCurve c;
  c.r.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) {
    const double p = 2.0 * M_PI * j / n_phi;
    const double cs = std::cos(p), sn = std::sin(p);
    c.r[j] = a * b / std::sqrt(b * b * cs * cs + a * a * sn * sn);
  }
  return c;
}

PolarCurve PolarCurve::fourier(double base, const Eigen::ArrayXd& cos_coeffs,
                               const Eigen::ArrayXd& sin_coeffs, int n_phi) {
  PolarCurve c;
  c.r = Eigen::ArrayXd::Constant(n_phi, base);
  for (int j = 0; j < n_phi; ++j) {
    const double p = 2.0 * M_PI * j / n_phi;
    for (int k = 0; k < cos_coeffs.size(); ++k) c.r[j] += cos_coeffs[k] * std::cos((k + 1) * p);
    for (int k = 0; k < sin_coeffs.size(); ++k) c.r[j] += sin_coeffs[k] * std::sin((k + 1) * p);
  }
  return c;
}

BoundaryScalar curvature(const PolarCurve& curve, DerivScheme scheme) {
  curve.require_valid();
  const Eigen::ArrayXd& r = curve.r;
  Eigen::ArrayXd rp = periodic_derivative(r, 1, scheme);
  Eigen::ArrayXd rpp = periodic_derivative(r, 2, scheme);
  Eigen::ArrayXd g = r * r + rp * rp;
  if ((g < 1e-300).any()) throw DegenerateCurve("degenerate curve: r^2 + r'^2 underflow");
  BoundaryScalar h = -(r * r + 2.0 * rp * rp - r * rpp) / g.pow(1.5);
  if (!h.isFinite().all()) throw DegenerateCurve("non-finite curvature");
  return h;
}

BoundaryVector normal(const PolarCurve& curve, DerivScheme scheme) {
  curve.require_valid();
  const int n = curve.n();
  Eigen::ArrayXd rp = periodic_derivative(curve.r, 1, scheme);
  BoundaryVector out(2, n);
  for (int j = 0; j < n; ++j) {
    const double p = curve.phi(j);
    const double cs = std::cos(p), sn = std::sin(p);
    const double w = std::hypot(curve.r[j], rp[j]);
    // n = (r e_r - r' e_phi) / sqrt(r^2 + r'^2)
    out(0, j) = (curve.r[j] * cs + rp[j] * sn) / w;
    out(1, j) = (curve.r[j] * sn - rp[j] * cs) / w;
  }
  return out;
}

Measures measures(const PolarCurve& curve, DerivScheme scheme) {
  curve.require_valid();
  const int n = curve.n();
  const double dphi = 2.0 * M_PI / n;
  Eigen::ArrayXd rp = periodic_derivative(curve.r, 1, scheme);
  Measures m;
  m.arclength_weights.resize(n);
  for (int j = 0; j < n; ++j) {
    m.area += 0.5 * curve.r[j] * curve.r[j] * dphi;
    const double speed = std::hypot(curve.r[j], rp[j]);
    m.arclength_weights[j] = speed * dphi;
    m.perimeter += speed * dphi;
  }
  return m;
}

BoundaryScalar normal_velocity_factor(const PolarCurve& curve, DerivScheme scheme) {
  curve.require_valid();
  Eigen::ArrayXd rp = periodic_derivative(curve.r, 1, scheme);
  return (curve.r * curve.r + rp * rp).sqrt() / curve.r;
}

DomainMap build_domain_map(const PolarCurve& curve, const Eigen::ArrayXd* curve_rate,
                           int n_s, DerivScheme scheme) {
  curve.require_valid();
  if (n_s < 3) throw ConfigError("n_s must be at least 3");
  if (curve_rate && curve_rate->size() != curve.n())
    throw ConfigError("curve_rate length mismatch");
  DomainMap map;
  map.n_s = n_s;
  map.n_phi = curve.n();
  map.h_s = 1.0 / (n_s - 1);
  map.h_phi = 2.0 * M_PI / curve.n();
  map.s = Eigen::ArrayXd::LinSpaced(n_s, 0.0, 1.0);
  map.r = curve.r;
  map.dr = periodic_derivative(curve.r, 1, scheme);
  if (curve_rate) {
    map.rate = *curve_rate;
    map.has_rate = !(map.rate == 0.0).all();
  } else {
    map.rate = Eigen::ArrayXd::Zero(curve.n());
  }
  return map;
}

}  // namespace osmoflow
