#include <cmath>

#include "doctest.h"
#include "osmoflow/errors.hpp"
#include "osmoflow/stokes.hpp"

using namespace osmoflow;

namespace {

PolarCurve wavy(int n) {
  Eigen::ArrayXd cc(3), sc(2);
  cc << 0.12, 0.0, 0.05;
  sc << 0.0, 0.08;
  return PolarCurve::fourier(1.0, cc, sc, n);
}

BoundaryVector surface_traction(const PolarCurve& c, double kappa,
                                DerivScheme scheme = DerivScheme::Fd4) {
  BoundaryScalar H = curvature(c, scheme);
  BoundaryVector nrm = normal(c, scheme);
  BoundaryVector t(2, c.n());
  for (int j = 0; j < c.n(); ++j) t.col(j) = kappa * H[j] * nrm.col(j);
  return t;
}

// Strain rate of the Stokeslet field by central differences, reference for
// the analytic traction kernel.
Eigen::Matrix2d fd_strain(const Eigen::Vector2d& d, const Eigen::Vector2d& f, double h) {
  Eigen::Matrix2d grad;
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e[k] = h;
    const Eigen::Vector2d up = stokeslet_velocity(d + e) * f;
    const Eigen::Vector2d dn = stokeslet_velocity(d - e) * f;
    grad.col(k) = (up - dn) / (2.0 * h);
  }
  return 0.5 * (grad + grad.transpose());
}

}  // namespace

TEST_CASE("log kernel quadrature integrates cosines exactly") {
  // int_0^{2pi} ln(4 sin^2((t - tau)/2)) cos(m tau) dtau = -(2 pi / m) cos(m t)
  const int n = 64;
  Eigen::ArrayXd R = log_kernel_weights(n);
  for (int m : {1, 2, 5, 11}) {
    for (int i : {0, 7, 31}) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += R[std::abs(i - j)] * std::cos(m * 2.0 * M_PI * j / n);
      const double ref = -(2.0 * M_PI / m) * std::cos(m * 2.0 * M_PI * i / n);
      CHECK(acc == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
  }
  // and the constant integrates to zero
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += R[std::abs(17 - j)];
  CHECK(std::abs(acc) < 1e-12);
}

TEST_CASE("traction kernel consistent with velocity and pressure kernels") {
  const Eigen::Vector2d d(0.7, -0.4);
  const Eigen::Vector2d nx = Eigen::Vector2d(0.3, 0.9).normalized();
  for (const Eigen::Vector2d f : {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-0.3, 1.2)}) {
    // stress = eps(u) - p I  (mu = 1/2)
    const Eigen::Matrix2d eps = fd_strain(d, f, 1e-5);
    const double p = stokeslet_pressure(d).dot(f);
    const Eigen::Vector2d t_ref = (eps - p * Eigen::Matrix2d::Identity()) * nx;
    const Eigen::Vector2d t = stokeslet_traction(d, nx) * f;
    CHECK((t - t_ref).norm() < 1e-8);
  }
}

TEST_CASE("uniform surface tension on a disk produces a resting fluid") {
  const int n = 128;
  const double R = 1.3, kappa = 0.7;
  PolarCurve c = PolarCurve::circle(R, n);
  DomainMap map = build_domain_map(c, nullptr, 33);
  StokesSolution sol = solve_traction(c, surface_traction(c, kappa), map);

  CHECK(sol.boundary_velocity.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(sol.interior_velocity.x.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(sol.interior_velocity.y.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(sol.flux_residual == doctest::Approx(0.0).epsilon(0).scale(1e-10));
  // t = -p n with t = -(kappa/R) n means p = kappa / R
  CHECK(sol.effective_pressure_const == doctest::Approx(kappa / R).epsilon(1e-10));
  CHECK(sol.rigid_components.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exterior Stokeslet reproduced modulo rigid motions") {
  const int n = 256;
  PolarCurve c = wavy(n);
  DomainMap map = build_domain_map(c, nullptr, 41);
  const Eigen::Vector2d y0(2.1, 1.4);  // source outside the domain
  const Eigen::Vector2d f0(0.8, -0.5);

  // traction of the exact field on the curve
  BoundaryVector nrm = normal(c, DerivScheme::Spectral);
  BoundaryVector trac(2, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector2d d = c.point(j) - y0;
    const Eigen::Matrix2d eps = fd_strain(d, f0, 1e-6);
    const double p = stokeslet_pressure(d).dot(f0);
    trac.col(j) = (eps - p * Eigen::Matrix2d::Identity()) * nrm.col(j);
  }
  CHECK(solvability_check(c, trac).cwiseAbs().maxCoeff() < 1e-7);

  StokesOptions opts;
  opts.solvability_tol = 1e-6;
  StokesSolution sol = solve_traction(c, trac, map, opts);

  // The solution matches the Stokeslet up to a rigid motion: fit it on the
  // interior rings and check the residual there.
  std::vector<Eigen::Vector2d> pts, diffs;
  for (int i = 4; i <= 30; i += 2) {
    for (int j = 0; j < n; j += 5) {
      const Eigen::Vector2d x = map.position(i, j);
      const Eigen::Vector2d ex = stokeslet_velocity(x - y0) * f0;
      pts.push_back(x);
      diffs.push_back(Eigen::Vector2d(sol.interior_velocity.x(i, j),
                                      sol.interior_velocity.y(i, j)) -
                      ex);
    }
  }
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (size_t k = 0; k < pts.size(); ++k) {
    Eigen::Matrix<double, 2, 3> B;
    B << 1, 0, -pts[k][1], 0, 1, pts[k][0];
    G += B.transpose() * B;
    b += B.transpose() * diffs[k];
  }
  const Eigen::Vector3d rig = G.ldlt().solve(b);
  double resid = 0.0;
  for (size_t k = 0; k < pts.size(); ++k) {
    Eigen::Matrix<double, 2, 3> B;
    B << 1, 0, -pts[k][1], 0, 1, pts[k][0];
    resid = std::max(resid, (diffs[k] - B * rig).norm());
  }
  CHECK(resid < 1e-7);
}

TEST_CASE("discrete rotation equivariance") {
  const int n = 128, shift = 16;  // rotation by shift * h
  PolarCurve c = wavy(n);
  PolarCurve cr;
  cr.r.resize(n);
  for (int j = 0; j < n; ++j) cr.r[j] = c.r[((j - shift) % n + n) % n];
  DomainMap map = build_domain_map(c, nullptr, 17);
  DomainMap mapr = build_domain_map(cr, nullptr, 17);

  StokesSolution sol = solve_traction(c, surface_traction(c, 1.0), map);
  StokesSolution solr = solve_traction(cr, surface_traction(cr, 1.0), mapr);

  const double ang = 2.0 * M_PI * shift / n;
  Eigen::Matrix2d Q;
  Q << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
  double err = 0.0;
  for (int j = 0; j < n; ++j) {
    const int jr = (j + shift) % n;
    err = std::max(err,
                   (solr.boundary_velocity.col(jr) - Q * sol.boundary_velocity.col(j)).norm());
  }
  CHECK(err < 1e-10);
}

TEST_CASE("incompatible traction is rejected") {
  const int n = 64;
  PolarCurve c = PolarCurve::circle(1.0, n);
  DomainMap map = build_domain_map(c, nullptr, 9);
  BoundaryVector t = BoundaryVector::Zero(2, n);
  t.row(0).setConstant(1.0);  // net force
  CHECK_THROWS_AS(solve_traction(c, t, map), IncompatibleData);
}

TEST_CASE("single layer velocity matches the plain Stokeslet sum") {
  const int n = 64;
  PolarCurve c = wavy(n);
  BoundaryVector psi(2, n);
  for (int j = 0; j < n; ++j) {
    psi(0, j) = std::sin(c.phi(j));
    psi(1, j) = 0.3 * std::cos(2.0 * c.phi(j));
  }
  Eigen::Matrix2Xd targets(2, 2);
  targets.col(0) << 0.1, -0.2;
  targets.col(1) << 0.35, 0.15;
  BoundaryVector out = single_layer_velocity(c, psi, targets);
  // independent direct sum
  Eigen::ArrayXd rp = Eigen::ArrayXd::Zero(n);
  for (int t = 0; t < 2; ++t) {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    Eigen::ArrayXd speed =
        (c.r * c.r + periodic_derivative(c.r, 1, DerivScheme::Fd4).pow(2)).sqrt();
    for (int j = 0; j < n; ++j) {
      acc += stokeslet_velocity(targets.col(t) - c.point(j)) * psi.col(j) *
             (speed[j] * 2.0 * M_PI / n);
    }
    CHECK((out.col(t) - acc).norm() < 1e-13);
  }
}

TEST_CASE("boundary velocity self-converges at fourth order with fd4") {
  // The quadrature is spectrally accurate; with fd4 curve derivatives the
  // total error is dominated by the fourth-order geometry terms.
  const double a = 1.3, b = 0.8;
  const int nref = 512;
  PolarCurve cref = PolarCurve::ellipse(a, b, nref);
  DomainMap mref = build_domain_map(cref, nullptr, 9);
  StokesSolution sref = solve_traction(cref, surface_traction(cref, 1.0), mref);

  double err[2];
  const int ns[2] = {64, 128};
  for (int k = 0; k < 2; ++k) {
    const int n = ns[k];
    PolarCurve c = PolarCurve::ellipse(a, b, n);
    DomainMap map = build_domain_map(c, nullptr, 9);
    StokesSolution sol = solve_traction(c, surface_traction(c, 1.0), map);
    const int stride = nref / n;
    double e = 0.0;
    for (int j = 0; j < n; ++j)
      e = std::max(e,
                   (sol.boundary_velocity.col(j) - sref.boundary_velocity.col(j * stride))
                       .norm());
    err[k] = e;
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}
