#include <cmath>

#include "doctest.h"
#include "osmoflow/errors.hpp"
#include "osmoflow/geometry.hpp"
#include "osmoflow/transport.hpp"

using namespace osmoflow;

namespace {

PolarCurve wavy(int n) {
  Eigen::ArrayXd cc(2), sc(1);
  cc << 0.1, 0.04;
  sc << 0.06;
  return PolarCurve::fourier(1.0, cc, sc, n);
}

InteriorScalar sample(const DomainMap& map, double (*f)(double, double)) {
  InteriorScalar out(map.n_s, map.n_phi);
  for (int i = 0; i < map.n_s; ++i)
    for (int j = 0; j < map.n_phi; ++j) {
      const Eigen::Vector2d x = map.position(i, j);
      out(i, j) = f(x[0], x[1]);
    }
  return out;
}

}  // namespace

TEST_CASE("mapped laplacian converges at second order") {
  auto f = [](double x, double y) { return std::sin(x) * std::cos(y); };
  auto lap = [](double x, double y) { return -2.0 * std::sin(x) * std::cos(y); };
  double err[2];
  const int res[2] = {32, 64};
  for (int k = 0; k < 2; ++k) {
    const int n = 2 * res[k];
    PolarCurve c = wavy(n);
    DomainMap map = build_domain_map(c, nullptr, res[k] + 1);
    InteriorScalar u = sample(map, f);
    InteriorScalar Lu = apply_laplacian(map, u);
    double e = 0.0;
    for (int i = 0; i < map.n_s; ++i)
      for (int j = 0; j < n; ++j) {
        const Eigen::Vector2d x = map.position(i, j);
        e = std::max(e, std::abs(Lu(i, j) - lap(x[0], x[1])));
      }
    err[k] = e;
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(order > 1.5);
  CHECK(order < 2.8);
}

TEST_CASE("gradient of a linear field") {
  const int n = 64;
  PolarCurve c = wavy(n);
  DomainMap map = build_domain_map(c, nullptr, 33);
  InteriorScalar u = sample(map, [](double x, double y) { return 2.0 * x - 3.0 * y; });
  InteriorVector g = gradient(map, u);
  // exact at the origin (plane fit through the first ring)
  CHECK(g.x(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(g.y(0, 0) == doctest::Approx(-3.0).epsilon(1e-10));
  // second-order accurate elsewhere
  double e = 0.0;
  for (int i = 1; i < map.n_s; ++i)
    for (int j = 0; j < n; ++j)
      e = std::max(e, std::hypot(g.x(i, j) - 2.0, g.y(i, j) + 3.0));
  CHECK(e < 2e-2);
}

TEST_CASE("normal derivative and membrane residual on a disk") {
  const int n = 64, n_s = 65;
  const double R = 1.0, kappa = 1.0;
  PolarCurve c = PolarCurve::circle(R, n);
  DomainMap map = build_domain_map(c, nullptr, n_s);
  // c = s^2 (radially quadratic): d c / d n = 2 / R, exactly captured by the
  // one-sided quadratic stencil
  InteriorScalar u(n_s, n);
  for (int i = 0; i < n_s; ++i) u.row(i).setConstant(map.s[i] * map.s[i]);
  BoundaryScalar dn = normal_derivative(map, u);
  CHECK((dn - 2.0 / R).abs().maxCoeff() < 1e-10);

  BoundaryScalar H = curvature(c);
  BoundaryScalar res = membrane_bc_residual(u, H, map, kappa);
  // 2/R + 1 * (kappa * (-1/R)) + 1^2 = 2 - 1 + 1 = 2
  CHECK((res - 2.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("transport conserves mass exactly on a moving mesh with flow") {
  const int n = 48, n_s = 25;
  PolarCurve c0 = wavy(n);
  PolarCurve c1 = c0;
  const double dt = 2e-4;
  Eigen::ArrayXd rate(n);
  for (int j = 0; j < n; ++j) rate[j] = -0.2 + 0.1 * std::sin(2.0 * c0.phi(j));
  c1.r = c0.r + dt * rate;

  DomainMap m0 = build_domain_map(c0, &rate, n_s);
  DomainMap m1 = build_domain_map(c1, nullptr, n_s);
  InteriorScalar xi = sample(m0, [](double x, double y) {
    return 1.0 + 0.3 * std::exp(-2.0 * (x * x + y * y)) + 0.1 * x;
  });
  InteriorVector vel;
  vel.x.resize(n_s, n);
  vel.y.resize(n_s, n);
  for (int i = 0; i < n_s; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector2d x = m0.position(i, j);
      vel.x(i, j) = 0.3 * x[1] + 0.05;
      vel.y(i, j) = -0.2 * x[0];
    }

  TransportInput in;
  in.map_old = &m0;
  in.map_new = &m1;
  in.velocity = &vel;
  const double mass0 = solute_mass(m0, xi);
  InteriorScalar xi1 = transport_step(xi, dt, in);
  const double mass1 = solute_mass(m1, xi1);
  CHECK(std::abs(mass1 - mass0) / mass0 < 1e-13);
  CHECK(xi1.minCoeff() >= 0.0);
}

TEST_CASE("diffusion step is second order in space") {
  // Steady manufactured solution c* = 1 + (R^2 - rho^2)^2 with source
  // f = -Lap c* = 8 R^2 - 16 rho^2; a single implicit step from c* moves by
  // dt * (discretization defect), which measures the spatial order.
  const double R = 1.0, dt = 1e-3;
  double err[2];
  const int res[2] = {33, 65};
  for (int k = 0; k < 2; ++k) {
    const int n_s = res[k], n = 2 * (res[k] - 1);
    PolarCurve c = PolarCurve::circle(R, n);
    DomainMap map = build_domain_map(c, nullptr, n_s);
    InteriorScalar cstar = sample(map, [](double x, double y) {
      const double q = 1.0 - (x * x + y * y);
      return 1.0 + q * q;
    });
    InteriorScalar f = sample(map, [](double x, double y) {
      return -(8.0 - 16.0 * (x * x + y * y));
    });
    TransportInput in;
    in.map_old = &map;
    in.map_new = &map;
    in.forcing = &f;
    InteriorScalar c1 = transport_step(cstar, dt, in);
    err[k] = (c1 - cstar).cwiseAbs().maxCoeff() / dt;
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(order > 1.5);
  CHECK(order < 2.8);
}

TEST_CASE("uniform data under zero flow is a fixed point") {
  const int n = 32, n_s = 17;
  PolarCurve c = wavy(n);
  DomainMap map = build_domain_map(c, nullptr, n_s);
  InteriorScalar xi = InteriorScalar::Constant(n_s, n, 0.7);
  TransportInput in;
  in.map_old = &map;
  in.map_new = &map;
  InteriorScalar xi1 = transport_step(xi, 1e-2, in);
  CHECK((xi1.array() - 0.7).abs().maxCoeff() < 1e-12);
}

TEST_CASE("advective accuracy guard") {
  const int n = 32, n_s = 17;
  PolarCurve c = PolarCurve::circle(1.0, n);
  DomainMap map = build_domain_map(c, nullptr, n_s);
  InteriorScalar xi = InteriorScalar::Constant(n_s, n, 1.0);
  InteriorVector vel;
  vel.x = Eigen::MatrixXd::Constant(n_s, n, 50.0);
  vel.y = Eigen::MatrixXd::Zero(n_s, n);
  TransportInput in;
  in.map_old = &map;
  in.map_new = &map;
  in.velocity = &vel;
  CHECK_THROWS_AS(transport_step(xi, 0.1, in), CFLViolation);
}

TEST_CASE("initial data projection reaches the membrane condition") {
  const int n = 64, n_s = 65;
  const double kappa = 1.0;
  PolarCurve c = PolarCurve::circle(1.0, n);
  DomainMap map = build_domain_map(c, nullptr, n_s);
  BoundaryScalar H = curvature(c);
  InteriorScalar xi0 = InteriorScalar::Constant(n_s, n, 0.8);

  const double before = membrane_bc_residual(xi0, H, map, kappa).abs().maxCoeff();
  CHECK(before > 0.1);  // 0.8 * (-1) + 0.64
  InteriorScalar xi = project_initial_data(xi0, map, H, kappa, 1e-3, 1e-6);
  const double after = membrane_bc_residual(xi, H, map, kappa).abs().maxCoeff();
  CHECK(after < 1e-6 * 1.8);
  CHECK(xi.minCoeff() > 0.0);
  // interior barely touched by the boundary-layer correction
  CHECK(std::abs(xi(0, 0) - 0.8) < 0.05);

  SUBCASE("neumann variant for the impermeable condition") {
    InteriorScalar bad(n_s, n);
    for (int i = 0; i < n_s; ++i) bad.row(i).setConstant(0.5 + 0.3 * map.s[i] * map.s[i]);
    CHECK(normal_derivative(map, bad).abs().maxCoeff() > 0.5);
    InteriorScalar xin = project_initial_data(bad, map, H, kappa, 1e-3, 1e-6, 50, false);
    CHECK(normal_derivative(map, xin).abs().maxCoeff() < 1e-6 * 1.8);
  }
}
