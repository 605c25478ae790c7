#include <cmath>

#include "doctest.h"
#include "osmoflow/fourier.hpp"

using namespace osmoflow;

namespace {

Eigen::ArrayXd sample(int n, double (*f)(double)) {
  Eigen::ArrayXd out(n);
  for (int j = 0; j < n; ++j) out[j] = f(2.0 * M_PI * j / n);
  return out;
}

}  // namespace

TEST_CASE("periodic derivative of trigonometric data") {
  const int n = 64;
  Eigen::ArrayXd f(n), df(n), ddf(n);
  for (int j = 0; j < n; ++j) {
    const double p = 2.0 * M_PI * j / n;
    f[j] = std::sin(3.0 * p) + 0.5 * std::cos(5.0 * p);
    df[j] = 3.0 * std::cos(3.0 * p) - 2.5 * std::sin(5.0 * p);
    ddf[j] = -9.0 * std::sin(3.0 * p) - 12.5 * std::cos(5.0 * p);
  }

  SUBCASE("spectral is exact for band-limited data") {
    CHECK((periodic_derivative(f, 1, DerivScheme::Spectral) - df).abs().maxCoeff() < 1e-11);
    CHECK((periodic_derivative(f, 2, DerivScheme::Spectral) - ddf).abs().maxCoeff() < 1e-10);
  }

  SUBCASE("fd4 is accurate at this resolution") {
    CHECK((periodic_derivative(f, 1, DerivScheme::Fd4) - df).abs().maxCoeff() < 2e-2);
    CHECK((periodic_derivative(f, 2, DerivScheme::Fd4) - ddf).abs().maxCoeff() < 1e-1);
  }
}

TEST_CASE("fd4 convergence order is four") {
  auto g = [](double p) { return std::exp(std::sin(p)); };
  auto dg = [](double p) { return std::cos(p) * std::exp(std::sin(p)); };
  double err[2];
  int ns[2] = {64, 128};
  for (int k = 0; k < 2; ++k) {
    const int n = ns[k];
    Eigen::ArrayXd f(n), ref(n);
    for (int j = 0; j < n; ++j) {
      const double p = 2.0 * M_PI * j / n;
      f[j] = g(p);
      ref[j] = dg(p);
    }
    err[k] = (periodic_derivative(f, 1, DerivScheme::Fd4) - ref).abs().maxCoeff();
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}

TEST_CASE("derivative input validation") {
  Eigen::ArrayXd tiny = sample(4, [](double p) { return std::sin(p); });
  CHECK_THROWS(periodic_derivative(tiny, 1, DerivScheme::Fd4));
  Eigen::ArrayXd ok = sample(16, [](double p) { return std::sin(p); });
  CHECK_THROWS(periodic_derivative(ok, 3, DerivScheme::Fd4));
}
