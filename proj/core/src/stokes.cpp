#include "osmoflow/stokes.hpp"

#include <cstdlib>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "osmoflow/errors.hpp"

namespace osmoflow {

namespace {

int thread_cap() {
  static int cap = [] {
    if (const char* env = std::getenv("OSMOFLOW_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    return 1;
  }();
  return cap;
}

// Row-partitioned parallel loop; each row is summed by exactly one thread in a
// fixed order, so results do not depend on the thread count.
template <class F>
void parallel_rows(int n, F&& body) {
  const int nt = std::min(thread_cap(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct CurveNodes {
  int n;
  double h;
  std::vector<Eigen::Vector2d> x, tangent, nrm;
  Eigen::ArrayXd speed;  // |x'(t)| = sqrt(r^2 + r'^2)
  Eigen::ArrayXd H;      // curvature, sign convention H = -1/R on a circle
};

CurveNodes curve_nodes(const PolarCurve& curve, DerivScheme scheme) {
  CurveNodes cn;
  cn.n = curve.n();
  cn.h = 2.0 * M_PI / cn.n;
  Eigen::ArrayXd rp = periodic_derivative(curve.r, 1, scheme);
  cn.H = curvature(curve, scheme);
  cn.speed = (curve.r * curve.r + rp * rp).sqrt();
  cn.x.resize(cn.n);
  cn.tangent.resize(cn.n);
  cn.nrm.resize(cn.n);
  for (int j = 0; j < cn.n; ++j) {
    const double p = curve.phi(j);
    const double cs = std::cos(p), sn = std::sin(p);
    cn.x[j] = {curve.r[j] * cs, curve.r[j] * sn};
    Eigen::Vector2d xp(rp[j] * cs - curve.r[j] * sn, rp[j] * sn + curve.r[j] * cs);
    cn.tangent[j] = xp / cn.speed[j];
    cn.nrm[j] = {cn.tangent[j][1], -cn.tangent[j][0]};
  }
  return cn;
}

std::mutex g_weights_mutex;

}  // namespace

Eigen::ArrayXd log_kernel_weights(int n) {
  if (n % 2 != 0) throw ConfigError("log kernel quadrature needs even n");
  static std::map<int, Eigen::ArrayXd> cache;
  std::lock_guard<std::mutex> lock(g_weights_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::ArrayXd R(n);
  for (int d = 0; d < n; ++d) {
    double acc = 0.0;
    for (int m = 1; m < n / 2; ++m) acc += std::cos(2.0 * M_PI * m * d / n) / m;
    R[d] = -(4.0 * M_PI / n) * acc - (4.0 * M_PI / (n * n)) * ((d % 2 == 0) ? 1.0 : -1.0);
  }
  cache.emplace(n, R);
  return R;
}

Eigen::Matrix2d stokeslet_velocity(const Eigen::Vector2d& d) {
  const double r2 = d.squaredNorm();
  const double pref = 1.0 / (2.0 * M_PI);  // 1/(4 pi mu), mu = 1/2
  Eigen::Matrix2d G = pref * (d * d.transpose()) / r2;
  const double lg = -pref * 0.5 * std::log(r2);
  G(0, 0) += lg;
  G(1, 1) += lg;
  return G;
}

Eigen::Vector2d stokeslet_pressure(const Eigen::Vector2d& d) {
  return d / (2.0 * M_PI * d.squaredNorm());
}

Eigen::Matrix2d stokeslet_traction(const Eigen::Vector2d& d, const Eigen::Vector2d& nx) {
  const double r2 = d.squaredNorm();
  const double dn = d.dot(nx);
  return (-1.0 / M_PI) * (dn / (r2 * r2)) * (d * d.transpose());
}

Eigen::Vector3d solvability_check(const PolarCurve& curve, const BoundaryVector& traction,
                                  DerivScheme scheme) {
  curve.require_valid();
  if (traction.cols() != curve.n()) throw ConfigError("traction length mismatch");
  Measures m = measures(curve, scheme);
  Eigen::Vector3d res = Eigen::Vector3d::Zero();
  for (int j = 0; j < curve.n(); ++j) {
    const Eigen::Vector2d x = curve.point(j);
    const double w = m.arclength_weights[j];
    res[0] += traction(0, j) * w;
    res[1] += traction(1, j) * w;
    res[2] += (-x[1] * traction(0, j) + x[0] * traction(1, j)) * w;
  }
  return res;
}

BoundaryVector single_layer_velocity(const PolarCurve& curve, const BoundaryVector& density,
                                     const Eigen::Matrix2Xd& targets, DerivScheme scheme) {
  CurveNodes cn = curve_nodes(curve, scheme);
  BoundaryVector out(2, targets.cols());
  parallel_rows(int(targets.cols()), [&](int i) {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    const Eigen::Vector2d xt = targets.col(i);
    for (int j = 0; j < cn.n; ++j) {
      acc += stokeslet_velocity(xt - cn.x[j]) * density.col(j) * (cn.speed[j] * cn.h);
    }
    out.col(i) = acc;
  });
  return out;
}

namespace {

// Boundary velocity of the single layer: Kress split of the log part,
// trapezoid for the smooth remainder.
BoundaryVector boundary_velocity_of(const CurveNodes& cn, const BoundaryVector& psi) {
  const int n = cn.n;
  const Eigen::ArrayXd R = log_kernel_weights(n);
  const double pref = 1.0 / (2.0 * M_PI);
  BoundaryVector u(2, n);
  parallel_rows(n, [&](int i) {
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int j = 0; j < n; ++j) {
      const double wj = cn.speed[j];
      // coefficient of ln(4 sin^2((t_i-t_j)/2)) is -pref/2 * wj * I
      acc += (R[std::abs(i - j)] * (-0.5 * pref * wj)) * psi.col(j);
      Eigen::Matrix2d S;
      if (i == j) {
        S = pref * (cn.tangent[i] * cn.tangent[i].transpose());
        const double diag = -pref * std::log(cn.speed[i]);
        S(0, 0) += diag;
        S(1, 1) += diag;
      } else {
        const Eigen::Vector2d d = cn.x[i] - cn.x[j];
        const double r2 = d.squaredNorm();
        const double sn = 2.0 * std::sin(0.5 * cn.h * (i - j));
        S = pref * (d * d.transpose()) / r2;
        const double sm = -0.5 * pref * std::log(r2 / (sn * sn));
        S(0, 0) += sm;
        S(1, 1) += sm;
      }
      acc += (S * psi.col(j)) * (wj * cn.h);
    }
    u.col(i) = acc;
  });
  return u;
}

}  // namespace

StokesSolution solve_traction(const PolarCurve& curve, const BoundaryVector& traction,
                              const DomainMap& map, const StokesOptions& opts) {
  curve.require_valid();
  const int n = curve.n();
  if (n % 2 != 0) throw ConfigError("stokes solver needs even n_phi");
  if (traction.cols() != n) throw ConfigError("traction length mismatch");

  const double scale = 1.0 + traction.cwiseAbs().maxCoeff();
  Eigen::Vector3d compat = solvability_check(curve, traction, opts.scheme);
  if (compat.cwiseAbs().maxCoeff() > opts.solvability_tol * scale) {
    throw IncompatibleData("traction data violates rigid-body compatibility: residuals (" +
                           std::to_string(compat[0]) + ", " + std::to_string(compat[1]) + ", " +
                           std::to_string(compat[2]) + ")");
  }

  CurveNodes cn = curve_nodes(curve, opts.scheme);

  // Interior traction of the single layer: (1/2) psi + K' psi. The adjoint
  // double-layer kernel is smooth; its diagonal limit is H/(2 pi) * t t^T.
  const int dim = 2 * n + 3;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  parallel_rows(n, [&](int i) {
    for (int j = 0; j < n; ++j) {
      Eigen::Matrix2d K;
      if (i == j) {
        K = (cn.H[i] / (2.0 * M_PI)) * (cn.tangent[i] * cn.tangent[i].transpose());
      } else {
        K = stokeslet_traction(cn.x[i] - cn.x[j], cn.nrm[i]);
      }
      A.block<2, 2>(2 * i, 2 * j) = K * (cn.speed[j] * cn.h);
    }
    A(2 * i, 2 * i) += 0.5;
    A(2 * i + 1, 2 * i + 1) += 0.5;
  });

  // Bordering: range completion by the rigid velocities, nullspace fixed by
  // the constraints that the density has no rigid moments.
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d x = cn.x[i];
    const double w = cn.speed[i] * cn.h;
    const double phi[3][2] = {{1.0, 0.0}, {0.0, 1.0}, {-x[1], x[0]}};
    for (int k = 0; k < 3; ++k) {
      A(2 * i, 2 * n + k) = phi[k][0];
      A(2 * i + 1, 2 * n + k) = phi[k][1];
      A(2 * n + k, 2 * i) = phi[k][0] * w;
      A(2 * n + k, 2 * i + 1) = phi[k][1] * w;
    }
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < n; ++i) {
    rhs[2 * i] = traction(0, i);
    rhs[2 * i + 1] = traction(1, i);
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-13)) {
    throw SingularSystem("stokes system ill-conditioned, rcond estimate " + std::to_string(rc));
  }
  Eigen::VectorXd sol_vec = lu.solve(rhs);

  StokesSolution sol;
  sol.layer_density.resize(2, n);
  for (int i = 0; i < n; ++i) {
    sol.layer_density(0, i) = sol_vec[2 * i];
    sol.layer_density(1, i) = sol_vec[2 * i + 1];
  }
  sol.border_multipliers = sol_vec.tail<3>();

  sol.boundary_velocity = boundary_velocity_of(cn, sol.layer_density);

  // Interior velocity on the map grid; the boundary row carries the trace
  // (the single-layer velocity is continuous across the curve) and rings
  // within one boundary mesh width are filled by interpolation in s.
  const int n_s = map.n_s;
  InteriorVector ui;
  ui.x.setZero(n_s, n);
  ui.y.setZero(n_s, n);
  parallel_rows(n, [&](int j) {
    const double delta = cn.h * cn.speed[j];  // boundary node spacing
    int i_last = n_s - 2;
    while (i_last > 0 && (1.0 - map.s[i_last]) * curve.r[j] < delta) --i_last;
    for (int i = 0; i <= i_last; ++i) {
      Eigen::Vector2d xt = map.position(i, j);
      Eigen::Vector2d acc = Eigen::Vector2d::Zero();
      for (int k = 0; k < n; ++k) {
        acc += stokeslet_velocity(xt - cn.x[k]) * sol.layer_density.col(k) *
               (cn.speed[k] * cn.h);
      }
      ui.x(i, j) = acc[0];
      ui.y(i, j) = acc[1];
    }
    ui.x(n_s - 1, j) = sol.boundary_velocity(0, j);
    ui.y(n_s - 1, j) = sol.boundary_velocity(1, j);
    const double s0 = map.s[i_last];
    for (int i = i_last + 1; i < n_s - 1; ++i) {
      const double a = (map.s[i] - s0) / (1.0 - s0);
      ui.x(i, j) = (1.0 - a) * ui.x(i_last, j) + a * ui.x(n_s - 1, j);
      ui.y(i, j) = (1.0 - a) * ui.y(i_last, j) + a * ui.y(n_s - 1, j);
    }
  });
  // The origin row must be single valued; all columns evaluate the same point.
  for (int j = 1; j < n; ++j) {
    ui.x(0, j) = ui.x(0, 0);
    ui.y(0, j) = ui.y(0, 0);
  }

  // Area-weighted rigid projection: subtract the rigid field so that the
  // discrete moments of u over the domain vanish.
  auto cell_weight = [&](int i, int j) {
    double ws;
    if (i == 0)
      ws = map.h_s * map.h_s / 8.0;
    else if (i == n_s - 1)
      ws = 0.5 * map.h_s - map.h_s * map.h_s / 8.0;
    else
      ws = map.s[i] * map.h_s;
    return ws * curve.r[j] * curve.r[j] * map.h_phi;
  };
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d mom = Eigen::Vector3d::Zero();
  for (int i = 0; i < n_s; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = cell_weight(i, j);
      const Eigen::Vector2d x = map.position(i, j);
      const Eigen::Vector2d u(ui.x(i, j), ui.y(i, j));
      const Eigen::Vector2d phi[3] = {{1.0, 0.0}, {0.0, 1.0}, {-x[1], x[0]}};
      for (int k = 0; k < 3; ++k) {
        mom[k] += w * u.dot(phi[k]);
        for (int l = 0; l < 3; ++l) gram(k, l) += w * phi[k].dot(phi[l]);
      }
    }
  }
  sol.rigid_coeffs = gram.ldlt().solve(mom);
  auto rigid_field = [&](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(sol.rigid_coeffs[0] - sol.rigid_coeffs[2] * x[1],
                           sol.rigid_coeffs[1] + sol.rigid_coeffs[2] * x[0]);
  };
  for (int i = 0; i < n_s; ++i) {
    for (int j = 0; j < n; ++j) {
      Eigen::Vector2d rg = rigid_field(map.position(i, j));
      ui.x(i, j) -= rg[0];
      ui.y(i, j) -= rg[1];
    }
  }
  for (int j = 0; j < n; ++j) {
    sol.boundary_velocity.col(j) -= rigid_field(cn.x[j]);
  }
  sol.interior_velocity = std::move(ui);

  // Post-projection moments, flux and pressure diagnostics.
  for (int i = 0; i < n_s; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = cell_weight(i, j);
      const Eigen::Vector2d x = map.position(i, j);
      const Eigen::Vector2d u(sol.interior_velocity.x(i, j), sol.interior_velocity.y(i, j));
      sol.rigid_components[0] += w * u[0];
      sol.rigid_components[1] += w * u[1];
      sol.rigid_components[2] += w * (-x[1] * u[0] + x[0] * u[1]);
    }
  }
  for (int j = 0; j < n; ++j) {
    sol.flux_residual += sol.boundary_velocity.col(j).dot(cn.nrm[j]) * cn.speed[j] * cn.h;
  }
  double p0 = 0.0;
  for (int j = 0; j < n; ++j) {
    p0 += stokeslet_pressure(-cn.x[j]).dot(sol.layer_density.col(j)) * cn.speed[j] * cn.h;
  }
  sol.effective_pressure_const = p0;
  return sol;
}

InteriorVector evaluate_interior(const PolarCurve& curve, const StokesSolution& sol,
                                 const DomainMap& map) {
  if (sol.interior_velocity.x.rows() == map.n_s && sol.interior_velocity.x.cols() == map.n_phi)
    return sol.interior_velocity;
  // Different grid: re-evaluate directly and subtract the stored rigid part.
  const int n_s = map.n_s, n = map.n_phi;
  Eigen::Matrix2Xd targets(2, n_s * n);
  for (int i = 0; i < n_s; ++i)
    for (int j = 0; j < n; ++j) targets.col(i * n + j) = map.position(i, j);
  BoundaryVector vals = single_layer_velocity(curve, sol.layer_density, targets);
  InteriorVector out;
  out.x.resize(n_s, n);
  out.y.resize(n_s, n);
  for (int i = 0; i < n_s; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector2d x = map.position(i, j);
      out.x(i, j) = vals(0, i * n + j) - (sol.rigid_coeffs[0] - sol.rigid_coeffs[2] * x[1]);
      out.y(i, j) = vals(1, i * n + j) - (sol.rigid_coeffs[1] + sol.rigid_coeffs[2] * x[0]);
    }
  }
  return out;
}

}  // namespace osmoflow
