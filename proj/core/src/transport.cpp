#include "osmoflow/transport.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <limits>
#include <vector>

#include "osmoflow/errors.hpp"

namespace osmoflow {

namespace {

// Single shared unknown at the polar origin.
inline int dof_of(int i, int j, int n_phi) { return i == 0 ? 0 : 1 + (i - 1) * n_phi + j; }

// Exact s-integral of the cell around vertex i (J = s r^2, so cell mass is
// this weight times r_j^2 h_phi).
inline double s_weight(int i, int n_s, double h) {
  if (i == 0) return h * h / 8.0;
  if (i == n_s - 1) return 0.5 * h - h * h / 8.0;
  return (i * h) * h;  // s_i * h
}

struct Metric {
  Eigen::ArrayXd g1;  // 1 + (r'/r)^2
  Eigen::ArrayXd g2;  // r'/r
};

Metric metric_of(const DomainMap& map) {
  Metric m;
  m.g2 = map.dr / map.r;
  m.g1 = 1.0 + m.g2 * m.g2;
  return m;
}

// d xi/d s at node (i,j); central in the interior, one-sided second order on
// the boundary ring. Row 0 is the origin.
double dxi_ds(const InteriorScalar& xi, int i, int j, double h_s) {
  const int n_s = int(xi.rows());
  if (i == 0) return 0.0;  // not used; origin handled by cell balance
  if (i == n_s - 1)
    return (3.0 * xi(i, j) - 4.0 * xi(i - 1, j) + xi(i - 2, j)) / (2.0 * h_s);
  return (xi(i + 1, j) - xi(i - 1, j)) / (2.0 * h_s);
}

double dxi_dphi(const InteriorScalar& xi, int i, int j, double h_phi) {
  const int n = int(xi.cols());
  return (xi(i, (j + 1) % n) - xi(i, (j + n - 1) % n)) / (2.0 * h_phi);
}

}  // namespace

double solute_mass(const DomainMap& map, const InteriorScalar& xi) {
  double m = 0.0;
  for (int i = 0; i < map.n_s; ++i) {
    const double ws = s_weight(i, map.n_s, map.h_s);
    for (int j = 0; j < map.n_phi; ++j)
      m += xi(i, j) * ws * map.r[j] * map.r[j] * map.h_phi;
  }
  return m;
}

InteriorScalar apply_laplacian(const DomainMap& map, const InteriorScalar& f) {
  const int n_s = map.n_s, n = map.n_phi;
  const double hs = map.h_s, hp = map.h_phi;
  Metric mt = metric_of(map);
  InteriorScalar div = InteriorScalar::Zero(n_s, n);

  // s-faces between rings i and i+1, plus the one-sided outer face so the
  // result is a plain discretization of the Laplacian everywhere.
  for (int i = 0; i <= n_s - 2; ++i) {
    const double sf = map.s[i] + 0.5 * hs;
    for (int j = 0; j < n; ++j) {
      const double xs = (f(i + 1, j) - f(i, j)) / hs;
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      const double xp = (f(i, jp) - f(i, jm) + f(i + 1, jp) - f(i + 1, jm)) / (4.0 * hp);
      const double F = hp * (sf * mt.g1[j] * xs - mt.g2[j] * xp);
      div(i, j) += F;
      div(i + 1, j) -= F;
    }
  }
  for (int j = 0; j < n; ++j) {  // outer face at s = 1
    const double xs = dxi_ds(f, n_s - 1, j, hs);
    const double xp = dxi_dphi(f, n_s - 1, j, hp);
    div(n_s - 1, j) += hp * (mt.g1[j] * xs - mt.g2[j] * xp);
  }
  // phi-faces
  for (int i = 1; i < n_s; ++i) {
    const double ext = (i == n_s - 1) ? 0.5 * hs : hs;
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n;
      const double xp = (f(i, jp) - f(i, j)) / hp;
      const double xs = 0.5 * (dxi_ds(f, i, j, hs) + dxi_ds(f, i, jp, hs));
      const double aps = -0.5 * (mt.g2[j] + mt.g2[jp]);
      const double F = ext * (aps * xs + xp / map.s[i]);
      div(i, j) += F;
      div(i, jp) -= F;
    }
  }

  InteriorScalar out(n_s, n);
  double origin_div = 0.0, origin_mass = 0.0;
  for (int j = 0; j < n; ++j) {
    origin_div += div(0, j);
    origin_mass += s_weight(0, n_s, hs) * map.r[j] * map.r[j] * hp;
  }
  for (int j = 0; j < n; ++j) out(0, j) = origin_div / origin_mass;
  for (int i = 1; i < n_s; ++i) {
    const double ws = s_weight(i, n_s, hs);
    for (int j = 0; j < n; ++j)
      out(i, j) = div(i, j) / (ws * map.r[j] * map.r[j] * hp);
  }
  return out;
}

InteriorVector gradient(const DomainMap& map, const InteriorScalar& f) {
  const int n_s = map.n_s, n = map.n_phi;
  InteriorVector g;
  g.x.resize(n_s, n);
  g.y.resize(n_s, n);
  for (int i = 1; i < n_s; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xs = dxi_ds(f, i, j, map.h_s);
      const double xp = dxi_dphi(f, i, j, map.h_phi);
      const double cr = xs / map.r[j];  // radial derivative
      const double ca = (xp - map.s[i] * (map.dr[j] / map.r[j]) * xs) / (map.s[i] * map.r[j]);
      const double p = 2.0 * M_PI * j / n;
      const double cs = std::cos(p), sn = std::sin(p);
      g.x(i, j) = cr * cs - ca * sn;
      g.y(i, j) = cr * sn + ca * cs;
    }
  }
  // Origin: least-squares plane through the first ring.
  Eigen::Matrix2d N = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector2d x = map.position(1, j);
    N += x * x.transpose();
    b += (f(1, j) - f(0, 0)) * x;
  }
  Eigen::Vector2d g0 = N.ldlt().solve(b);
  for (int j = 0; j < n; ++j) {
    g.x(0, j) = g0[0];
    g.y(0, j) = g0[1];
  }
  return g;
}

BoundaryScalar normal_derivative(const DomainMap& map, const InteriorScalar& f) {
  const int n = map.n_phi, n_s = map.n_s;
  Metric mt = metric_of(map);
  BoundaryScalar out(n);
  for (int j = 0; j < n; ++j) {
    const double xs = dxi_ds(f, n_s - 1, j, map.h_s);
    const double xp = dxi_dphi(f, n_s - 1, j, map.h_phi);
    out[j] = (mt.g1[j] * xs - mt.g2[j] * xp) / map.boundary_weight(j);
  }
  return out;
}

BoundaryScalar membrane_bc_residual(const InteriorScalar& xi, const BoundaryScalar& H,
                                    const DomainMap& map, double kappa) {
  BoundaryScalar B = normal_derivative(map, xi);
  BoundaryScalar trace = xi.row(map.n_s - 1).transpose().array();
  return B + kappa * trace * H + trace * trace;
}

namespace {

struct Assembler {
  std::vector<Eigen::Triplet<double>> trip;
  int n_phi;
  void add(int i, int j, int ci, int cj, double v) {
    trip.emplace_back(dof_of(i, j, n_phi), dof_of(ci, cj, n_phi), v);
  }
};

// Velocity components in the local polar basis at node (i,j).
inline void polar_components(const InteriorVector& u, int i, int j, int n, double& ur,
                             double& ut) {
  const double p = 2.0 * M_PI * j / n;
  const double cs = std::cos(p), sn = std::sin(p);
  ur = u.x(i, j) * cs + u.y(i, j) * sn;
  ut = -u.x(i, j) * sn + u.y(i, j) * cs;
}

}  // namespace

InteriorScalar transport_step(const InteriorScalar& xi, double dt, const TransportInput& in) {
  if (!in.map_old || !in.map_new) throw ConfigError("transport_step: maps required");
  const DomainMap& mo = *in.map_old;
  const DomainMap& mn = *in.map_new;
  const int n_s = mo.n_s, n = mo.n_phi;
  if (mn.n_s != n_s || mn.n_phi != n) throw ConfigError("transport_step: grid mismatch");
  if (xi.rows() != n_s || xi.cols() != n) throw ConfigError("transport_step: field mismatch");
  const double hs = mo.h_s, hp = mo.h_phi;

  // Accuracy guard on the advective time step (the solve itself is implicit).
  double vmax = 0.0;
  if (in.velocity || mo.has_rate) {
    for (int i = 0; i < n_s; ++i) {
      for (int j = 0; j < n; ++j) {
        double ux = in.velocity ? in.velocity->x(i, j) : 0.0;
        double uy = in.velocity ? in.velocity->y(i, j) : 0.0;
        Eigen::Vector2d w = mo.mesh_velocity(i, j);
        vmax = std::max(vmax, std::hypot(ux - w[0], uy - w[1]));
      }
    }
  }
  if (vmax > 0.0 && dt > in.cfl_factor * (hs * mo.r.minCoeff()) / vmax) {
    throw CFLViolation("transport dt " + std::to_string(dt) + " exceeds advective bound " +
                       std::to_string(in.cfl_factor * hs * mo.r.minCoeff() / vmax));
  }

  Metric mt = metric_of(mn);
  const int ndof = 1 + (n_s - 1) * n;
  Assembler as;
  as.n_phi = n;
  as.trip.reserve(size_t(ndof) * 12);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ndof);
  Eigen::VectorXd mass_new = Eigen::VectorXd::Zero(ndof);

  for (int i = 0; i < n_s; ++i) {
    const double ws = s_weight(i, n_s, hs);
    for (int j = 0; j < n; ++j) {
      const int d = dof_of(i, j, n);
      mass_new[d] += ws * mn.r[j] * mn.r[j] * hp;
      double m_old = ws * mo.r[j] * mo.r[j] * hp;
      rhs[d] += m_old / dt * xi(i, j);
      if (in.forcing) rhs[d] += ws * mn.r[j] * mn.r[j] * hp * (*in.forcing)(i, j);
    }
  }
  for (int d = 0; d < ndof; ++d) {
    as.trip.emplace_back(d, d, mass_new[d] / dt);
  }

  // Membrane faces at s = 1 carry zero combined flux: nothing to assemble.
  // s-faces between rings i and i+1.
  for (int i = 0; i <= n_s - 2; ++i) {
    const double sf = mo.s[i] + 0.5 * hs;
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      // diffusive: F = hp * (a_ss (x_{i+1}-x_i)/hs - g2 * avg dphi)
      const double ad = hp * sf * mt.g1[j] / hs;
      const double ax = -mt.g2[j] / 4.0;
      // flux F enters cell i with +, cell i+1 with -; implicit => move to LHS
      auto flux = [&](int ci, int cj, double coef) {
        as.add(i, j, ci, cj, -coef);
        as.add(i + 1, j, ci, cj, coef);
      };
      flux(i + 1, j, ad);
      flux(i, j, -ad);
      flux(i, jp, ax);
      flux(i, jm, -ax);
      flux(i + 1, jp, ax);
      flux(i + 1, jm, -ax);
      // convective: q = J (u - w) . grad s integrated over the face
      double q = 0.0;
      if (in.velocity) {
        double ur0, ut0, ur1, ut1;
        polar_components(*in.velocity, i, j, n, ur0, ut0);
        polar_components(*in.velocity, i + 1, j, n, ur1, ut1);
        const double ur = 0.5 * (ur0 + ur1), ut = 0.5 * (ut0 + ut1);
        q += sf * (mo.r[j] * ur - mo.dr[j] * ut);
      }
      q -= sf * sf * mo.r[j] * mo.rate[j];
      q *= hp;
      // C = q * (x_i + x_{i+1})/2, subtracted from the divergence
      flux(i, j, -0.5 * q);
      flux(i + 1, j, -0.5 * q);
    }
  }
  // phi-faces between columns j and j+1 (rows 1..n_s-1).
  for (int i = 1; i < n_s; ++i) {
    const double ext = (i == n_s - 1) ? 0.5 * hs : hs;
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n;
      auto flux = [&](int ci, int cj, double coef) {
        as.add(i, j, ci, cj, -coef);
        as.add(i, jp, ci, cj, coef);
      };
      // diffusive
      const double app = ext / (mn.s[i] * hp);
      flux(i, jp, app);
      flux(i, j, -app);
      const double aps = -0.5 * (mt.g2[j] + mt.g2[jp]) * ext;
      // d xi/ds at the face: average of the nodal stencils
      auto add_dxds = [&](int jj, double w) {
        if (i == n_s - 1) {
          flux(i, jj, w * 3.0 / (2.0 * hs));
          flux(i - 1, jj, -w * 4.0 / (2.0 * hs));
          flux(i - 2, jj, w * 1.0 / (2.0 * hs));
        } else {
          flux(i + 1, jj, w / (2.0 * hs));
          flux(i - 1, jj, -w / (2.0 * hs));
        }
      };
      add_dxds(j, 0.5 * aps);
      add_dxds(jp, 0.5 * aps);
      // convective: C = r (u . e_phi) * xi at the face
      if (in.velocity) {
        double urj, utj, urp, utp;
        polar_components(*in.velocity, i, j, n, urj, utj);
        polar_components(*in.velocity, i, jp, n, urp, utp);
        const double q = ext * 0.5 * (mo.r[j] * utj + mo.r[jp] * utp);
        flux(i, j, -0.5 * q);
        flux(i, jp, -0.5 * q);
      }
    }
  }

  Eigen::SparseMatrix<double> A(ndof, ndof);
  A.setFromTriplets(as.trip.begin(), as.trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw SingularSystem("transport system factorization failed");
  Eigen::VectorXd sol = solver.solve(rhs);

  InteriorScalar out(n_s, n);
  for (int j = 0; j < n; ++j) out(0, j) = sol[0];
  for (int i = 1; i < n_s; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = sol[dof_of(i, j, n)];

  const double thr = 10.0 * std::numeric_limits<double>::epsilon() *
                     std::max(1.0, xi.maxCoeff());
  if ((out.array() < -thr).any()) {
    throw PositivityLoss("concentration negative beyond tolerance after step, min " +
                         std::to_string(out.minCoeff()));
  }
  out = out.cwiseMax(0.0);
  return out;
}

InteriorScalar project_initial_data(const InteriorScalar& xi0, const DomainMap& map,
                                    const BoundaryScalar& H, double kappa, double dt_reg,
                                    double tol, int max_iter, bool robin) {
  const int n_s = map.n_s, n = map.n_phi;
  const double hs = map.h_s, hp = map.h_phi;
  Metric mt = metric_of(map);
  const int ndof = 1 + (n_s - 1) * n;

  auto defect = [&](const InteriorScalar& c) {
    if (robin) return membrane_bc_residual(c, H, map, kappa).abs().maxCoeff();
    return normal_derivative(map, c).abs().maxCoeff();
  };

  InteriorScalar cur = xi0;
  const double scale = 1.0 + xi0.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < max_iter; ++iter) {
    if (defect(cur) <= tol * scale) return cur;

    Assembler as;
    as.n_phi = n;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ndof);
    // Interior rows: m xi - dt_reg * div(diffusive flux) = m xi0.
    for (int i = 0; i < n_s - 1; ++i) {
      const double ws = s_weight(i, n_s, hs);
      for (int j = 0; j < n; ++j) {
        const int d = dof_of(i, j, n);
        const double m = ws * map.r[j] * map.r[j] * hp;
        as.trip.emplace_back(d, d, m);
        rhs[d] += m * xi0(i, j);
      }
    }
    for (int i = 0; i <= n_s - 2; ++i) {
      const double sf = map.s[i] + 0.5 * hs;
      for (int j = 0; j < n; ++j) {
        const int jp = (j + 1) % n, jm = (j + n - 1) % n;
        const double ad = hp * sf * mt.g1[j] / hs;
        const double ax = -mt.g2[j] / 4.0;
        auto flux = [&](int ci, int cj, double coef) {
          // only interior rows receive flux divergences
          if (i < n_s - 1) as.add(i, j, ci, cj, -dt_reg * coef);
          if (i + 1 < n_s - 1) as.add(i + 1, j, ci, cj, dt_reg * coef);
        };
        flux(i + 1, j, ad);
        flux(i, j, -ad);
        flux(i, jp, ax);
        flux(i, jm, -ax);
        flux(i + 1, jp, ax);
        flux(i + 1, jm, -ax);
      }
    }
    for (int i = 1; i < n_s - 1; ++i) {
      for (int j = 0; j < n; ++j) {
        const int jp = (j + 1) % n;
        auto flux = [&](int ci, int cj, double coef) {
          as.add(i, j, ci, cj, -dt_reg * coef);
          as.add(i, jp, ci, cj, dt_reg * coef);
        };
        const double app = hs / (map.s[i] * hp);
        flux(i, jp, app);
        flux(i, j, -app);
        const double aps = -0.5 * (mt.g2[j] + mt.g2[jp]) * hs;
        auto add_dxds = [&](int jj, double w) {
          flux(i + 1, jj, w / (2.0 * hs));
          flux(i - 1, jj, -w / (2.0 * hs));
        };
        add_dxds(j, 0.5 * aps);
        add_dxds(jp, 0.5 * aps);
      }
    }
    // Boundary rows: the Robin condition with the quadratic factor lagged,
    // B xi + (kappa H + xi_lag) xi = 0, B by one-sided differences.
    for (int j = 0; j < n; ++j) {
      const int i = n_s - 1;
      const int d = dof_of(i, j, n);
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      const double w = map.boundary_weight(j);
      as.add(i, j, i, j, mt.g1[j] * 3.0 / (2.0 * hs) / w);
      as.add(i, j, i - 1, j, -mt.g1[j] * 4.0 / (2.0 * hs) / w);
      as.add(i, j, i - 2, j, mt.g1[j] * 1.0 / (2.0 * hs) / w);
      as.add(i, j, i, jp, -mt.g2[j] / (2.0 * hp) / w);
      as.add(i, j, i, jm, mt.g2[j] / (2.0 * hp) / w);
      if (robin) as.add(i, j, i, j, kappa * H[j] + cur(i, j));
      rhs[d] = 0.0;
    }

    Eigen::SparseMatrix<double> A(ndof, ndof);
    A.setFromTriplets(as.trip.begin(), as.trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
      throw SingularSystem("initial-data projection failed to factorize");
    Eigen::VectorXd sol = solver.solve(rhs);
    for (int j = 0; j < n; ++j) cur(0, j) = sol[0];
    for (int i = 1; i < n_s; ++i)
      for (int j = 0; j < n; ++j) cur(i, j) = sol[dof_of(i, j, n)];
  }
  if (defect(cur) > tol * scale)
    throw SimulationError("initial-data projection did not converge");
  return cur;
}

}  // namespace osmoflow
