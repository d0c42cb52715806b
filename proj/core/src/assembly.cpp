#include "melod/assembly.hpp"

#include <array>
#include <vector>

#include "melod/csv.hpp"

namespace melod {

namespace {

struct ElementGeometry {
  double area;
  double gx[3];  // d(phi_i)/dx
  double gy[3];  // d(phi_i)/dy
};

ElementGeometry element_geometry(const Grid& g, int tri) {
  const auto& t = g.triangles[tri];
  const Vec2 p0 = g.nodes[t[0]], p1 = g.nodes[t[1]], p2 = g.nodes[t[2]];
  ElementGeometry e;
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  e.area = 0.5 * det;
  e.gx[0] = (p1.y - p2.y) / det;
  e.gx[1] = (p2.y - p0.y) / det;
  e.gx[2] = (p0.y - p1.y) / det;
  e.gy[0] = (p2.x - p1.x) / det;
  e.gy[1] = (p0.x - p2.x) / det;
  e.gy[2] = (p1.x - p0.x) / det;
  return e;
}

}  // namespace

BlockSystem assemble_block_system(const NestedGrid& grid, const CoefficientField& coeffs) {
  coeffs.validate(grid);

  const Grid& fg = grid.fine;
  const int ni = fg.interior_count();

  BlockSystem bs;
  bs.n_u = 2 * ni;
  bs.n_theta = ni;

  using T = Eigen::Triplet<double>;
  std::vector<T> t1, t2, t4, tm;
  t1.reserve(static_cast<std::size_t>(36) * fg.triangle_count());
  t2.reserve(static_cast<std::size_t>(18) * fg.triangle_count());
  t4.reserve(static_cast<std::size_t>(9) * fg.triangle_count());
  tm.reserve(static_cast<std::size_t>(9) * fg.triangle_count());

  for (int tri = 0; tri < fg.triangle_count(); ++tri) {
    const auto e = element_geometry(fg, tri);
    const auto& vtx = fg.triangles[tri];
    const double lam = coeffs.lambda[tri];
    const double mu = coeffs.mu[tri];
    const double kap = coeffs.kappa[tri];
    const double alp = coeffs.alpha[tri];

    int uidx[3];  // interior u-dof base per vertex, -1 on boundary
    int qidx[3];  // interior theta dof per vertex
    for (int i = 0; i < 3; ++i) {
      const int q = fg.interior_index[vtx[i]];
      uidx[i] = q >= 0 ? 2 * q : -1;
      qidx[i] = q;
    }

    // sigma(u):eps(v) = eps_v' * D * eps_u with engineering shear strain.
    const double d00 = lam + 2.0 * mu;
    for (int i = 0; i < 3; ++i) {
      if (uidx[i] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (uidx[j] < 0) continue;
        const double kxx = e.area * (d00 * e.gx[i] * e.gx[j] + mu * e.gy[i] * e.gy[j]);
        const double kxy = e.area * (lam * e.gx[i] * e.gy[j] + mu * e.gy[i] * e.gx[j]);
        const double kyx = e.area * (lam * e.gy[i] * e.gx[j] + mu * e.gx[i] * e.gy[j]);
        const double kyy = e.area * (d00 * e.gy[i] * e.gy[j] + mu * e.gx[i] * e.gx[j]);
        t1.emplace_back(uidx[i], uidx[j], kxx);
        t1.emplace_back(uidx[i], uidx[j] + 1, kxy);
        t1.emplace_back(uidx[i] + 1, uidx[j], kyx);
        t1.emplace_back(uidx[i] + 1, uidx[j] + 1, kyy);
      }
    }

    // b(v_u, theta) = alpha * div(v_u) * integral(theta hat) = alpha*(A/3)*grad.
    const double third = alp * e.area / 3.0;
    for (int i = 0; i < 3; ++i) {
      if (uidx[i] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (qidx[j] < 0) continue;
        t2.emplace_back(uidx[i], qidx[j], third * e.gx[i]);
        t2.emplace_back(uidx[i] + 1, qidx[j], third * e.gy[i]);
      }
    }

    for (int i = 0; i < 3; ++i) {
      if (qidx[i] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (qidx[j] < 0) continue;
        t4.emplace_back(qidx[i], qidx[j],
                        kap * e.area * (e.gx[i] * e.gx[j] + e.gy[i] * e.gy[j]));
        tm.emplace_back(qidx[i], qidx[j], alp * e.area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }

  bs.A1.resize(bs.n_u, bs.n_u);
  bs.A1.setFromTriplets(t1.begin(), t1.end());
  bs.A2.resize(bs.n_u, bs.n_theta);
  bs.A2.setFromTriplets(t2.begin(), t2.end());
  bs.A4.resize(bs.n_theta, bs.n_theta);
  bs.A4.setFromTriplets(t4.begin(), t4.end());
  bs.Mprime.resize(bs.n_theta, bs.n_theta);
  bs.Mprime.setFromTriplets(tm.begin(), tm.end());
  return bs;
}

void assemble_loads_full(const NestedGrid& grid, const BodyForce& f, const HeatSource& g,
                         double t, Eigen::VectorXd& F_full, Eigen::VectorXd& G_full) {
  const Grid& fg = grid.fine;
  F_full.setZero(2 * fg.node_count());
  G_full.setZero(fg.node_count());
  for (int tri = 0; tri < fg.triangle_count(); ++tri) {
    const double w = triangle_area(fg, tri) / 3.0;
    for (int v : fg.triangles[tri]) {
      const Vec2 p = fg.nodes[v];
      const auto fv = f(p.x, p.y, t);
      F_full[2 * v] += w * fv[0];
      F_full[2 * v + 1] += w * fv[1];
      G_full[v] += w * g(p.x, p.y, t);
    }
  }
}

LoadVectors assemble_loads(const NestedGrid& grid, const BodyForce& f, const HeatSource& g,
                           double t) {
  Eigen::VectorXd F_full, G_full;
  assemble_loads_full(grid, f, g, t, F_full, G_full);

  const Grid& fg = grid.fine;
  LoadVectors lv;
  lv.F.resize(2 * fg.interior_count());
  lv.G.resize(fg.interior_count());
  for (int q = 0; q < fg.interior_count(); ++q) {
    const int v = fg.interior_nodes[q];
    lv.F[2 * q] = F_full[2 * v];
    lv.F[2 * q + 1] = F_full[2 * v + 1];
    lv.G[q] = G_full[v];
  }
  return lv;
}

std::pair<SpMat, SpMat> compose_time_operators(const BlockSystem& bs, double tau) {
  if (!(tau > 0.0)) throw Error("compose_time_operators: tau must be positive");

  const int nu = bs.n_u, nt = bs.n_theta, n = nu + nt;
  using T = Eigen::Triplet<double>;
  std::vector<T> ta, tb;

  auto add_block = [](std::vector<T>& dst, const SpMat& m, int row0, int col0, double scale) {
    for (int c = 0; c < m.outerSize(); ++c)
      for (SpMat::InnerIterator it(m, c); it; ++it)
        dst.emplace_back(row0 + static_cast<int>(it.row()), col0 + c, scale * it.value());
  };

  const SpMat A3 = bs.a3();
  add_block(ta, bs.A1, 0, 0, 1.0);
  add_block(ta, bs.A2, 0, nu, -1.0);
  add_block(ta, A3, nu, 0, 1.0);
  add_block(ta, bs.Mprime, nu, nu, 1.0);
  add_block(ta, bs.A4, nu, nu, tau);

  add_block(tb, A3, nu, 0, 1.0);
  add_block(tb, bs.Mprime, nu, nu, 1.0);

  SpMat A(n, n), B(n, n);
  A.setFromTriplets(ta.begin(), ta.end());
  B.setFromTriplets(tb.begin(), tb.end());
  return {std::move(A), std::move(B)};
}

SpMat assemble_scalar_mass(const NestedGrid& grid) {
  const Grid& fg = grid.fine;
  using T = Eigen::Triplet<double>;
  std::vector<T> tm;
  tm.reserve(static_cast<std::size_t>(9) * fg.triangle_count());
  for (int tri = 0; tri < fg.triangle_count(); ++tri) {
    const double a = triangle_area(fg, tri);
    const auto& vtx = fg.triangles[tri];
    for (int i = 0; i < 3; ++i) {
      const int qi = fg.interior_index[vtx[i]];
      if (qi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int qj = fg.interior_index[vtx[j]];
        if (qj < 0) continue;
        tm.emplace_back(qi, qj, a / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SpMat m(fg.interior_count(), fg.interior_count());
  m.setFromTriplets(tm.begin(), tm.end());
  return m;
}

std::string coo_text(const SpMat& m) {
  std::string out;
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SpMat::InnerIterator it(m, c); it; ++it) {
      out += std::to_string(it.row());
      out += ' ';
      out += std::to_string(c);
      out += ' ';
      out += csv_num(it.value());
      out += '\n';
    }
  }
  return out;
}

}  // namespace melod
