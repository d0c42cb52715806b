#include "melod/grid.hpp"

#include <algorithm>
#include <cmath>

namespace melod {

namespace {

Grid build_grid(int level) {
  Grid g;
  g.level = level;
  g.n = 1 << level;
  g.h = std::sqrt(2.0) / static_cast<double>(g.n);

  const int np = g.n + 1;
  g.nodes.resize(static_cast<std::size_t>(np) * np);
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < np; ++i)
      g.nodes[g.node_id(i, j)] = {static_cast<double>(i) / g.n,
                                  static_cast<double>(j) / g.n};

  g.triangles.reserve(static_cast<std::size_t>(2) * g.n * g.n);
  for (int cy = 0; cy < g.n; ++cy) {
    for (int cx = 0; cx < g.n; ++cx) {
      const int v00 = g.node_id(cx, cy);
      const int v10 = g.node_id(cx + 1, cy);
      const int v01 = g.node_id(cx, cy + 1);
      const int v11 = g.node_id(cx + 1, cy + 1);
      g.triangles.push_back({v00, v10, v11});  // below the diagonal
      g.triangles.push_back({v00, v11, v01});  // above the diagonal
    }
  }

  g.interior.resize(g.nodes.size());
  g.interior_index.assign(g.nodes.size(), -1);
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      const int id = g.node_id(i, j);
      const bool in = i > 0 && i < g.n && j > 0 && j < g.n;
      g.interior[id] = in;
      if (in) {
        g.interior_index[id] = static_cast<int>(g.interior_nodes.size());
        g.interior_nodes.push_back(id);
      }
    }
  }

  g.node_tris_.resize(g.nodes.size());
  for (int t = 0; t < g.triangle_count(); ++t)
    for (int v : g.triangles[t]) g.node_tris_[v].push_back(t);

  return g;
}

}  // namespace

double triangle_area(const Grid& g, int tri) {
  const auto& t = g.triangles[tri];
  const Vec2 a = g.nodes[t[0]], b = g.nodes[t[1]], c = g.nodes[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Vec2 triangle_centroid(const Grid& g, int tri) {
  const auto& t = g.triangles[tri];
  const Vec2 a = g.nodes[t[0]], b = g.nodes[t[1]], c = g.nodes[t[2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

NestedGrid build_nested_grid(int fine_level, int coarse_level) {
  if (coarse_level < 1 || coarse_level > fine_level || fine_level > 10)
    throw Error("build_nested_grid: need 1 <= coarse_level <= fine_level <= 10, got (" +
                std::to_string(fine_level) + ", " + std::to_string(coarse_level) + ")");

  NestedGrid ng;
  ng.fine_level = fine_level;
  ng.coarse_level = coarse_level;
  ng.fine = build_grid(fine_level);
  ng.coarse = build_grid(coarse_level);

  const int r = 1 << (fine_level - coarse_level);  // fine cells per coarse cell side
  ng.coarse_to_fine.resize(ng.coarse.triangle_count());
  ng.fine_to_coarse.resize(ng.fine.triangle_count());

  const int nf = ng.fine.n;
  for (int cy = 0; cy < nf; ++cy) {
    for (int cx = 0; cx < nf; ++cx) {
      const int CX = cx / r, CY = cy / r;
      const int lx = cx - CX * r, ly = cy - CY * r;  // cell offset inside the coarse cell
      const int coarse_cell = CY * ng.coarse.n + CX;
      // The centroid of each fine triangle decides the side of the coarse
      // diagonal; integer offsets make the test exact.
      for (int half = 0; half < 2; ++half) {
        const int ft = 2 * (cy * nf + cx) + half;
        const bool below = (half == 0) ? (ly <= lx) : (ly < lx);
        const int ct = 2 * coarse_cell + (below ? 0 : 1);
        ng.fine_to_coarse[ft] = ct;
        ng.coarse_to_fine[ct].push_back(ft);
      }
    }
  }
  return ng;
}

Patch node_patch(const NestedGrid& grid, int m, int k) {
  const Grid& cg = grid.coarse;
  if (m < 0 || m >= cg.node_count() || !cg.interior[m])
    throw Error("node_patch: center node " + std::to_string(m) +
                " is not an interior coarse node");
  if (k < 0) throw Error("node_patch: k must be >= 0");

  Patch p;
  p.center_node = m;
  p.k = k;

  std::vector<char> in_patch(cg.triangle_count(), 0);
  for (int t : cg.node_triangles(m)) in_patch[t] = 1;
  for (int round = 0; round < k; ++round) {
    std::vector<char> next = in_patch;
    for (int t = 0; t < cg.triangle_count(); ++t) {
      if (!in_patch[t]) continue;
      for (int v : cg.triangles[t])
        for (int nb : cg.node_triangles(v)) next[nb] = 1;
    }
    in_patch.swap(next);
  }
  for (int t = 0; t < cg.triangle_count(); ++t)
    if (in_patch[t]) p.coarse_elements.push_back(t);

  // Fine elements covered by the patch.
  const Grid& fg = grid.fine;
  std::vector<char> fine_in(fg.triangle_count(), 0);
  for (int ct : p.coarse_elements)
    for (int ft : grid.coarse_to_fine[ct]) fine_in[ft] = 1;

  // A fine node is interior to the patch when every incident fine element
  // lies inside it; Dirichlet nodes are excluded regardless.
  std::vector<char> touched(fg.node_count(), 0);
  for (int ft = 0; ft < fg.triangle_count(); ++ft)
    if (fine_in[ft])
      for (int v : fg.triangles[ft]) touched[v] = 1;
  for (int v = 0; v < fg.node_count(); ++v) {
    if (!touched[v] || !fg.interior[v]) continue;
    bool inside = true;
    for (int t : fg.node_triangles(v))
      if (!fine_in[t]) { inside = false; break; }
    if (inside) p.fine_nodes.push_back(v);
  }

  for (int v = 0; v < cg.node_count(); ++v) {
    if (!cg.interior[v]) continue;
    for (int t : cg.node_triangles(v)) {
      if (in_patch[t]) {
        p.constrained_coarse_nodes.push_back(v);
        break;
      }
    }
  }

  const int n_u = grid.fine_interior_u_dofs();
  p.fine_dofs.reserve(3 * p.fine_nodes.size());
  for (int v : p.fine_nodes) {
    const int q = fg.interior_index[v];
    p.fine_dofs.push_back(2 * q);
    p.fine_dofs.push_back(2 * q + 1);
  }
  for (int v : p.fine_nodes) p.fine_dofs.push_back(n_u + fg.interior_index[v]);

  return p;
}

}  // namespace melod
