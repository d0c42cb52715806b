#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace melod {

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// One uniform triangulation of the unit square. Each of the n x n square
/// cells (n = 2^level) is split along its lower-left -> upper-right diagonal
/// into two counterclockwise triangles, so the mesh size is h = sqrt(2)/n.
struct Grid {
  int level = 0;
  int n = 1;     // subdivisions per side
  double h = 0;  // triangle diameter, sqrt(2)/n

  std::vector<Vec2> nodes;                    // (n+1)^2, node id = j*(n+1)+i
  std::vector<std::array<int, 3>> triangles;  // 2*n^2, ccw vertex ids
  std::vector<bool> interior;                 // per node, off the boundary
  std::vector<int> interior_index;            // node id -> interior rank, -1 on boundary
  std::vector<int> interior_nodes;            // interior rank -> node id

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int interior_count() const { return static_cast<int>(interior_nodes.size()); }

  int node_id(int i, int j) const { return j * (n + 1) + i; }

  /// Triangles incident to a node, in ascending index order.
  const std::vector<int>& node_triangles(int node) const { return node_tris_[node]; }

  std::vector<std::vector<int>> node_tris_;  // filled by build_nested_grid
};

/// Fine/coarse grid pair with element containment. Degrees of freedom are
/// numbered node-major per grid; state vectors stack all interior u-dofs
/// (u_x,u_y per node) ahead of all interior theta-dofs.
struct NestedGrid {
  int fine_level = 0;
  int coarse_level = 0;

  Grid fine;
  Grid coarse;

  /// coarse triangle -> fine triangles it contains (4^(lf-lc) each).
  std::vector<std::vector<int>> coarse_to_fine;
  /// fine triangle -> containing coarse triangle.
  std::vector<int> fine_to_coarse;

  int fine_interior_u_dofs() const { return 2 * fine.interior_count(); }
  int fine_interior_theta_dofs() const { return fine.interior_count(); }
  int fine_interior_dofs() const { return 3 * fine.interior_count(); }
  int coarse_interior_dofs() const { return 3 * coarse.interior_count(); }
};

/// Patch omega_k around a coarse node: the hat-function support dilated k
/// times by element-neighbourhood. Fine dofs on the patch boundary or the
/// global Dirichlet boundary are excluded.
struct Patch {
  int center_node = -1;  // coarse node id
  int k = 0;

  std::vector<int> coarse_elements;  // ascending coarse triangle ids
  std::vector<int> fine_nodes;       // ascending fine node ids strictly inside the patch
  std::vector<int> constrained_coarse_nodes;  // ascending interior coarse node ids
                                              // whose hat support meets the patch

  /// Stacked dof list [u_x,u_y per fine node..., theta per fine node...]
  /// as indices into the grid's interior fine dof numbering.
  std::vector<int> fine_dofs;
};

/// Build the nested pair. Requires 1 <= coarse_level <= fine_level <= 10.
NestedGrid build_nested_grid(int fine_level, int coarse_level);

/// Patch of layer k centered at interior coarse node m.
Patch node_patch(const NestedGrid& grid, int m, int k);

/// Signed area of a triangle (positive for ccw orientation).
double triangle_area(const Grid& g, int tri);

/// Centroid of a triangle.
Vec2 triangle_centroid(const Grid& g, int tri);

}  // namespace melod
