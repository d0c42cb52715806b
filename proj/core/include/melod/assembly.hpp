#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <string>

#include "melod/coeffs.hpp"
#include "melod/grid.hpp"

namespace melod {

using SpMat = Eigen::SparseMatrix<double>;

/// Body force (x,y,t) -> (f_x,f_y) and heat source (x,y,t) -> g.
using BodyForce = std::function<std::array<double, 2>(double, double, double)>;
using HeatSource = std::function<double(double, double, double)>;

/// Assembled operators of the coupled system on interior fine dofs:
///   A1 elasticity stiffness, A2 coupling (u rows x theta cols, A3 = A2^T),
///   A4 thermal stiffness, Mprime the alpha-weighted theta mass.
struct BlockSystem {
  SpMat A1;      // 2*Ni x 2*Ni
  SpMat A2;      // 2*Ni x Ni
  SpMat A4;      // Ni x Ni
  SpMat Mprime;  // Ni x Ni

  int n_u = 0;      // interior u dofs
  int n_theta = 0;  // interior theta dofs

  SpMat a3() const { return SpMat(A2.transpose()); }
};

struct LoadVectors {
  Eigen::VectorXd F;  // interior u dofs
  Eigen::VectorXd G;  // interior theta dofs
};

/// Exact P1 integrals with piecewise-constant coefficients; Dirichlet rows
/// and columns are eliminated. Rejects nonpositive coefficients.
BlockSystem assemble_block_system(const NestedGrid& grid, const CoefficientField& coeffs);

/// Nodal loads by the 3-point vertex rule, over all nodes of the fine grid.
/// F is stacked (f_x,f_y) per node, G one entry per node.
void assemble_loads_full(const NestedGrid& grid, const BodyForce& f, const HeatSource& g,
                         double t, Eigen::VectorXd& F_full, Eigen::VectorXd& G_full);

/// Interior restriction of assemble_loads_full.
LoadVectors assemble_loads(const NestedGrid& grid, const BodyForce& f, const HeatSource& g,
                           double t);

/// Backward-Euler composites A = [A1 -A2; A3 M'+tau*A4], B = [0 0; A3 M'] on
/// the stacked interior dof vector [u; theta].
std::pair<SpMat, SpMat> compose_time_operators(const BlockSystem& bs, double tau);

/// Unweighted P1 mass matrix over interior fine theta dofs.
SpMat assemble_scalar_mass(const NestedGrid& grid);

/// Coordinate-format text triplets "row col value", one per line, for
/// debugging and interchange.
std::string coo_text(const SpMat& m);

}  // namespace melod
