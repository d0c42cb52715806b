#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <string>
#include <vector>

#include "melod/assembly.hpp"
#include "melod/grid.hpp"

namespace melod {

enum class Method { LOD, MELOD };

/// Static coupled operator K_gamma = [A1, -gamma1*A2; gamma2*A3, A4] over the
/// stacked interior fine dofs. For gamma1 == gamma2 the coupling blocks cancel
/// in the quadratic form, so the operator is coercive though nonsymmetric.
struct CoupledOperator {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  SpMat K;  // (n_u + n_theta) square
};

CoupledOperator build_coupled_operator(const BlockSystem& bs, double gamma1, double gamma2);

/// L2 products of fine hats against coarse hats, int(phi_i * lambda_j), over
/// interior fine nodes (rows) x interior coarse nodes (cols). Exact for
/// nested grids since coarse hats are linear on every fine element.
SpMat assemble_constraint_products(const NestedGrid& grid);

/// Which component block a corrector problem lives on: the full coupled
/// system, or one of the decoupled LOD blocks.
enum class CorrectorBlock { Coupled, Displacement, Temperature };

/// Saddle-point solver for one patch: factorizes the bordered KKT system
/// [K C; C^T 0] once and solves per target coarse dof. K is the patch
/// restriction of `op`, C the patch restriction of the constraint products.
class CorrectorSolver {
public:
  CorrectorSolver(const NestedGrid& grid, const SpMat& op, const SpMat& c0,
                  const Patch& patch, CorrectorBlock block);

  /// Basis field for the given global coarse dof (u dofs first, then theta),
  /// returned over all interior fine dofs, zero outside the patch.
  /// Enforces q_j(psi) = delta_jm to 1e-9.
  Eigen::VectorXd solve(int target_coarse_dof) const;

  int patch_dof_count() const { return static_cast<int>(dofs_.size()); }
  int constraint_count() const { return static_cast<int>(constraints_.size()); }

private:
  const NestedGrid& grid_;
  const Patch& patch_;
  CorrectorBlock block_;
  std::vector<int> dofs_;         // global interior fine dofs of the block
  std::vector<int> constraints_;  // global coarse dofs of the block
  std::vector<double> col_scale_;
  SpMat kkt_;
  Eigen::SparseLU<SpMat> lu_;
  int n_fine_total_ = 0;
};

struct BasisRowInfo {
  int node = -1;  // coarse node id
  int k = 0;
  int patch_elements = 0;
  int patch_fine_dofs = 0;
};

/// The reduction matrix R. Row m is the fine-grid representation of the
/// multiscale basis function attached to interior coarse dof m; columns run
/// over interior fine dofs. LOD rows are supported on a single component
/// block; ME-LOD rows are coupled (u_x,u_y,theta) fields.
struct MultiscaleBasis {
  Method method = Method::MELOD;
  int k = 0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  SpMat R;  // coarse interior dofs x fine interior dofs
  std::vector<BasisRowInfo> rows;
};

/// One corrector problem; convenience wrapper around CorrectorSolver.
Eigen::VectorXd solve_corrector(const NestedGrid& grid, const CoupledOperator& op,
                                const SpMat& c0, const Patch& patch, int target_coarse_dof);

/// Build the full basis, one patch per interior coarse node. Patch problems
/// are independent; `workers` threads may be used, the result is identical
/// for any worker count.
MultiscaleBasis build_basis(const NestedGrid& grid, const BlockSystem& bs, Method method,
                            int k, double gamma1 = 1.0, double gamma2 = 1.0, int workers = 1);

/// CSV dump of one basis row: node_id,x,y,u_x,u_y,theta over fine nodes.
std::string basis_row_csv(const NestedGrid& grid, const MultiscaleBasis& basis, int row);

}  // namespace melod
