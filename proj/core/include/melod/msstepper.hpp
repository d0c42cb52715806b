#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "melod/fem.hpp"
#include "melod/mslod.hpp"

namespace melod {

/// Galerkin reduction of the backward-Euler system onto the basis rows:
/// A_c = R A R^T, B_c = R B R^T, lifted states w = R^T w_c. Coarse systems
/// are factorized densely up to 5000 rows, sparsely beyond.
class ReducedSystem {
public:
  ReducedSystem(const MultiscaleBasis& basis, const SpMat& A, const SpMat& B);

  int rows() const { return static_cast<int>(R_.rows()); }
  const SpMat& R() const { return R_; }

  /// Dense coarse operators; only materialized on the dense path (<= 5000 rows).
  const Eigen::MatrixXd& A_c() const;
  const Eigen::MatrixXd& B_c() const;

  Eigen::VectorXd apply_B(const Eigen::VectorXd& w_c) const;

  /// Solve A_c x = rhs.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Least-squares projection (R R^T)^{-1} R w of a fine vector onto coarse
  /// coefficients.
  Eigen::VectorXd project(const Eigen::VectorXd& fine) const;

  /// Lift coarse coefficients to the fine grid.
  Eigen::VectorXd lift(const Eigen::VectorXd& coarse) const { return R_.transpose() * coarse; }

private:
  SpMat R_;
  Eigen::MatrixXd A_c_, B_c_;
  Eigen::PartialPivLU<Eigen::MatrixXd> a_lu_;         // dense path
  Eigen::SparseLU<SpMat> a_slu_;                      // sparse path
  SpMat A_c_sp_, B_c_sp_;
  bool dense_ = true;
  Eigen::LLT<Eigen::MatrixXd> gram_llt_;  // R R^T
};

ReducedSystem reduce(const MultiscaleBasis& basis, const SpMat& A, const SpMat& B);

/// Coarse initial state: theta part is the projector applied to the
/// embedded interpolant of theta0; the u part solves the reduced static
/// elasticity equation with that temperature.
Eigen::VectorXd ms_initial_state(const NestedGrid& grid, const BlockSystem& bs,
                                 const ReducedSystem& rs, const Sources& src);

/// Step the reduced system and lift every state; returns the fine-grid
/// trajectory R^T w_c^n for n = 0..N.
Trajectory ms_run(const NestedGrid& grid, const BlockSystem& bs, const ReducedSystem& rs,
                  const Sources& src, double tau, int n_steps);

}  // namespace melod
