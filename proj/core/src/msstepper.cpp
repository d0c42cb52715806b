#include "melod/msstepper.hpp"

#include <cmath>

#include "melod/csv.hpp"

namespace melod {

ReducedSystem::ReducedSystem(const MultiscaleBasis& basis, const SpMat& A, const SpMat& B)
    : R_(basis.R) {
  if (R_.cols() != A.rows() || A.rows() != A.cols() || B.rows() != A.rows())
    throw Error("ReducedSystem: dimension mismatch between R and the fine operators");

  const int n = rows();
  const SpMat Rt = R_.transpose();
  const SpMat A_c_sparse = R_ * A * Rt;
  const SpMat B_c_sparse = R_ * B * Rt;

  dense_ = n <= 5000;
  if (dense_) {
    A_c_ = Eigen::MatrixXd(A_c_sparse);
    B_c_ = Eigen::MatrixXd(B_c_sparse);
    a_lu_.compute(A_c_);
    const double det = std::abs(a_lu_.determinant());
    if (!(det > 0.0) || !std::isfinite(det))
      throw Error("ReducedSystem: A_c is singular; the basis is degenerate");
  } else {
    A_c_sp_ = A_c_sparse;
    B_c_sp_ = B_c_sparse;
    a_slu_.compute(A_c_sp_);
    if (a_slu_.info() != Eigen::Success)
      throw Error("ReducedSystem: A_c factorization failed; the basis is degenerate");
  }

  const Eigen::MatrixXd gram = Eigen::MatrixXd(SpMat(R_ * Rt));
  gram_llt_.compute(gram);
  if (gram_llt_.info() != Eigen::Success)
    throw Error("ReducedSystem: R R^T is not positive definite; basis rows are "
                "linearly dependent");
}

const Eigen::MatrixXd& ReducedSystem::A_c() const {
  if (!dense_) throw Error("ReducedSystem::A_c: dense operator not kept on the sparse path");
  return A_c_;
}

const Eigen::MatrixXd& ReducedSystem::B_c() const {
  if (!dense_) throw Error("ReducedSystem::B_c: dense operator not kept on the sparse path");
  return B_c_;
}

Eigen::VectorXd ReducedSystem::apply_B(const Eigen::VectorXd& w_c) const {
  return dense_ ? Eigen::VectorXd(B_c_ * w_c) : Eigen::VectorXd(B_c_sp_ * w_c);
}

Eigen::VectorXd ReducedSystem::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = dense_ ? Eigen::VectorXd(a_lu_.solve(rhs)) : Eigen::VectorXd(a_slu_.solve(rhs));
  const double scale = rhs.norm();
  if (scale > 0.0) {
    const Eigen::VectorXd res = (dense_ ? A_c_ * x : Eigen::VectorXd(A_c_sp_ * x)) - rhs;
    if (res.norm() > 1e-10 * scale) {
      x += dense_ ? Eigen::VectorXd(a_lu_.solve(-res)) : Eigen::VectorXd(a_slu_.solve(-res));
      const Eigen::VectorXd res2 = (dense_ ? A_c_ * x : Eigen::VectorXd(A_c_sp_ * x)) - rhs;
      if (res2.norm() > 1e-10 * scale)
        throw Error("ReducedSystem::solve: residual above tolerance after refinement");
    }
  }
  return x;
}

Eigen::VectorXd ReducedSystem::project(const Eigen::VectorXd& fine) const {
  return gram_llt_.solve(R_ * fine);
}

ReducedSystem reduce(const MultiscaleBasis& basis, const SpMat& A, const SpMat& B) {
  return ReducedSystem(basis, A, B);
}

Eigen::VectorXd ms_initial_state(const NestedGrid& grid, const BlockSystem& bs,
                                 const ReducedSystem& rs, const Sources& src) {
  const Grid& fg = grid.fine;
  const int ni = fg.interior_count();
  const int nc = grid.coarse.interior_count();

  Eigen::VectorXd embedded = Eigen::VectorXd::Zero(3 * ni);
  for (int q = 0; q < ni; ++q) {
    const Vec2 p = fg.nodes[fg.interior_nodes[q]];
    embedded[2 * ni + q] = src.theta0(p.x, p.y);
  }

  Eigen::VectorXd w_c = rs.project(embedded);
  const Eigen::VectorXd theta_c = w_c.tail(nc);

  // Reduced static elasticity: rows/cols of R A_static R^T split by dof type.
  const LoadVectors lv = assemble_loads(grid, src.f, src.g, 0.0);
  Eigen::VectorXd f_static = Eigen::VectorXd::Zero(3 * ni);
  f_static.head(2 * ni) = lv.F;

  SpMat t_static(3 * ni, 3 * ni);
  {
    using T = Eigen::Triplet<double>;
    std::vector<T> trips;
    trips.reserve(static_cast<std::size_t>(bs.A1.nonZeros() + bs.A2.nonZeros()));
    for (int c = 0; c < bs.A1.outerSize(); ++c)
      for (SpMat::InnerIterator it(bs.A1, c); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), c, it.value());
    for (int c = 0; c < bs.A2.outerSize(); ++c)
      for (SpMat::InnerIterator it(bs.A2, c); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), 2 * ni + c, -it.value());
    t_static.setFromTriplets(trips.begin(), trips.end());
  }

  const SpMat Rt = rs.R().transpose();
  const Eigen::MatrixXd S = Eigen::MatrixXd(SpMat(rs.R() * t_static * Rt));
  const Eigen::VectorXd f_c = rs.R() * f_static;

  const Eigen::MatrixXd S_uu = S.topLeftCorner(2 * nc, 2 * nc);
  const Eigen::MatrixXd S_ut = S.topRightCorner(2 * nc, nc);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(S_uu);
  const Eigen::VectorXd u_c = lu.solve(f_c.head(2 * nc) - S_ut * theta_c);

  w_c.head(2 * nc) = u_c;
  return w_c;
}

Trajectory ms_run(const NestedGrid& grid, const BlockSystem& bs, const ReducedSystem& rs,
                  const Sources& src, double tau, int n_steps) {
  if (!(tau > 0.0)) throw Error("ms_run: tau must be positive");

  Eigen::VectorXd w_c = ms_initial_state(grid, bs, rs, src);

  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);

  auto lifted = [&](const Eigen::VectorXd& coarse, int n) {
    StateVector s;
    s.n = n;
    s.tau = tau;
    s.data = rs.lift(coarse);
    return s;
  };
  traj.states.push_back(lifted(w_c, 0));

  Eigen::VectorXd load;
  bool have_load = false;
  for (int n = 1; n <= n_steps; ++n) {
    if (!have_load || src.time_dependent) {
      const double t = src.time_dependent ? n * tau : 0.0;
      const LoadVectors lv = assemble_loads(grid, src.f, src.g, t);
      Eigen::VectorXd fine_load(lv.F.size() + lv.G.size());
      fine_load.head(lv.F.size()) = lv.F;
      fine_load.tail(lv.G.size()) = tau * lv.G;
      load = rs.R() * fine_load;
      have_load = true;
    }
    w_c = rs.solve(rs.apply_B(w_c) + load);
    traj.states.push_back(lifted(w_c, n));
  }

  traj.metadata["fine_level"] = std::to_string(grid.fine_level);
  traj.metadata["coarse_level"] = std::to_string(grid.coarse_level);
  traj.metadata["tau"] = csv_num(tau);
  traj.metadata["n_steps"] = std::to_string(n_steps);
  return traj;
}

}  // namespace melod
