#include "melod/fem.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "melod/csv.hpp"

namespace melod {

StateVector initial_state(const NestedGrid& grid, const BlockSystem& bs,
                          const Sources& src, double tau) {
  const Grid& fg = grid.fine;
  const int ni = fg.interior_count();

  Eigen::VectorXd theta0(ni);
  for (int q = 0; q < ni; ++q) {
    const Vec2 p = fg.nodes[fg.interior_nodes[q]];
    theta0[q] = src.theta0(p.x, p.y);
  }

  const LoadVectors lv = assemble_loads(grid, src.f, src.g, 0.0);

  Eigen::SimplicialLLT<SpMat> llt(bs.A1);
  if (llt.info() != Eigen::Success)
    throw Error("initial_state: elasticity block is singular; Dirichlet "
                "elimination is broken");
  const Eigen::VectorXd u0 = llt.solve(lv.F + bs.A2 * theta0);

  StateVector s;
  s.n = 0;
  s.tau = tau;
  s.data.resize(bs.n_u + bs.n_theta);
  s.data.head(bs.n_u) = u0;
  s.data.tail(bs.n_theta) = theta0;
  return s;
}

FineStepper::FineStepper(const NestedGrid&, const BlockSystem& bs, double tau) : tau_(tau) {
  auto [A, B] = compose_time_operators(bs, tau);
  A_ = std::move(A);
  B_ = std::move(B);
  lu_.compute(A_);
  if (lu_.info() != Eigen::Success)
    throw Error("FineStepper: factorization of the backward-Euler operator "
                "failed (theta block M'+tau*A4 or the coupled system is singular)");
}

StateVector FineStepper::step(const StateVector& prev, const Eigen::VectorXd& load) const {
  const Eigen::VectorXd rhs = B_ * prev.data + load;
  Eigen::VectorXd x = lu_.solve(rhs);

  const double scale = (B_ * prev.data).norm() + load.norm();
  double res = (A_ * x - rhs).norm();
  if (scale > 0.0 && res > 1e-10 * scale) {
    x += lu_.solve(rhs - A_ * x);  // one refinement pass
    res = (A_ * x - rhs).norm();
    if (res > 1e-10 * scale)
      throw Error("FineStepper::step: residual " + std::to_string(res) +
                  " exceeds tolerance after refinement");
  }

  StateVector s;
  s.n = prev.n + 1;
  s.tau = prev.tau;
  s.data = std::move(x);
  return s;
}

Eigen::VectorXd FineStepper::load_at(const NestedGrid& grid, const Sources& src, int n) const {
  if (!src.time_dependent && has_cached_load_) return cached_load_;
  const double t = src.time_dependent ? n * tau_ : 0.0;
  const LoadVectors lv = assemble_loads(grid, src.f, src.g, t);
  Eigen::VectorXd load(lv.F.size() + lv.G.size());
  load.head(lv.F.size()) = lv.F;
  load.tail(lv.G.size()) = tau_ * lv.G;
  if (!src.time_dependent) {
    cached_load_ = load;
    has_cached_load_ = true;
  }
  return load;
}

Trajectory run(const NestedGrid& grid, const BlockSystem& bs, const Sources& src,
               double tau, int n_steps) {
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.push_back(initial_state(grid, bs, src, tau));

  if (n_steps > 0) {
    const FineStepper stepper(grid, bs, tau);
    for (int n = 1; n <= n_steps; ++n) {
      const Eigen::VectorXd load = stepper.load_at(grid, src, n);
      traj.states.push_back(stepper.step(traj.states.back(), load));
    }
  }

  traj.metadata["fine_level"] = std::to_string(grid.fine_level);
  traj.metadata["coarse_level"] = std::to_string(grid.coarse_level);
  traj.metadata["tau"] = csv_num(tau);
  traj.metadata["n_steps"] = std::to_string(n_steps);
  return traj;
}

std::string trajectory_level_csv(const NestedGrid& grid, const StateVector& s) {
  const Grid& fg = grid.fine;
  const int n_u = 2 * fg.interior_count();
  std::string out = "node_id,x,y,u_x,u_y,theta\n";
  for (int v = 0; v < fg.node_count(); ++v) {
    const int q = fg.interior_index[v];
    const double ux = q >= 0 ? s.data[2 * q] : 0.0;
    const double uy = q >= 0 ? s.data[2 * q + 1] : 0.0;
    const double th = q >= 0 ? s.data[n_u + q] : 0.0;
    out += std::to_string(v);
    out += ',';
    out += csv_num(fg.nodes[v].x);
    out += ',';
    out += csv_num(fg.nodes[v].y);
    out += ',';
    out += csv_num(ux);
    out += ',';
    out += csv_num(uy);
    out += ',';
    out += csv_num(th);
    out += '\n';
  }
  return out;
}

}  // namespace melod
