#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "melod/assembly.hpp"

namespace melod {

/// Stacked interior dofs [u_x,u_y per node...; theta per node] at one time
/// level t^n = n*tau.
struct StateVector {
  Eigen::VectorXd data;
  int n = 0;
  double tau = 0.0;

  Eigen::VectorBlock<Eigen::VectorXd> u(int n_u) { return data.head(n_u); }
  Eigen::VectorBlock<Eigen::VectorXd> theta(int n_u) { return data.tail(data.size() - n_u); }
};

struct Trajectory {
  std::vector<StateVector> states;  // n = 0..N
  std::map<std::string, std::string> metadata;
};

/// Problem data shared by the reference and multiscale steppers.
struct Sources {
  BodyForce f = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };
  HeatSource g = [](double, double, double) { return 0.0; };
  std::function<double(double, double)> theta0 = [](double, double) { return 0.0; };
  bool time_dependent = false;  // when false, loads are assembled once at t=0
};

/// Consistent initial state: theta^0 interpolates theta0 at interior nodes,
/// u^0 solves the static elasticity equation with that temperature.
StateVector initial_state(const NestedGrid& grid, const BlockSystem& bs,
                          const Sources& src, double tau);

/// Backward-Euler stepper for A w^n = B w^{n-1} + [F; tau G]. One sparse
/// factorization of A is reused across all steps.
class FineStepper {
public:
  FineStepper(const NestedGrid& grid, const BlockSystem& bs, double tau);

  StateVector step(const StateVector& prev, const Eigen::VectorXd& load) const;

  /// Stacked load [F^n; tau*G^n] at time level n.
  Eigen::VectorXd load_at(const NestedGrid& grid, const Sources& src, int n) const;

  const SpMat& A() const { return A_; }
  const SpMat& B() const { return B_; }
  double tau() const { return tau_; }

private:
  SpMat A_, B_;
  double tau_;
  Eigen::SparseLU<SpMat> lu_;
  mutable Eigen::VectorXd cached_load_;
  mutable bool has_cached_load_ = false;
};

/// Reference trajectory over N steps.
Trajectory run(const NestedGrid& grid, const BlockSystem& bs, const Sources& src,
               double tau, int n_steps);

/// CSV for one time level: node_id,x,y,u_x,u_y,theta over all fine nodes
/// (boundary values are zero).
std::string trajectory_level_csv(const NestedGrid& grid, const StateVector& s);

}  // namespace melod
