#include "melod/metrics.hpp"

#include <cmath>

namespace melod {

namespace {

std::optional<double> ratio(double num, double den) {
  if (den <= 0.0) return std::nullopt;
  return std::sqrt(num / den);
}

}  // namespace

ErrorReport energy_errors(const Trajectory& sol, const Trajectory& ref,
                          const NestedGrid& grid, const BlockSystem& bs, int at) {
  if (sol.states.size() != ref.states.size())
    throw Error("energy_errors: trajectories have different lengths");
  if (sol.states.empty()) throw Error("energy_errors: empty trajectories");

  const int n_levels = static_cast<int>(sol.states.size());
  if (at < 0) at = n_levels - 1;
  if (at >= n_levels) throw Error("energy_errors: time index out of range");

  const SpMat mass = assemble_scalar_mass(grid);
  const int ni = grid.fine.interior_count();
  const int nu = 2 * ni;

  ErrorReport rep;
  rep.series_u_energy.resize(static_cast<std::size_t>(n_levels));
  rep.series_theta_energy.resize(static_cast<std::size_t>(n_levels));
  rep.series_w_energy.resize(static_cast<std::size_t>(n_levels));
  rep.series_w_l2.resize(static_cast<std::size_t>(n_levels));

  auto l2_sq = [&](const Eigen::VectorXd& w) {
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd comp(ni);
      for (int q = 0; q < ni; ++q) comp[q] = w[2 * q + c];
      s += comp.dot(mass * comp);
    }
    const Eigen::VectorXd th = w.tail(ni);
    return s + th.dot(mass * th);
  };

  for (int n = 0; n < n_levels; ++n) {
    const Eigen::VectorXd& ws = sol.states[static_cast<std::size_t>(n)].data;
    const Eigen::VectorXd& wr = ref.states[static_cast<std::size_t>(n)].data;
    if (ws.size() != wr.size() || ws.size() != nu + ni)
      throw Error("energy_errors: state size does not match the fine grid");

    const Eigen::VectorXd e = ws - wr;
    const Eigen::VectorXd eu = e.head(nu), et = e.tail(ni);
    const Eigen::VectorXd ru = wr.head(nu), rt = wr.tail(ni);

    const double num_u = eu.dot(bs.A1 * eu);
    const double num_t = et.dot(bs.A4 * et);
    const double den_u = ru.dot(bs.A1 * ru);
    const double den_t = rt.dot(bs.A4 * rt);

    rep.series_u_energy[n] = ratio(num_u, den_u);
    rep.series_theta_energy[n] = ratio(num_t, den_t);
    rep.series_w_energy[n] = ratio(num_u + num_t, den_u + den_t);
    rep.series_w_l2[n] = ratio(l2_sq(e), l2_sq(wr));
  }

  rep.e_u_energy = rep.series_u_energy[static_cast<std::size_t>(at)];
  rep.e_theta_energy = rep.series_theta_energy[static_cast<std::size_t>(at)];
  rep.e_w_energy = rep.series_w_energy[static_cast<std::size_t>(at)];
  rep.e_w_l2 = rep.series_w_l2[static_cast<std::size_t>(at)];
  return rep;
}

}  // namespace melod
