#include "melod/mslod.hpp"

#include <algorithm>
#include <cmath>

#include "melod/csv.hpp"
#include "melod/parallel.hpp"

namespace melod {

CoupledOperator build_coupled_operator(const BlockSystem& bs, double gamma1, double gamma2) {
  if (!(gamma1 > 0.0 && gamma1 <= 1.0) || !(gamma2 > 0.0 && gamma2 <= 1.0))
    throw Error("build_coupled_operator: gamma1, gamma2 must lie in (0, 1]");

  const int nu = bs.n_u, nt = bs.n_theta;
  using T = Eigen::Triplet<double>;
  std::vector<T> trips;
  trips.reserve(static_cast<std::size_t>(bs.A1.nonZeros()) + 2 * bs.A2.nonZeros() +
                bs.A4.nonZeros());

  for (int c = 0; c < bs.A1.outerSize(); ++c)
    for (SpMat::InnerIterator it(bs.A1, c); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), c, it.value());
  for (int c = 0; c < bs.A2.outerSize(); ++c)
    for (SpMat::InnerIterator it(bs.A2, c); it; ++it) {
      trips.emplace_back(static_cast<int>(it.row()), nu + c, -gamma1 * it.value());
      trips.emplace_back(nu + c, static_cast<int>(it.row()), gamma2 * it.value());
    }
  for (int c = 0; c < bs.A4.outerSize(); ++c)
    for (SpMat::InnerIterator it(bs.A4, c); it; ++it)
      trips.emplace_back(nu + static_cast<int>(it.row()), nu + c, it.value());

  CoupledOperator op;
  op.gamma1 = gamma1;
  op.gamma2 = gamma2;
  op.K.resize(nu + nt, nu + nt);
  op.K.setFromTriplets(trips.begin(), trips.end());
  return op;
}

SpMat assemble_constraint_products(const NestedGrid& grid) {
  const Grid& fg = grid.fine;
  const Grid& cg = grid.coarse;

  using T = Eigen::Triplet<double>;
  std::vector<T> trips;
  trips.reserve(static_cast<std::size_t>(9) * fg.triangle_count());

  for (int ft = 0; ft < fg.triangle_count(); ++ft) {
    const int ct = grid.fine_to_coarse[ft];
    const auto& cv = cg.triangles[ct];
    const Vec2 q0 = cg.nodes[cv[0]], q1 = cg.nodes[cv[1]], q2 = cg.nodes[cv[2]];
    const double det2A = (q1.x - q0.x) * (q2.y - q0.y) - (q2.x - q0.x) * (q1.y - q0.y);

    const auto& fv = fg.triangles[ft];
    // Coarse hats are linear on the fine element; their vertex values give
    // the exact product against the P1 mass matrix.
    double lam[3][3];  // lam[J][p]: coarse vertex J at fine vertex p
    for (int p = 0; p < 3; ++p) {
      const Vec2 x = fg.nodes[fv[p]];
      lam[0][p] = ((q1.x - x.x) * (q2.y - x.y) - (q2.x - x.x) * (q1.y - x.y)) / det2A;
      lam[1][p] = ((q2.x - x.x) * (q0.y - x.y) - (q0.x - x.x) * (q2.y - x.y)) / det2A;
      lam[2][p] = ((q0.x - x.x) * (q1.y - x.y) - (q1.x - x.x) * (q0.y - x.y)) / det2A;
    }

    const double a12 = triangle_area(fg, ft) / 12.0;
    for (int i = 0; i < 3; ++i) {
      const int ri = fg.interior_index[fv[i]];
      if (ri < 0) continue;
      for (int J = 0; J < 3; ++J) {
        const int rj = cg.interior_index[cv[J]];
        if (rj < 0) continue;
        double v = 0.0;
        for (int p = 0; p < 3; ++p) v += lam[J][p] * a12 * (p == i ? 2.0 : 1.0);
        trips.emplace_back(ri, rj, v);
      }
    }
  }

  SpMat c0(fg.interior_count(), cg.interior_count());
  c0.setFromTriplets(trips.begin(), trips.end());
  return c0;
}

namespace {

// Global coarse dof -> (interior coarse node rank, component 0/1/2).
struct CoarseDof {
  int node_rank;
  int comp;  // 0: u_x, 1: u_y, 2: theta
};

CoarseDof split_coarse_dof(int dof, int n_coarse_interior) {
  if (dof < 2 * n_coarse_interior) return {dof / 2, dof % 2};
  return {dof - 2 * n_coarse_interior, 2};
}

}  // namespace

CorrectorSolver::CorrectorSolver(const NestedGrid& grid, const SpMat& op, const SpMat& c0,
                                 const Patch& patch, CorrectorBlock block)
    : grid_(grid), patch_(patch), block_(block) {
  if (patch.fine_nodes.empty())
    throw Error("CorrectorSolver: patch around coarse node " +
                std::to_string(patch.center_node) + " has no interior fine dofs");

  const int nn = static_cast<int>(patch.fine_nodes.size());
  const int ni = grid.fine.interior_count();
  const int nc = grid.coarse.interior_count();
  n_fine_total_ = 3 * ni;

  switch (block) {
    case CorrectorBlock::Coupled:
      dofs_ = patch.fine_dofs;
      break;
    case CorrectorBlock::Displacement:
      dofs_.assign(patch.fine_dofs.begin(), patch.fine_dofs.begin() + 2 * nn);
      break;
    case CorrectorBlock::Temperature:
      dofs_.assign(patch.fine_dofs.begin() + 2 * nn, patch.fine_dofs.end());
      break;
  }

  for (int node : patch.constrained_coarse_nodes) {
    const int q = grid.coarse.interior_index[node];
    if (block != CorrectorBlock::Temperature) {
      constraints_.push_back(2 * q);
      constraints_.push_back(2 * q + 1);
    }
    if (block != CorrectorBlock::Displacement) constraints_.push_back(2 * nc + q);
  }

  const int nd = static_cast<int>(dofs_.size());
  const int ncons = static_cast<int>(constraints_.size());

  std::vector<int> loc(static_cast<std::size_t>(op.cols()), -1);
  for (int l = 0; l < nd; ++l) loc[dofs_[l]] = l;

  using T = Eigen::Triplet<double>;
  std::vector<T> trips;
  for (int l = 0; l < nd; ++l) {
    const int j = dofs_[l];
    for (SpMat::InnerIterator it(op, j); it; ++it) {
      const int il = loc[it.row()];
      if (il >= 0) trips.emplace_back(il, l, it.value());
    }
  }

  col_scale_.assign(static_cast<std::size_t>(ncons), 1.0);
  const int n_u = 2 * ni;
  std::vector<std::pair<int, double>> col;
  for (int cl = 0; cl < ncons; ++cl) {
    const auto cd = split_coarse_dof(constraints_[cl], nc);
    col.clear();
    for (SpMat::InnerIterator it(c0, cd.node_rank); it; ++it) {
      const int r = static_cast<int>(it.row());  // fine interior node rank
      const int stacked = cd.comp == 2 ? n_u + r : 2 * r + cd.comp;
      const int il = loc[stacked];
      if (il >= 0) col.emplace_back(il, it.value());
    }
    if (col.empty())
      throw Error("CorrectorSolver: constraint for coarse node rank " +
                  std::to_string(cd.node_rank) + " vanishes on the patch around node " +
                  std::to_string(patch.center_node) + " (k=" + std::to_string(patch.k) +
                  "); patch too small to carry all constraints");
    double norm2 = 0.0;
    for (const auto& [r, v] : col) norm2 += v * v;
    const double s = std::sqrt(norm2);
    col_scale_[cl] = s;
    for (const auto& [r, v] : col) {
      trips.emplace_back(r, nd + cl, v / s);
      trips.emplace_back(nd + cl, r, v / s);
    }
  }

  kkt_.resize(nd + ncons, nd + ncons);
  kkt_.setFromTriplets(trips.begin(), trips.end());
  lu_.compute(kkt_);
  if (lu_.info() != Eigen::Success)
    throw Error("CorrectorSolver: singular KKT system on the patch around coarse node " +
                std::to_string(patch.center_node) + " (k=" + std::to_string(patch.k) +
                ", " + std::to_string(nd) + " dofs, " + std::to_string(ncons) +
                " constraints); constraints are rank deficient");
}

Eigen::VectorXd CorrectorSolver::solve(int target_coarse_dof) const {
  const auto pos = std::find(constraints_.begin(), constraints_.end(), target_coarse_dof);
  if (pos == constraints_.end())
    throw Error("CorrectorSolver::solve: coarse dof " + std::to_string(target_coarse_dof) +
                "'s hat support does not meet the patch around node " +
                std::to_string(patch_.center_node));
  const int tl = static_cast<int>(pos - constraints_.begin());

  const int nd = static_cast<int>(dofs_.size());
  const int ncons = static_cast<int>(constraints_.size());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd + ncons);
  rhs[nd + tl] = 1.0 / col_scale_[tl];

  Eigen::VectorXd x = lu_.solve(rhs);

  // Constraint rows live in column-scaled units; multiplying the residual by
  // the scale recovers q_j(psi) - delta_jm.
  auto worst_constraint = [&](const Eigen::VectorXd& sol) {
    const Eigen::VectorXd res = kkt_ * sol - rhs;
    double w = 0.0;
    for (int cl = 0; cl < ncons; ++cl)
      w = std::max(w, std::abs(res[nd + cl]) * col_scale_[cl]);
    return w;
  };

  if (worst_constraint(x) > 1e-9) {
    x += lu_.solve(rhs - kkt_ * x);
    if (worst_constraint(x) > 1e-9)
      throw Error("CorrectorSolver::solve: constraint residual above 1e-9 after "
                  "refinement on patch around node " + std::to_string(patch_.center_node));
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_fine_total_);
  for (int l = 0; l < nd; ++l) out[dofs_[l]] = x[l];
  return out;
}

Eigen::VectorXd solve_corrector(const NestedGrid& grid, const CoupledOperator& op,
                                const SpMat& c0, const Patch& patch, int target_coarse_dof) {
  CorrectorSolver solver(grid, op.K, c0, patch, CorrectorBlock::Coupled);
  return solver.solve(target_coarse_dof);
}

MultiscaleBasis build_basis(const NestedGrid& grid, const BlockSystem& bs, Method method,
                            int k, double gamma1, double gamma2, int workers) {
  if (k < 0) throw Error("build_basis: k must be >= 0");

  const CoupledOperator op = method == Method::MELOD
                                 ? build_coupled_operator(bs, gamma1, gamma2)
                                 : build_coupled_operator(bs, 1.0, 1.0);
  const SpMat c0 = assemble_constraint_products(grid);

  const int nc = grid.coarse.interior_count();
  const int n_rows = 3 * nc;

  struct NodeRows {
    std::vector<Eigen::Triplet<double>> trips;  // rows are global row ids
    BasisRowInfo info;
  };
  std::vector<NodeRows> per_node(static_cast<std::size_t>(nc));

  parallel_for(nc, workers, [&](int q) {
    const int node = grid.coarse.interior_nodes[q];
    const Patch patch = node_patch(grid, node, k);
    NodeRows& nr = per_node[static_cast<std::size_t>(q)];
    nr.info = {node, k, static_cast<int>(patch.coarse_elements.size()),
               static_cast<int>(patch.fine_dofs.size())};

    auto append_row = [&](int row, const Eigen::VectorXd& psi) {
      for (int i = 0; i < psi.size(); ++i)
        if (psi[i] != 0.0) nr.trips.emplace_back(row, i, psi[i]);
    };

    if (method == Method::MELOD) {
      const CorrectorSolver solver(grid, op.K, c0, patch, CorrectorBlock::Coupled);
      append_row(2 * q, solver.solve(2 * q));
      append_row(2 * q + 1, solver.solve(2 * q + 1));
      append_row(2 * nc + q, solver.solve(2 * nc + q));
    } else {
      const CorrectorSolver solver_u(grid, op.K, c0, patch, CorrectorBlock::Displacement);
      append_row(2 * q, solver_u.solve(2 * q));
      append_row(2 * q + 1, solver_u.solve(2 * q + 1));
      const CorrectorSolver solver_t(grid, op.K, c0, patch, CorrectorBlock::Temperature);
      append_row(2 * nc + q, solver_t.solve(2 * nc + q));
    }
  });

  MultiscaleBasis basis;
  basis.method = method;
  basis.k = k;
  basis.gamma1 = method == Method::MELOD ? gamma1 : 1.0;
  basis.gamma2 = method == Method::MELOD ? gamma2 : 1.0;
  basis.rows.resize(static_cast<std::size_t>(n_rows));

  std::vector<Eigen::Triplet<double>> trips;
  std::size_t total = 0;
  for (const auto& nr : per_node) total += nr.trips.size();
  trips.reserve(total);
  for (int q = 0; q < nc; ++q) {
    const NodeRows& nr = per_node[static_cast<std::size_t>(q)];
    trips.insert(trips.end(), nr.trips.begin(), nr.trips.end());
    basis.rows[static_cast<std::size_t>(2 * q)] = nr.info;
    basis.rows[static_cast<std::size_t>(2 * q + 1)] = nr.info;
    basis.rows[static_cast<std::size_t>(2 * nc + q)] = nr.info;
  }

  basis.R.resize(n_rows, grid.fine_interior_dofs());
  basis.R.setFromTriplets(trips.begin(), trips.end());
  return basis;
}

std::string basis_row_csv(const NestedGrid& grid, const MultiscaleBasis& basis, int row) {
  if (row < 0 || row >= basis.R.rows()) throw Error("basis_row_csv: row out of range");
  const Grid& fg = grid.fine;
  const int ni = fg.interior_count();

  Eigen::VectorXd psi = Eigen::VectorXd::Zero(basis.R.cols());
  for (int c = 0; c < basis.R.outerSize(); ++c)
    for (SpMat::InnerIterator it(basis.R, c); it; ++it)
      if (it.row() == row) psi[c] = it.value();

  std::string out = "node_id,x,y,u_x,u_y,theta\n";
  for (int v = 0; v < fg.node_count(); ++v) {
    const int q = fg.interior_index[v];
    out += std::to_string(v);
    out += ',';
    out += csv_num(fg.nodes[v].x);
    out += ',';
    out += csv_num(fg.nodes[v].y);
    out += ',';
    out += csv_num(q >= 0 ? psi[2 * q] : 0.0);
    out += ',';
    out += csv_num(q >= 0 ? psi[2 * q + 1] : 0.0);
    out += ',';
    out += csv_num(q >= 0 ? psi[2 * ni + q] : 0.0);
    out += '\n';
  }
  return out;
}

}  // namespace melod
