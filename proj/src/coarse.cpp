#include "fracms/coarse.hpp"

#include "fracms/linalg.hpp"

#include <Eigen/SparseCholesky>

#include <set>

namespace fracms {

namespace {

std::vector<int> nodes_of(const std::vector<Index>& columns, const std::vector<int>& column_node) {
  std::set<int> s;
  for (Index c : columns) s.insert(column_node[c]);
  return {s.begin(), s.end()};
}

template <typename ColumnFn>
MultiscaleSpace assemble_columns(const GridHierarchy& grid, const PartitionOfUnity& pou, const FineSystem& sys,
                                 const std::vector<int>& counts, ColumnFn&& column) {
  MultiscaleSpace ms;
  ms.counts = counts;
  std::vector<Triplet> trip;
  Index col = 0;
  for (int i = 0; i < grid.num_coarse_nodes(); ++i) {
    const auto nodes = grid.fine.box_nodes(grid.neighborhoods[i]);
    for (int k = 0; k < counts[i]; ++k, ++col) {
      const auto v = column(i, k);
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double val = pou.chi[i][q] * v[q];
        if (val != 0.0 && !sys.dirichlet_mask[nodes[q]]) trip.emplace_back(nodes[q], col, val);
      }
      ms.column_node.push_back(i);
    }
  }
  ms.R0T.resize(sys.num_matrix_dofs, col);
  ms.R0T.setFromTriplets(trip.begin(), trip.end());
  ms.lift = coarse_lift(grid, pou, sys);
  return ms;
}

}  // namespace

VectorX coarse_lift(const GridHierarchy& grid, const PartitionOfUnity& pou, const FineSystem& sys) {
  VectorX lift = VectorX::Zero(sys.num_matrix_dofs);
  for (int i = 0; i < grid.num_coarse_nodes(); ++i) {
    if (!grid.is_boundary_coarse_node(i)) continue;
    const double gi = sys.dirichlet_values[grid.coarse_node_fine(i)];
    if (gi == 0.0) continue;
    const auto nodes = grid.fine.box_nodes(grid.neighborhoods[i]);
    for (std::size_t q = 0; q < nodes.size(); ++q) lift[nodes[q]] += gi * pou.chi[i][q];
  }
  for (Index n = 0; n < sys.num_matrix_dofs; ++n)
    if (sys.dirichlet_mask[n]) lift[n] = sys.dirichlet_values[n];
  return lift;
}

MultiscaleSpace build_space(const GridHierarchy& grid, const PartitionOfUnity& pou,
                            const std::vector<NeighborhoodSpace>& spaces, const FineSystem& sys) {
  if (static_cast<int>(spaces.size()) != grid.num_coarse_nodes())
    throw Error("build_space: expected one offline space per coarse node");
  std::vector<int> counts;
  for (const auto& s : spaces) {
    if (s.m_off < 1) throw Error("build_space: coarse node " + std::to_string(s.omega_id) + " has no offline vector");
    if (s.offline_basis.rows() != pou.chi[s.omega_id].size())
      throw Error("build_space: offline vectors of node " + std::to_string(s.omega_id) +
                  " do not match the partition of unity support");
    counts.push_back(s.m_off);
  }
  return assemble_columns(grid, pou, sys, counts, [&](int i, int k) { return spaces[i].offline_basis.col(k); });
}

MultiscaleSpace build_snapshot_space(const GridHierarchy& grid, const PartitionOfUnity& pou,
                                     const std::vector<SnapshotSpace>& snapshots, const FineSystem& sys) {
  std::vector<int> counts;
  for (const auto& s : snapshots) counts.push_back(static_cast<int>(s.size()));
  return assemble_columns(grid, pou, sys, counts, [&](int i, int k) { return snapshots[i].vectors.col(k); });
}

MultiscaleSpace space_from_columns(const SparseMatrix& columns, const GridHierarchy& grid, const PartitionOfUnity& pou,
                                   const FineSystem& sys) {
  if (columns.rows() != sys.num_matrix_dofs) throw Error("space_from_columns: row count must match matrix dofs");
  MultiscaleSpace ms;
  std::vector<Triplet> trip;
  for (Index c = 0; c < columns.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(columns, c); it; ++it)
      if (!sys.dirichlet_mask[it.row()]) trip.emplace_back(it.row(), c, it.value());
  ms.R0T.resize(columns.rows(), columns.cols());
  ms.R0T.setFromTriplets(trip.begin(), trip.end());
  ms.column_node.assign(columns.cols(), -1);
  ms.lift = coarse_lift(grid, pou, sys);
  return ms;
}

MatrixX coarse_matrix(const MultiscaleSpace& ms, const FineSystem& sys) {
  const SparseMatrix Am = sys.matrix_block();
  const SparseMatrix A0 = ms.R0T.transpose() * Am * ms.R0T;
  return MatrixX(A0);
}

VectorX prolong(const MultiscaleSpace& ms, const VectorX& U0) {
  if (U0.size() != ms.dim()) throw Error("prolong: coefficient vector length does not match the space dimension");
  return ms.lift + ms.R0T * U0;
}

CoarseSolution solve_coarse_dfm(const MultiscaleSpace& ms, const FineSystem& sys) {
  if (sys.mode != SystemMode::DfmMonolithic) throw Error("solve_coarse_dfm: system is not DFM-monolithic");
  const VectorX r = sys.F - sys.A * ms.lift;
  const MatrixX A0 = coarse_matrix(ms, sys);
  const VectorX F0 = ms.R0T.transpose() * r;
  const DenseSolve ds = solve_spsd(A0, F0);

  CoarseSolution sol;
  sol.U0 = ds.x;
  sol.rank = ds.rank;
  sol.deficient_nodes = nodes_of(ds.null_columns, ms.column_node);
  sol.u_fine = prolong(ms, sol.U0);
  return sol;
}

CoarseSolution solve_coarse_efm(const MultiscaleSpace& ms, const FineSystem& sys) {
  if (sys.mode != SystemMode::EfmBlock) throw Error("solve_coarse_efm: system is not EFM-block");
  const Index nm = sys.num_matrix_dofs, n = sys.size();

  VectorX lift = sys.dirichlet_values;
  lift.head(nm) = ms.lift;
  const VectorX r = sys.F - sys.A * lift;

  std::vector<Index> matrix_idx(nm), frac_free;
  for (Index k = 0; k < nm; ++k) matrix_idx[k] = k;
  for (Index k = nm; k < n; ++k)
    if (!sys.dirichlet_mask[k]) frac_free.push_back(k);

  const SparseMatrix Amm = sys.matrix_block();
  const SparseMatrix Amf = submatrix(sys.A, matrix_idx, frac_free);
  const SparseMatrix Aff = submatrix(sys.A, frac_free, frac_free);
  VectorX rf(frac_free.size());
  for (std::size_t k = 0; k < frac_free.size(); ++k) rf[k] = r[frac_free[k]];

  const MatrixX Acc = MatrixX(SparseMatrix(ms.R0T.transpose() * Amm * ms.R0T));
  const MatrixX Acf = MatrixX(SparseMatrix(ms.R0T.transpose() * Amf));
  VectorX bc = ms.R0T.transpose() * r.head(nm);

  CoarseSolution sol;
  VectorX uf = VectorX::Zero(frac_free.size());
  if (frac_free.empty()) {
    const DenseSolve ds = solve_spsd(Acc, bc);
    sol.U0 = ds.x;
    sol.rank = ds.rank;
    sol.deficient_nodes = nodes_of(ds.null_columns, ms.column_node);
  } else {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(Aff);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff())
      throw Error("solve_coarse_efm: singular fracture block (fracture without coupling or Dirichlet end)");
    const MatrixX X = ldlt.solve(MatrixX(Acf.transpose()));
    const VectorX y = ldlt.solve(rf);
    MatrixX schur = Acc - Acf * X;
    schur = 0.5 * (schur + schur.transpose()).eval();
    const DenseSolve ds = solve_spsd(schur, bc - Acf * y);
    sol.U0 = ds.x;
    sol.rank = ds.rank;
    sol.deficient_nodes = nodes_of(ds.null_columns, ms.column_node);
    uf = y - X * sol.U0;
  }

  sol.u_fine = lift;
  sol.u_fine.head(nm) = prolong(ms, sol.U0);
  for (std::size_t k = 0; k < frac_free.size(); ++k) sol.u_fine[frac_free[k]] = uf[k];
  sol.fracture_dofs = sol.u_fine.tail(n - nm);
  return sol;
}

CoarseSolution solve_coarse(const MultiscaleSpace& ms, const FineSystem& sys) {
  return sys.mode == SystemMode::DfmMonolithic ? solve_coarse_dfm(ms, sys) : solve_coarse_efm(ms, sys);
}

}  // namespace fracms
