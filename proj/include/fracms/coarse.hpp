/**
 * @file coarse.hpp
 * @brief Global multiscale space psi_{i,k} = chi_i * psi_k^{omega_i}, the
 * prolongation R0^T and the coarse Galerkin solves.
 *
 * Dirichlet data enters through a lift: sum over boundary coarse nodes of
 * g(x_i) chi_i, overwritten by the exact data on boundary fine nodes. Basis
 * columns are zero on Dirichlet nodes, so u_ms = lift + R0^T U0 satisfies the
 * boundary condition for every U0.
 */
#pragma once

#include "fracms/msgen.hpp"

#include <vector>

namespace fracms {

struct MultiscaleSpace {
  /// Basis vectors on matrix dofs (columns), zero on Dirichlet nodes.
  SparseMatrix R0T;
  /// Offline vectors used per coarse node.
  std::vector<int> counts;
  /// Coarse node owning each column.
  std::vector<int> column_node;
  /// Matrix-dof lift carrying the Dirichlet data.
  VectorX lift;

  Index dim() const { return R0T.cols(); }
};

/// Products chi_i * offline_basis(:, k) for k < m_off.
MultiscaleSpace build_space(const GridHierarchy& grid, const PartitionOfUnity& pou,
                            const std::vector<NeighborhoodSpace>& spaces, const FineSystem& sys);

/// Products chi_i * snapshot for every snapshot (the space u_snap lives in).
MultiscaleSpace build_snapshot_space(const GridHierarchy& grid, const PartitionOfUnity& pou,
                                     const std::vector<SnapshotSpace>& snapshots, const FineSystem& sys);

/// Space from explicit columns; rows of `columns` are matrix dofs.
MultiscaleSpace space_from_columns(const SparseMatrix& columns, const GridHierarchy& grid, const PartitionOfUnity& pou,
                                   const FineSystem& sys);

VectorX coarse_lift(const GridHierarchy& grid, const PartitionOfUnity& pou, const FineSystem& sys);

struct CoarseSolution {
  VectorX U0;
  /// Full fine vector: matrix nodes, then EFM fracture dofs.
  VectorX u_fine;
  /// EFM mode: the retained fracture unknowns (all fractures, stacked).
  VectorX fracture_dofs;
  Index rank = 0;
  /// Coarse nodes whose columns span the numerical null space of A0.
  std::vector<int> deficient_nodes;
};

CoarseSolution solve_coarse_dfm(const MultiscaleSpace& ms, const FineSystem& sys);
CoarseSolution solve_coarse_efm(const MultiscaleSpace& ms, const FineSystem& sys);
/// Dispatches on the system mode.
CoarseSolution solve_coarse(const MultiscaleSpace& ms, const FineSystem& sys);

/// lift + R0^T U0 on the matrix dofs.
VectorX prolong(const MultiscaleSpace& ms, const VectorX& U0);

/// A0 = R0 A R0^T over the matrix block.
MatrixX coarse_matrix(const MultiscaleSpace& ms, const FineSystem& sys);

}  // namespace fracms
