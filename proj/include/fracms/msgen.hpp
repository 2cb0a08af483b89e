/**
 * @file msgen.hpp
 * @brief Offline stage: multiscale partition of unity, local snapshot spaces
 * and the local spectral problems selecting the offline basis.
 *
 * Local problems use the matrix operator with DFM fractures (cell
 * permeability plus 1D edge conductivities) and, in EFM mode, the embedded
 * fracture pieces inside the box with their transfer terms. The local
 * fracture unknowns are eliminated, so every local space lives on matrix
 * nodes; the global fracture unknowns stay at the fine scale in the coarse
 * system.
 */
#pragma once

#include "fracms/assembly.hpp"
#include "fracms/mesh.hpp"

#include <cstdint>
#include <vector>

namespace fracms {

struct PartitionOfUnity {
  /// chi[i] holds chi_i on the nodes of omega_i (box-local order).
  std::vector<VectorX> chi;
  /// Per fine cell: H^2 * sum_i |grad chi_i|^2 (cell average).
  VectorX gradient_energy;
  /// Per fine cell: kappa * gradient_energy.
  VectorX kappa_tilde;
  /// Per fine edge: c * H^2 * sum_i (d chi_i / ds)^2 on DFM edges.
  VectorX edge_weight;
  /// Global kappa_tilde-weighted mass matrix on matrix dofs.
  SparseMatrix S;

  VectorX chi_global(const GridHierarchy& grid, int i) const;
};

PartitionOfUnity compute_pou(const GridHierarchy& grid, const FineSystem& sys);

enum class SnapshotKind { Full, Randomized };

struct SnapshotSpace {
  int omega_id = 0;
  SnapshotKind kind = SnapshotKind::Full;
  /// Snapshot columns on the nodes of omega_i (box-local order).
  MatrixX vectors;
  /// Boundary data used on the generation box (rows: its boundary nodes);
  /// excludes the constant snapshot.
  MatrixX boundary_data;
  int oversampling = 0;
  int buffer = 0;
  bool constant_included = false;

  Index size() const { return vectors.cols(); }
};

/// Local operator on `box`: box-local matrix nodes first, then the embedded
/// fracture dofs touched by transfer terms of cells in the box.
struct LocalOperator {
  SparseMatrix A;
  Index num_matrix = 0;
};

LocalOperator local_operator(const FineSystem& sys, const CellBox& box);

/// Energy Gram matrix of matrix-node fields on `box`, with the local fracture
/// unknowns at their energy minimum (Schur complement).
MatrixX local_energy(const FineSystem& sys, const CellBox& box, const MatrixX& values);

/// kappa-harmonic extensions on `box` of the given boundary values (rows
/// ordered like FineGrid::box_boundary_nodes). Returns values on all box
/// nodes in box-local order.
MatrixX harmonic_extension(const FineSystem& sys, const CellBox& box, const MatrixX& boundary_values);

/// Values on `outer` box nodes restricted to the nodes of `inner`.
MatrixX restrict_to_box(const MatrixX& values, const CellBox& outer, const CellBox& inner);

/// One harmonic extension per fine boundary node of omega_i. With
/// `oversampled` the unit hats live on the boundary of omega_i^+ and the
/// extensions are restricted to omega_i.
SnapshotSpace full_snapshots(const GridHierarchy& grid, const FineSystem& sys, int omega_id, bool oversampled = false);

/// k_nb + p_bf harmonic extensions of i.i.d. uniform(-1, 1) data on the
/// boundary of omega_i^+, restricted to omega_i, plus the constant snapshot.
SnapshotSpace randomized_snapshots(const GridHierarchy& grid, const FineSystem& sys, int omega_id, int k_nb, int p_bf,
                                   std::uint64_t seed);

/// Snapshot directions whose S_off eigenvalue falls below this fraction of
/// the largest are treated as dependent and dropped.
inline constexpr double kSnapshotDependenceTol = 1e-12;

struct NeighborhoodSpace {
  int omega_id = 0;
  /// Generalized eigenvalues on the independent snapshot directions, ascending.
  VectorX eigenvalues;
  /// S_off-orthonormal eigenvectors in snapshot coordinates (columns).
  MatrixX eigenvectors;
  /// Snapshots times eigenvectors on omega_i nodes. Column 0 is rescaled to
  /// unit mean when it is not sign-changing.
  MatrixX offline_basis;
  int m_off = 1;
  MatrixX A_off, S_off;
  /// Dependent snapshot directions were dropped.
  bool regularized = false;

  /// Number of independent snapshot directions (the cap on m_off).
  Index num_snapshots() const { return eigenvalues.size(); }
  /// lambda_{m_off + 1}, or +inf if every eigenvector is in use.
  double next_eigenvalue() const;
};

NeighborhoodSpace offline_eigendecomposition(const SnapshotSpace& snap, const GridHierarchy& grid,
                                             const FineSystem& sys, const PartitionOfUnity& pou, int m_off);

struct SnapshotOptions {
  SnapshotKind kind = SnapshotKind::Full;
  /// Full snapshots generated on omega_i^+ instead of omega_i.
  bool oversampled = false;
  int p_bf = 4;
  std::uint64_t seed = 0;
};

/// Snapshot spaces for every neighborhood; `k_nb` is only used by the
/// randomized kind (one entry per coarse node).
std::vector<SnapshotSpace> build_snapshots(const GridHierarchy& grid, const FineSystem& sys,
                                           const SnapshotOptions& opts, const std::vector<int>& k_nb = {});

std::vector<NeighborhoodSpace> build_offline_spaces(const GridHierarchy& grid, const FineSystem& sys,
                                                    const PartitionOfUnity& pou,
                                                    const std::vector<SnapshotSpace>& snapshots,
                                                    const std::vector<int>& m_off);

/// Number of unit-hat snapshots a full (non-randomized) space on the
/// generation box would contain.
int full_snapshot_count(const GridHierarchy& grid, int omega_id, bool oversampled);

/// Generated harmonic extensions (constant snapshot excluded) over the unit-hat
/// count on the boundary of the unclipped omega_i^+, summed over interior
/// coarse nodes.
double snapshot_ratio(const GridHierarchy& grid, const std::vector<SnapshotSpace>& snapshots);

}  // namespace fracms
