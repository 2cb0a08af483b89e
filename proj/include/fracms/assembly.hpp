/**
 * @file assembly.hpp
 * @brief Fine-scale operators for Darcy flow with discrete and embedded
 * fractures.
 *
 * The matrix is discretized with bilinear quadrilaterals and cell-wise
 * constant permeability. DFM fractures add linear 1D elements on fine-grid
 * edges. EFM fractures carry their own 1D nodes, appended after the matrix
 * nodes, and are tied to the matrix through connectivity-index transfer
 * terms:
 *
 *   CI_c = kappa(c) |S_c| / <d_c>,   <d_c> = |c| / (2 |S_c|),
 *
 * acting on (u_m(x_mid) - u_f(s_mid)) with bilinear weights on the matrix side
 * and 1D linear weights on the fracture side. The resulting block system is
 * symmetric with B_fm = B_mf^T.
 */
#pragma once

#include "fracms/fracture.hpp"

#include <array>
#include <functional>
#include <vector>

namespace fracms {

using ScalarField = std::function<double(const Vec2&)>;

struct PermeabilityField {
  VectorX kappa_cells;

  static PermeabilityField constant(const FineGrid& grid, double kappa);
  static PermeabilityField from_function(const FineGrid& grid, const ScalarField& kappa);
};

struct BoundaryData {
  ScalarField g;

  /// g(x, y) = a + b x + c y + d x y
  static BoundaryData bilinear(double a, double b, double c, double d);
};

enum class SystemMode { DfmMonolithic, EfmBlock };

/// One embedded fracture block of the global system.
struct EfmBlock {
  int fracture_id = 0;
  Index offset = 0;
  Index size = 0;
  EfmTrace trace;
};

struct FineSystem {
  SystemMode mode = SystemMode::DfmMonolithic;
  FineGrid grid;
  VectorX cell_kappa;
  /// DFM conductivity per fine edge (zero off fractures).
  VectorX edge_conductivity;
  Index num_matrix_dofs = 0;
  /// Full symmetric stiffness; for EFM the block matrix [A_m B_mf; B_fm B].
  SparseMatrix A;
  /// kappa-weighted mass matrix used by the weighted L2 norm.
  SparseMatrix M;
  VectorX F;
  std::vector<EfmBlock> efm;
  std::vector<char> dirichlet_mask;
  /// Prescribed values on masked dofs, zero elsewhere.
  VectorX dirichlet_values;
  double coupling_scale = 1.0;

  Index size() const { return A.rows(); }
  int num_efm() const { return static_cast<int>(efm.size()); }
  SparseMatrix matrix_block() const;
  SparseMatrix fracture_block(int i) const;
  /// B_mf^i, num_matrix_dofs x size_i.
  SparseMatrix coupling_block(int i) const;
  VectorX matrix_load() const { return F.head(num_matrix_dofs); }
  VectorX fracture_load(int i) const { return F.segment(efm[i].offset, efm[i].size); }
};

/// Bilinear element stiffness for a unit coefficient on an hx x hy cell.
Eigen::Matrix4d element_stiffness(double hx, double hy);
/// Bilinear element mass on an hx x hy cell.
Eigen::Matrix4d element_mass(double hx, double hy);

/// Stiffness over the cells of `box` plus DFM edges in its closure, in
/// box-local node numbering.
SparseMatrix assemble_stiffness(const FineGrid& grid, const VectorX& cell_kappa, const VectorX& edge_cond,
                                const CellBox& box);
/// Weighted mass over `box` (cell weights plus 1D edge weights).
SparseMatrix assemble_mass(const FineGrid& grid, const VectorX& cell_weight, const VectorX& edge_weight,
                           const CellBox& box);
VectorX assemble_load(const FineGrid& grid, const ScalarField& f, const CellBox& box);

FineSystem assemble_dfm(const FineGrid& grid, const PermeabilityField& perm, const std::vector<DfmTrace>& traces,
                        const ScalarField& f, const BoundaryData& bc);

struct EfmOptions {
  /// Multiplies every connectivity index; 0 decouples the fractures.
  double coupling_scale = 1.0;
};

FineSystem assemble_efm(const FineGrid& grid, const PermeabilityField& perm, const std::vector<DfmTrace>& dfm_traces,
                        const std::vector<EfmTrace>& efm_traces, const ScalarField& f, const BoundaryData& bc,
                        const EfmOptions& opts = {});

/// One matrix-fracture transfer term, CI * (sum_a coef_a u_{dofs_a})^2: four
/// cell nodes with bilinear weights, then two fracture dofs with negated 1D
/// weights.
struct EfmCoupling {
  int cell = 0;
  double ci = 0.0;
  std::array<Index, 6> dofs{};
  std::array<double, 6> coef{};
};

/// Transfer terms of one embedded fracture block, in overlap order.
std::vector<EfmCoupling> efm_couplings(const FineSystem& sys, const EfmBlock& blk);

struct FineSolution {
  VectorX u;
  double relative_residual = 0.0;
};

FineSolution solve_fine(const FineSystem& sys);

}  // namespace fracms
