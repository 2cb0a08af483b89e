#pragma once

#include "fracms/types.hpp"

#include <vector>

namespace fracms {

/// Rows/columns of a sparse matrix selected by index lists.
SparseMatrix submatrix(const SparseMatrix& A, const std::vector<Index>& rows, const std::vector<Index>& cols);

/// Solves A u = F with u prescribed on the masked entries. `values` carries the
/// prescribed entries (other entries ignored). The reduced matrix must be SPD.
VectorX solve_with_constraints(const SparseMatrix& A, const VectorX& F, const std::vector<char>& fixed,
                               const VectorX& values, double* relative_residual = nullptr);

struct DenseSolve {
  VectorX x;
  Index rank = 0;
  /// Columns carrying the largest weight in the discarded null directions.
  std::vector<Index> null_columns;
};

/// Symmetric positive semi-definite solve. Uses Cholesky when the
/// Jacobi-scaled matrix is well conditioned, otherwise a truncated
/// eigen-decomposition (minimum-norm solution on the numerical range).
DenseSolve solve_spsd(const MatrixX& A, const VectorX& b);

}  // namespace fracms
