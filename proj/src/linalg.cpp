#include "fracms/linalg.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace fracms {

SparseMatrix submatrix(const SparseMatrix& A, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  std::vector<Index> rmap(A.rows(), -1), cmap(A.cols(), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) rmap[rows[k]] = static_cast<Index>(k);
  for (std::size_t k = 0; k < cols.size(); ++k) cmap[cols[k]] = static_cast<Index>(k);
  std::vector<Triplet> trip;
  for (Index c = 0; c < A.outerSize(); ++c) {
    if (cmap[c] < 0) continue;
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      if (rmap[it.row()] >= 0) trip.emplace_back(rmap[it.row()], cmap[c], it.value());
  }
  SparseMatrix S(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

VectorX solve_with_constraints(const SparseMatrix& A, const VectorX& F, const std::vector<char>& fixed,
                               const VectorX& values, double* relative_residual) {
  const Index n = A.rows();
  std::vector<Index> free_idx, fixed_idx;
  for (Index i = 0; i < n; ++i) (fixed[i] ? fixed_idx : free_idx).push_back(i);
  if (fixed_idx.empty()) throw Error("singular system: no Dirichlet constraints (pure Neumann problems are not supported)");

  VectorX u = VectorX::Zero(n);
  for (Index i : fixed_idx) u[i] = values[i];
  if (free_idx.empty()) {
    if (relative_residual) *relative_residual = 0.0;
    return u;
  }

  const SparseMatrix Aff = submatrix(A, free_idx, free_idx);
  const SparseMatrix Afd = submatrix(A, free_idx, fixed_idx);
  VectorX ud(fixed_idx.size());
  for (std::size_t k = 0; k < fixed_idx.size(); ++k) ud[k] = values[fixed_idx[k]];
  VectorX rhs(free_idx.size());
  for (std::size_t k = 0; k < free_idx.size(); ++k) rhs[k] = F[free_idx[k]];
  rhs -= Afd * ud;

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Aff);
  if (ldlt.info() != Eigen::Success) throw Error("singular system: sparse factorization failed");
  const VectorX& D = ldlt.vectorD();
  if (D.minCoeff() <= 1e-14 * D.cwiseAbs().maxCoeff()) throw Error("singular system: zero pivot in factorization");
  VectorX x = ldlt.solve(rhs);

  if (relative_residual) {
    const double r = (Aff * x - rhs).norm();
    const double scale = rhs.norm();
    *relative_residual = scale > 0.0 ? r / scale : r;
  }
  for (std::size_t k = 0; k < free_idx.size(); ++k) u[free_idx[k]] = x[k];
  return u;
}

DenseSolve solve_spsd(const MatrixX& A, const VectorX& b) {
  const Index n = A.rows();
  DenseSolve out;
  out.x = VectorX::Zero(n);
  if (n == 0) return out;

  VectorX d(n);
  for (Index i = 0; i < n; ++i) d[i] = A(i, i) > 0.0 ? 1.0 / std::sqrt(A(i, i)) : 0.0;
  const MatrixX As = d.asDiagonal() * A * d.asDiagonal();
  const VectorX bs = d.asDiagonal() * b;

  Eigen::LLT<MatrixX> llt(As);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
    out.x = d.asDiagonal() * llt.solve(bs);
    out.rank = n;
    return out;
  }

  Eigen::SelfAdjointEigenSolver<MatrixX> es(As);
  const VectorX& lam = es.eigenvalues();
  const double cut = 1e-11 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  VectorX y = VectorX::Zero(n);
  std::vector<Index> nulls;
  for (Index k = 0; k < n; ++k) {
    if (lam[k] > cut) {
      y += es.eigenvectors().col(k) * (es.eigenvectors().col(k).dot(bs) / lam[k]);
      ++out.rank;
    } else {
      Index arg;
      es.eigenvectors().col(k).cwiseAbs().maxCoeff(&arg);
      nulls.push_back(arg);
    }
  }
  for (Index i = 0; i < n; ++i)
    if (d[i] == 0.0) nulls.push_back(i);
  std::sort(nulls.begin(), nulls.end());
  nulls.erase(std::unique(nulls.begin(), nulls.end()), nulls.end());
  out.null_columns = std::move(nulls);
  out.x = d.asDiagonal() * y;
  return out;
}

}  // namespace fracms
