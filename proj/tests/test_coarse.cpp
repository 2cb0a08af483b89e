#include "fracms/coarse.hpp"
#include "fracms/analysis.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

using namespace fracms;
using namespace fracms::test;

namespace {

std::vector<NeighborhoodSpace> with_counts(std::vector<NeighborhoodSpace> spaces, int m) {
  for (auto& s : spaces) s.m_off = std::min<int>(m, static_cast<int>(s.num_snapshots()));
  return spaces;
}

std::vector<NeighborhoodSpace> all_vectors(std::vector<NeighborhoodSpace> spaces) {
  for (auto& s : spaces) s.m_off = static_cast<int>(s.num_snapshots());
  return spaces;
}

}  // namespace

TEST(CoarseSpace, ConstantKappaIsBilinearFem) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 3, 4, 0);
  const auto sys = dfm_system(h, {}, 0.0, BoundaryData::bilinear(0.5, 1, -2, 3));
  const auto pou = compute_pou(h, sys);
  const auto spaces = offline(h, sys, pou, 1);
  const auto ms = build_space(h, pou, spaces, sys);
  EXPECT_EQ(ms.dim(), h.num_coarse_nodes());
  const auto sol = solve_coarse(ms, sys);
  for (int n = 0; n < h.fine.num_nodes(); ++n) {
    const Vec2 p = h.fine.node_position(n);
    EXPECT_NEAR(sol.u_fine[n], 0.5 + p.x() - 2 * p.y() + 3 * p.x() * p.y(), 1e-11);
  }
  // First offline vectors reproduce unity through the partition.
  VectorX sum = VectorX::Zero(h.fine.num_nodes());
  for (int i = 0; i < h.num_coarse_nodes(); ++i) {
    const auto nodes = h.fine.box_nodes(h.neighborhoods[i]);
    for (std::size_t q = 0; q < nodes.size(); ++q) sum[nodes[q]] += pou.chi[i][q] * spaces[i].offline_basis(q, 0);
  }
  EXPECT_LT((sum - VectorX::Ones(sum.size())).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CoarseSpace, AssembledA0MatchesDenseProduct) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 2, 2, 4, 0);
  const auto sys = dfm_system(h, {dfm(0, {{0.25, 0.25}, {0.75, 0.5}})});
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, with_counts(offline(h, sys, pou, 1), 3), sys);
  const MatrixX R = dense(ms.R0T);
  const MatrixX oracle = R.transpose() * dense(sys.A) * R;
  const MatrixX A0 = coarse_matrix(ms, sys);
  EXPECT_LT((A0 - oracle).cwiseAbs().maxCoeff(), 1e-12 * oracle.cwiseAbs().maxCoeff());
}

TEST(CoarseSpace, BasisSupportAndBoundaryRows) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 4, 1);
  const auto sys = dfm_system(h, three_fractures());
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, with_counts(offline(h, sys, pou, 1), 2), sys);
  const MatrixX R = dense(ms.R0T);
  for (Index c = 0; c < ms.dim(); ++c) {
    const CellBox& om = h.neighborhoods[ms.column_node[c]];
    for (int n = 0; n < h.fine.num_nodes(); ++n) {
      const auto [i, j] = h.fine.node_ij(n);
      if (!om.contains_node(i, j) || om.on_boundary(i, j) || sys.dirichlet_mask[n]) EXPECT_EQ(R(n, c), 0.0);
    }
  }
  Eigen::ColPivHouseholderQR<MatrixX> qr(R);
  EXPECT_EQ(qr.rank(), ms.dim());
}

TEST(CoarseSolve, AllSnapshotsRecoverTheFineSolution) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  // Source-free: the fine solution is harmonic in every omega and hence in the span.
  const auto sys = dfm_system(h, three_fractures(), 0.0, BoundaryData{[](const Vec2& p) { return std::sin(3 * p.x()) + p.y() * p.y(); }});
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, all_vectors(offline(h, sys, pou, 1)), sys);
  const auto sol = solve_coarse(ms, sys);
  const VectorX u = solve_fine(sys).u;
  const auto err = compute_errors(sys, u, sol.u_fine);
  EXPECT_LT(err.rel_energy_fine, 1e-10);
}

TEST(CoarseSolve, NestedSpacesDoNotIncreaseEnergyError) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 5, 1);
  const auto sys = dfm_system(h, three_fractures(), 1.0);
  const auto pou = compute_pou(h, sys);
  const auto base = offline(h, sys, pou, 1);
  const VectorX u = solve_fine(sys).u;
  double prev = 1e300;
  for (int m = 1; m <= 6; ++m) {
    const auto sol = solve_coarse(build_space(h, pou, with_counts(base, m), sys), sys);
    const double e = compute_errors(sys, u, sol.u_fine).rel_energy_fine;
    EXPECT_LE(e, prev + 1e-12) << "m=" << m;
    prev = e;
  }
}

TEST(CoarseSolve, GalerkinOrthogonality) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 2);
  const auto sys = dfm_system(h, three_fractures(), 1.0);
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, with_counts(offline(h, sys, pou, 1, true), 2), sys);
  const auto sol = solve_coarse(ms, sys);
  const VectorX res = ms.R0T.transpose() * (sys.A * sol.u_fine - sys.F);
  EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, sys.F.cwiseAbs().maxCoeff()));
}

TEST(CoarseSolve, RankDeficiencyIsReported) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 3, 0);
  const auto sys = dfm_system(h, {});
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, offline(h, sys, pou, 1), sys);
  // Duplicate every column: the coarse matrix has rank dim/2.
  SparseMatrix twice(ms.R0T.rows(), 2 * ms.dim());
  std::vector<Triplet> trip;
  for (Index c = 0; c < ms.R0T.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(ms.R0T, c); it; ++it) {
      trip.emplace_back(it.row(), c, it.value());
      trip.emplace_back(it.row(), c + ms.dim(), it.value());
    }
  twice.setFromTriplets(trip.begin(), trip.end());
  MultiscaleSpace dup = space_from_columns(twice, h, pou, sys);
  dup.column_node = ms.column_node;
  dup.column_node.insert(dup.column_node.end(), ms.column_node.begin(), ms.column_node.end());
  const auto sol = solve_coarse(dup, sys);
  const auto ref = solve_coarse(ms, sys);
  EXPECT_LT(sol.rank, dup.dim());
  EXPECT_FALSE(sol.deficient_nodes.empty());
  EXPECT_LT((sol.u_fine - ref.u_fine).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Prolong, LiftColumnsAndDenseProduct) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 3, 0);
  const auto sys = dfm_system(h, three_fractures(), 0.0, BoundaryData::bilinear(0, 0, 0, 0));
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, with_counts(offline(h, sys, pou, 1), 2), sys);
  EXPECT_EQ(prolong(ms, VectorX::Zero(ms.dim())), ms.lift);
  EXPECT_EQ(ms.lift.cwiseAbs().maxCoeff(), 0.0);
  const MatrixX R = dense(ms.R0T);
  for (Index k = 0; k < ms.dim(); k += 5) EXPECT_LT((prolong(ms, VectorX::Unit(ms.dim(), k)) - R.col(k)).cwiseAbs().maxCoeff(), 1e-15);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  VectorX U(ms.dim());
  for (auto& x : U) x = nd(rng);
  EXPECT_LT((prolong(ms, U) - R * U).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_THROW(prolong(ms, VectorX::Zero(ms.dim() + 1)), Error);
}

namespace {

FineSystem efm_coarse_system(const GridHierarchy& h, double scale) {
  const FineGrid& g = h.fine;
  const auto fr = efm(5, {{0.0, 0.21}, {1.0, 0.77}});
  return assemble_efm(g, PermeabilityField::constant(g, 1.0), rasterize_all({dfm(0, {{0.2, 0.8}, {0.4, 0.6}})}, g),
                      {intersect_efm(fr, g, g.hx())}, constant_field(1.0), BoundaryData::bilinear(0, 1, 0, 0),
                      EfmOptions{scale});
}

}  // namespace

TEST(CoarseEfm, ZeroCouplingMatchesMatrixOnlySolve) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 6, 0);
  const auto sys = efm_coarse_system(h, 0.0);
  const auto dsys = assemble_dfm(h.fine, PermeabilityField::constant(h.fine, 1.0),
                                 rasterize_all({dfm(0, {{0.2, 0.8}, {0.4, 0.6}})}, h.fine), constant_field(1.0),
                                 BoundaryData::bilinear(0, 1, 0, 0));
  const auto pou = compute_pou(h, sys);
  const auto spaces = with_counts(offline(h, sys, pou, 1), 2);
  const auto a = solve_coarse(build_space(h, pou, spaces, sys), sys);
  const auto b = solve_coarse(build_space(h, pou, spaces, dsys), dsys);
  EXPECT_LT((a.u_fine.head(sys.num_matrix_dofs) - b.u_fine).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(CoarseEfm, BlockSolveMatchesDenseMonolithic) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 6, 0);
  const auto sys = efm_coarse_system(h, 1.0);
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, with_counts(offline(h, sys, pou, 1), 2), sys);
  const auto sol = solve_coarse(ms, sys);

  // Dense oracle: unknowns [U0; free fracture dofs] with the block matrix
  // [R^T A_m R, R^T B_mf; B_fm R, B] and the lift moved to the right side.
  const Index nm = sys.num_matrix_dofs, n = sys.size();
  MatrixX P = MatrixX::Zero(n, ms.dim());
  P.topRows(nm) = dense(ms.R0T);
  std::vector<Index> ff;
  for (Index k = nm; k < n; ++k)
    if (!sys.dirichlet_mask[k]) ff.push_back(k);
  MatrixX T(n, ms.dim() + ff.size());
  T.setZero();
  T.leftCols(ms.dim()) = P;
  for (std::size_t k = 0; k < ff.size(); ++k) T(ff[k], ms.dim() + k) = 1.0;
  VectorX lift = sys.dirichlet_values;
  lift.head(nm) = ms.lift;
  const MatrixX A = dense(sys.A);
  const MatrixX K = T.transpose() * A * T;
  const VectorX rhs = T.transpose() * (sys.F - A * lift);
  const VectorX x = K.ldlt().solve(rhs);
  const VectorX u = lift + T * x;
  EXPECT_LT((sol.u_fine - u).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-12 * K.cwiseAbs().maxCoeff());
}

TEST(CoarseSolve, RejectsWrongMode) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 2, 2, 4, 0);
  const auto sys = efm_coarse_system(h, 1.0);
  const auto pou = compute_pou(h, sys);
  const auto ms = build_space(h, pou, offline(h, sys, pou, 1), sys);
  EXPECT_THROW(solve_coarse_dfm(ms, sys), Error);
}
