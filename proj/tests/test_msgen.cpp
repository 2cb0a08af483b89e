#include "fracms/msgen.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <random>

using namespace fracms;
using namespace fracms::test;

namespace {

double coarse_hat(const GridHierarchy& h, int id, const Vec2& p) {
  const auto [I, J] = h.coarse_node_ij(id);
  const Vec2 x = h.fine.node_position(h.coarse_node_fine(id));
  return std::max(0.0, 1.0 - std::abs(p.x() - x.x()) / h.Hx) * std::max(0.0, 1.0 - std::abs(p.y() - x.y()) / h.Hy) *
         (I >= 0 && J >= 0 ? 1.0 : 0.0);
}

VectorX chi_sum(const GridHierarchy& h, const PartitionOfUnity& pou) {
  VectorX s = VectorX::Zero(h.fine.num_nodes());
  for (int i = 0; i < h.num_coarse_nodes(); ++i) s += pou.chi_global(h, i);
  return s;
}

PermeabilityField random_kappa(const FineGrid& g, unsigned seed) {
  PermeabilityField p = PermeabilityField::constant(g, 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int c = 0; c < g.num_cells(); ++c) p.kappa_cells[c] = std::pow(10.0, u(rng));
  return p;
}

}  // namespace

TEST(Pou, ConstantKappaGivesBilinearHats) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 4, 4, 0);
  const auto sys = dfm_system(h, {});
  const auto pou = compute_pou(h, sys);
  for (int i = 0; i < h.num_coarse_nodes(); ++i) {
    const VectorX chi = pou.chi_global(h, i);
    for (int n = 0; n < h.fine.num_nodes(); ++n) EXPECT_NEAR(chi[n], coarse_hat(h, i, h.fine.node_position(n)), 1e-13);
  }
  EXPECT_LT((chi_sum(h, pou) - VectorX::Ones(h.fine.num_nodes())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pou, SumsToOneWithFracturesAndRoughKappa) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 1);
  const auto sys = assemble_dfm(h.fine, random_kappa(h.fine, 9), rasterize_all(three_fractures(), h.fine),
                                constant_field(0.0), BoundaryData::bilinear(0, 1, 0, 0));
  const auto pou = compute_pou(h, sys);
  EXPECT_LT((chi_sum(h, pou) - VectorX::Ones(h.fine.num_nodes())).cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 0; i < h.num_coarse_nodes(); ++i) {
    const VectorX chi = pou.chi_global(h, i);
    EXPECT_GE(chi.minCoeff(), -1e-12);
    EXPECT_LE(chi.maxCoeff(), 1.0 + 1e-12);
    for (int j = 0; j < h.num_coarse_nodes(); ++j)
      EXPECT_NEAR(chi[h.coarse_node_fine(j)], i == j ? 1.0 : 0.0, 1e-14);
  }
  for (int c = 0; c < h.fine.num_cells(); ++c) EXPECT_GT(pou.kappa_tilde[c], 0.0);
}

TEST(Pou, KappaTildeMatchesAnalyticHats) {
  // H = 0.5, fine cell [0.25, 0.5]^2 next to the center.
  const auto h = build_hierarchy({0, 1, 0, 1}, 2, 2, 2, 0);
  const auto sys = dfm_system(h, {});
  const auto pou = compute_pou(h, sys);
  // Coarse element [0, 0.5]^2 with s = x / H, t = y / H: the four hats give
  // H^2 sum |grad chi|^2 = 2 [(1-t)^2 + t^2 + (1-s)^2 + s^2]. Average over
  // s, t in [0.5, 1] by 5-point Gauss-Legendre.
  const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                        0.2369268850561891};
  double avg = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const double s = 0.75 + 0.25 * xg[a], t = 0.75 + 0.25 * xg[b];
      avg += 0.25 * wg[a] * wg[b] * 2.0 * ((1 - t) * (1 - t) + t * t + (1 - s) * (1 - s) + s * s);
    }
  const int cell = h.fine.cell(1, 1);
  EXPECT_NEAR(pou.gradient_energy[cell], avg, 1e-13);
  EXPECT_NEAR(pou.kappa_tilde[cell], avg, 1e-13);
}

TEST(Snapshots, SingleInteriorUnknown) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 2, 2, 2, 0);
  const auto sys = dfm_system(h, {});
  const auto s = full_snapshots(h, sys, 0);
  ASSERT_EQ(s.size(), 8);
  // Interior row of the Q1 stencil on squares: 8/3 on the diagonal, -1/3 to
  // each of the 8 neighbours, so each boundary hat yields (1/3) / (8/3).
  const int centre = h.neighborhoods[0].local_node(1, 1);
  for (Index k = 0; k < s.size(); ++k) EXPECT_NEAR(s.vectors(centre, k), (1.0 / 3.0) / (8.0 / 3.0), 1e-14);
  const VectorX total = s.vectors.rowwise().sum();
  EXPECT_LT((total - VectorX::Ones(total.size())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Snapshots, FractureSpreadsHatAndMatchesDenseSolve) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  // Fracture from the omega boundary into its interior.
  const auto sys = dfm_system(h, {dfm(0, {{0.25, 0.5}, {0.625, 0.5}}, 1e-2)});
  const int id = h.coarse_node(2, 2);
  const auto s = full_snapshots(h, sys, id);
  const CellBox& box = h.neighborhoods[id];
  const auto nodes = h.fine.box_nodes(box);
  const auto bnd = h.fine.box_boundary_nodes(box);
  // Boundary hat at the left fracture end (0.25, 0.5).
  const int target = h.fine.node(4, 8);
  const int k = static_cast<int>(std::find(bnd.begin(), bnd.end(), target) - bnd.begin());
  ASSERT_LT(k, static_cast<int>(bnd.size()));

  // Dense local oracle on the omega box.
  const MatrixX Aloc = dense(assemble_stiffness(h.fine, sys.cell_kappa, sys.edge_conductivity, box));
  std::vector<int> is_bnd(nodes.size(), 0);
  for (std::size_t q = 0; q < nodes.size(); ++q) is_bnd[q] = std::count(bnd.begin(), bnd.end(), nodes[q]) > 0;
  VectorX g = VectorX::Zero(nodes.size());
  g[std::find(nodes.begin(), nodes.end(), target) - nodes.begin()] = 1.0;
  std::vector<int> fr;
  for (std::size_t q = 0; q < nodes.size(); ++q)
    if (!is_bnd[q]) fr.push_back(static_cast<int>(q));
  MatrixX Aff(fr.size(), fr.size());
  VectorX rhs(fr.size());
  for (std::size_t a = 0; a < fr.size(); ++a) {
    rhs[a] = -(Aloc.row(fr[a]) * g)(0);
    for (std::size_t b = 0; b < fr.size(); ++b) Aff(a, b) = Aloc(fr[a], fr[b]);
  }
  const VectorX x = Aff.ldlt().solve(rhs);
  VectorX ref = g;
  for (std::size_t a = 0; a < fr.size(); ++a) ref[fr[a]] = x[a];
  EXPECT_LT((s.vectors.col(k) - ref).cwiseAbs().maxCoeff(), 1e-12);

  // Interior fracture nodes share nearly one value.
  double lo = 1e300, hi = -1e300;
  for (int i = 5; i <= 10; ++i) {
    const double v = s.vectors(box.local_node(i, 8), k);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LT(hi - lo, 1e-2 * hi);
  EXPECT_GT(lo, s.vectors(box.local_node(8, 7), k));
}

TEST(Snapshots, RandomizedCountAndDeterminism) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 5, 2);
  const auto sys = dfm_system(h, three_fractures());
  const int id = h.coarse_node(2, 2);
  for (int n : {1, 3, 5}) {
    const auto s = randomized_snapshots(h, sys, id, n, 2, 42);
    EXPECT_EQ(s.size(), n + 3);
    EXPECT_TRUE(s.constant_included);
    EXPECT_EQ(s.boundary_data.cols(), n + 2);
  }
  const auto a = randomized_snapshots(h, sys, id, 3, 4, 7);
  const auto b = randomized_snapshots(h, sys, id, 3, 4, 7);
  const auto c = randomized_snapshots(h, sys, id, 3, 4, 8);
  EXPECT_EQ(std::memcmp(a.vectors.data(), b.vectors.data(), sizeof(double) * a.vectors.size()), 0);
  EXPECT_GT((a.vectors - c.vectors).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LE(a.boundary_data.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Snapshots, RatioOnTheReferenceGrid) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 10, 10, 10, 2);
  const auto sys = dfm_system(h, {});
  const double expected[3] = {5.21, 6.25, 7.29};
  for (int m = 3; m <= 5; ++m) {
    const auto snaps = build_snapshots(h, sys, SnapshotOptions{SnapshotKind::Randomized, true, 2, 1},
                                       std::vector<int>(h.num_coarse_nodes(), m));
    EXPECT_NEAR(100.0 * snapshot_ratio(h, snaps), expected[m - 3], 0.005);
  }
}

TEST(Offline, ConstantKappaFirstModeIsConstant) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 4, 0);
  const auto sys = dfm_system(h, {});
  const auto pou = compute_pou(h, sys);
  for (int id : {0, h.coarse_node(1, 1), h.coarse_node(3, 2)}) {
    const auto ns = offline_eigendecomposition(full_snapshots(h, sys, id), h, sys, pou, 1);
    EXPECT_NEAR(ns.eigenvalues[0], 0.0, 1e-10);
    const VectorX v = ns.offline_basis.col(0);
    EXPECT_LT((v - VectorX::Ones(v.size())).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Offline, SingleSnapshotGivesRayleighQuotient) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 4, 0);
  const auto sys = dfm_system(h, {dfm(0, {{0.25, 0.25}, {0.5, 0.6}})});
  const auto pou = compute_pou(h, sys);
  const int id = h.coarse_node(1, 1);
  SnapshotSpace s = full_snapshots(h, sys, id);
  s.vectors = s.vectors.col(3).eval();
  const auto ns = offline_eigendecomposition(s, h, sys, pou, 1);
  ASSERT_EQ(ns.num_snapshots(), 1);
  const CellBox& box = h.neighborhoods[id];
  const MatrixX A = dense(assemble_stiffness(h.fine, sys.cell_kappa, sys.edge_conductivity, box));
  const MatrixX S = dense(assemble_mass(h.fine, pou.kappa_tilde, pou.edge_weight, box));
  const VectorX p = s.vectors.col(0);
  EXPECT_NEAR(ns.eigenvalues[0], p.dot(A * p) / p.dot(S * p), 1e-12 * ns.eigenvalues[0]);
}

TEST(Offline, OrderedNonNegativeAndSOrthonormal) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 1);
  const auto sys = assemble_dfm(h.fine, random_kappa(h.fine, 4), rasterize_all(three_fractures(), h.fine),
                                constant_field(0.0), BoundaryData::bilinear(0, 1, 0, 0));
  const auto pou = compute_pou(h, sys);
  for (bool over : {false, true}) {
    const auto spaces = offline(h, sys, pou, 2, over);
    for (const auto& ns : spaces) {
      EXPECT_GE(ns.eigenvalues.minCoeff(), -1e-10 * std::max(1.0, ns.eigenvalues.maxCoeff()));
      for (Index k = 1; k < ns.eigenvalues.size(); ++k) EXPECT_LE(ns.eigenvalues[k - 1], ns.eigenvalues[k]);
      const MatrixX G = ns.eigenvectors.transpose() * ns.S_off * ns.eigenvectors;
      EXPECT_LT((G - MatrixX::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff(), 1e-8) << ns.omega_id;
    }
  }
}

TEST(Offline, EnlargingTheSnapshotSpaceLowersEigenvalues) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 5, 2);
  const auto sys = dfm_system(h, three_fractures());
  const auto pou = compute_pou(h, sys);
  for (int id : {h.coarse_node(1, 1), h.coarse_node(2, 2), h.coarse_node(0, 2)}) {
    const auto full = offline_eigendecomposition(full_snapshots(h, sys, id), h, sys, pou, 1);
    const auto rnd = offline_eigendecomposition(randomized_snapshots(h, sys, id, 4, 4, 3), h, sys, pou, 1);
    for (Index k = 0; k < rnd.num_snapshots(); ++k) EXPECT_LE(full.eigenvalues[k], rnd.eigenvalues[k] * (1 + 1e-9) + 1e-12);
  }
}

TEST(Offline, CrossingFracturesAndSmallEigenvalues) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 10, 10, 10, 0);
  const int id = h.coarse_node(5, 5);
  auto spectrum = [&](const std::vector<Fracture>& fr) {
    const auto sys = dfm_system(h, fr);
    return offline_eigendecomposition(full_snapshots(h, sys, id), h, sys, compute_pou(h, sys), 1).eigenvalues;
  };
  // Contrast 1e4 with aperture 1e-3; both fractures cross omega side to side.
  const auto upper = dfm(0, {{0.37, 0.53}, {0.63, 0.53}});
  const auto lower = dfm(1, {{0.37, 0.45}, {0.63, 0.45}});
  const VectorX one = spectrum({upper});
  const VectorX two = spectrum({upper, lower});
  // One channel is absorbed by the constant mode.
  EXPECT_LT(std::abs(one[0]), 1e-9);
  EXPECT_GT(one[1], 10.0);
  // A second, disjoint channel adds exactly one small eigenvalue.
  EXPECT_LT(std::abs(two[0]), 1e-9);
  EXPECT_GE(two[2] / two[1], 10.0);
  EXPECT_GT(two[3] / two[2], 0.5);
  // Frozen regression values.
  EXPECT_NEAR(two[1], 2.30561, 1e-4);
  EXPECT_NEAR(two[2], 210.791, 1e-2);
}

TEST(Offline, RegularizesDependentSnapshots) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 3, 3, 4, 0);
  const auto sys = dfm_system(h, {});
  const auto pou = compute_pou(h, sys);
  SnapshotSpace s = full_snapshots(h, sys, h.coarse_node(1, 1));
  MatrixX twice(s.vectors.rows(), 2 * s.vectors.cols());
  twice << s.vectors, s.vectors;
  s.vectors = twice;
  const auto ns = offline_eigendecomposition(s, h, sys, pou, 1);
  EXPECT_TRUE(ns.regularized);
  EXPECT_TRUE(ns.eigenvalues.allFinite());
}

namespace {

FineSystem embedded_system(const GridHierarchy& h, std::vector<Vec2> pts, double scale = 1.0) {
  const FineGrid& g = h.fine;
  return assemble_efm(g, PermeabilityField::constant(g, 1.0), {}, {intersect_efm(efm(3, std::move(pts)), g, g.hx())},
                      constant_field(0.0), BoundaryData::bilinear(0, 1, 2, 1), EfmOptions{scale});
}

}  // namespace

TEST(LocalOperator, EmbeddedFractureTermsAreSymmetricAndKeepConstants) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  const auto sys = embedded_system(h, {{0.1, 0.2}, {0.9, 0.7}});
  const CellBox& om = h.neighborhoods[h.coarse_node(2, 2)];
  const auto op = local_operator(sys, om);
  EXPECT_EQ(op.num_matrix, om.num_nodes());
  EXPECT_GT(op.A.rows(), op.num_matrix);
  const MatrixX A = dense(op.A);
  EXPECT_LT((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-14 * A.cwiseAbs().maxCoeff());
  EXPECT_LT((A * VectorX::Ones(A.rows())).cwiseAbs().maxCoeff(), 1e-12 * A.cwiseAbs().maxCoeff());
  const MatrixX ext = harmonic_extension(sys, om, MatrixX::Ones(h.fine.box_boundary_nodes(om).size(), 1));
  EXPECT_LT((ext.array() - 1.0).abs().maxCoeff(), 1e-12);

  const auto plain = dfm_system(h, {});
  const MatrixX M = dense(local_operator(plain, om).A);
  EXPECT_EQ(M.rows(), om.num_nodes());
  EXPECT_LT((M - dense(assemble_stiffness(h.fine, plain.cell_kappa, plain.edge_conductivity, om))).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(LocalOperator, ExtensionReproducesGlobalSolutionAroundAnEnclosedFracture) {
  // The fracture sits inside omega, so the local problem is the global one
  // restricted to omega.
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 5, 0);
  const auto sys = embedded_system(h, {{0.31, 0.33}, {0.62, 0.58}});
  const VectorX u = solve_fine(sys).u;
  const CellBox& om = h.neighborhoods[h.coarse_node(2, 2)];
  const auto bnodes = h.fine.box_boundary_nodes(om);
  MatrixX g(bnodes.size(), 1);
  for (std::size_t k = 0; k < bnodes.size(); ++k) g(k, 0) = u[bnodes[k]];
  const MatrixX ext = harmonic_extension(sys, om, g);
  const auto nodes = h.fine.box_nodes(om);
  double err = 0.0;
  for (std::size_t q = 0; q < nodes.size(); ++q) err = std::max(err, std::abs(ext(q, 0) - u[nodes[q]]));
  EXPECT_LT(err, 1e-10);
}

TEST(LocalOperator, EnergyEliminatesFractureUnknowns) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  const auto sys = embedded_system(h, {{0.15, 0.35}, {0.8, 0.55}});
  const VectorX u = solve_fine(sys).u;
  const CellBox all = h.fine.full_box();
  const MatrixX E = local_energy(sys, all, u.head(sys.num_matrix_dofs));
  EXPECT_NEAR(E(0, 0), energy_squared(sys, u), 1e-10 * energy_squared(sys, u));
  const MatrixX c = local_energy(sys, all, VectorX::Ones(sys.num_matrix_dofs));
  EXPECT_LT(std::abs(c(0, 0)), 1e-10);
}

TEST(Offline, AllSnapshotsRecoverEmbeddedFractureSolution) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  const auto sys = embedded_system(h, {{0.05, 0.2}, {0.9, 0.75}});
  const auto pou = compute_pou(h, sys);
  auto spaces = offline(h, sys, pou, 1);
  for (auto& s : spaces) s.m_off = static_cast<int>(s.num_snapshots());
  const auto sol = solve_coarse(build_space(h, pou, spaces, sys), sys);
  const VectorX u = solve_fine(sys).u;
  EXPECT_LT(compute_errors(sys, u, sol.u_fine).rel_energy_fine, 1e-9);
}
