#include "fracms/analysis.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace fracms;
using namespace fracms::test;

namespace {

VectorX interpolate(const FineGrid& g, const ScalarField& f, Index size) {
  VectorX v = VectorX::Zero(size);
  for (int n = 0; n < g.num_nodes(); ++n) v[n] = f(g.node_position(n));
  return v;
}

}  // namespace

TEST(Errors, IdenticalFieldsGiveZero) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  const auto sys = dfm_system(h, three_fractures(), 1.0);
  const VectorX u = solve_fine(sys).u;
  const auto r = compute_errors(sys, u, u, &u);
  EXPECT_EQ(r.rel_l2_fine, 0.0);
  EXPECT_EQ(r.rel_energy_fine, 0.0);
  EXPECT_EQ(*r.rel_l2_snap, 0.0);
  EXPECT_EQ(*r.rel_energy_snap, 0.0);
  EXPECT_EQ(r.mode, "dfm");
}

TEST(Errors, ZeroApproximationGivesOne) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  const auto sys = dfm_system(h, three_fractures(), 1.0, BoundaryData::bilinear(0, 0, 0, 0));
  const VectorX u = solve_fine(sys).u;
  const auto r = compute_errors(sys, u, VectorX::Zero(u.size()));
  EXPECT_NEAR(r.rel_l2_fine, 1.0, 1e-14);
  EXPECT_NEAR(r.rel_energy_fine, 1.0, 1e-14);
  EXPECT_FALSE(r.rel_l2_snap.has_value());
}

TEST(Errors, WeightedL2MatchesQuadrature) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 2, 2, 4, 0);
  const FineGrid& g = h.fine;
  const auto perm = PermeabilityField::from_function(g, [](const Vec2& p) { return p.x() < 0.5 ? 1.0 : 5.0; });
  const auto fr = dfm(0, {{0.0, 0.5}, {1.0, 0.5}}, 1e-2, 1e3);
  const auto sys = assemble_dfm(g, perm, rasterize_all({fr}, g), constant_field(0), BoundaryData::bilinear(0, 0, 0, 0));
  const VectorX v = interpolate(g, [](const Vec2& p) { return p.x() * p.y(); }, sys.size());
  // int kappa x^2 y^2 = (1/24 + 5 * 7/24) / 3, plus c int_0^1 (x/2)^2 dx.
  const double c = 1e-2 * 1e3;
  const double oracle = (1.0 / 24 + 5.0 * 7.0 / 24) / 3.0 + c / 12.0;
  EXPECT_NEAR(weighted_l2_squared(sys, v), oracle, 1e-13);
}

TEST(Errors, EnergyFromElementsAndFractures) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 2, 2, 4, 0);
  const FineGrid& g = h.fine;
  const auto fr = dfm(0, {{0.0, 0.5}, {1.0, 0.5}}, 1e-2, 1e3);
  const auto sys = assemble_dfm(g, PermeabilityField::constant(g, 2.0), rasterize_all({fr}, g), constant_field(0),
                                BoundaryData::bilinear(0, 0, 0, 0));
  const VectorX v = interpolate(g, [](const Vec2& p) { return p.x() * p.y(); }, sys.size());
  // 2 int (y^2 + x^2) = 4/3, plus c int (d/dx (x/2))^2 = c/4.
  EXPECT_NEAR(energy_squared(sys, v), 4.0 / 3.0 + 10.0 / 4.0, 1e-12);
}

TEST(Errors, ScaleInvariant) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 4, 4, 4, 0);
  const auto sys = dfm_system(h, three_fractures(), 1.0);
  const VectorX u = solve_fine(sys).u;
  VectorX w = u;
  for (Index k = 0; k < w.size(); ++k) w[k] += 0.01 * std::sin(3.0 * k);
  const auto a = compute_errors(sys, u, w);
  const auto b = compute_errors(sys, 7.5 * u, 7.5 * w);
  EXPECT_NEAR(a.rel_l2_fine, b.rel_l2_fine, 1e-13);
  EXPECT_NEAR(a.rel_energy_fine, b.rel_energy_fine, 1e-13);
  EXPECT_GT(a.rel_energy_fine, 0.0);
}

TEST(Errors, RejectsBadInput) {
  const auto h = build_hierarchy({0, 1, 0, 1}, 2, 2, 2, 0);
  const auto sys = dfm_system(h, {});
  const VectorX z = VectorX::Zero(sys.size());
  EXPECT_THROW(compute_errors(sys, z, z), Error);
  EXPECT_THROW(compute_errors(sys, VectorX::Ones(3), z), Error);
}

TEST(Errors, CsvRow) {
  ErrorReport r;
  r.dim = 121;
  r.rel_l2_fine = 0.0123;
  r.rel_energy_fine = 0.25;
  EXPECT_EQ(csv_header(), "dim,l2_fine_pct,h1_fine_pct,l2_snap_pct,h1_snap_pct");
  EXPECT_EQ(csv_row(r), "121,1.230000,25.000000,,");
  r.rel_l2_snap = 0.001;
  r.rel_energy_snap = 0.5;
  EXPECT_EQ(csv_row(r), "121,1.230000,25.000000,0.100000,50.000000");
  EXPECT_TRUE(std::regex_match(csv_row(r), std::regex(R"(\d+(,\d+\.\d{6}){4})")));
}
