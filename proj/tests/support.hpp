// Shared fixtures for the unit tests.
#pragma once

#include "fracms/adapt.hpp"
#include "fracms/coarse.hpp"
#include "fracms/msgen.hpp"

#include <vector>

namespace fracms::test {

inline Fracture dfm(int id, std::vector<Vec2> pts, double aperture = 1e-3, double kappa_f = 1e4) {
  Fracture f;
  f.id = id;
  f.polyline = std::move(pts);
  f.aperture = aperture;
  f.kappa_f = kappa_f;
  f.model = FractureModel::Dfm;
  return f;
}

inline Fracture efm(int id, std::vector<Vec2> pts, double aperture = 1e-3, double kappa_f = 1e4) {
  Fracture f = dfm(id, std::move(pts), aperture, kappa_f);
  f.model = FractureModel::Efm;
  return f;
}

inline ScalarField constant_field(double v) {
  return [v](const Vec2&) { return v; };
}

inline std::vector<DfmTrace> rasterize_all(const std::vector<Fracture>& fr, const FineGrid& g) {
  std::vector<DfmTrace> out;
  for (const auto& f : fr) out.push_back(rasterize_dfm(f, g));
  return out;
}

/// DFM system with kappa = 1, f = 0 and g = x + 2y unless stated otherwise.
inline FineSystem dfm_system(const GridHierarchy& h, const std::vector<Fracture>& fr, double source = 0.0,
                             BoundaryData bc = BoundaryData::bilinear(0.0, 1.0, 2.0, 0.0)) {
  return assemble_dfm(h.fine, PermeabilityField::constant(h.fine, 1.0), rasterize_all(fr, h.fine),
                      constant_field(source), bc);
}

/// Three fractures on a 4x4 coarse / 16x16 fine unit square.
inline std::vector<Fracture> three_fractures() {
  return {dfm(0, {{0.125, 0.375}, {0.875, 0.375}}), dfm(1, {{0.5625, 0.0625}, {0.5625, 0.9375}}),
          dfm(2, {{0.125, 0.6875}, {0.375, 0.9375}})};
}

inline std::vector<NeighborhoodSpace> offline(const GridHierarchy& h, const FineSystem& sys,
                                              const PartitionOfUnity& pou, int m, bool oversampled = false) {
  const auto snaps = build_snapshots(h, sys, SnapshotOptions{SnapshotKind::Full, oversampled, 4, 0});
  return build_offline_spaces(h, sys, pou, snaps, std::vector<int>(h.num_coarse_nodes(), m));
}

inline MatrixX dense(const SparseMatrix& A) { return MatrixX(A); }

}  // namespace fracms::test
