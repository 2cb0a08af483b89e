/**
 * @file fracture.hpp
 * @brief Polyline fractures and their mapping onto the fine grid.
 *
 * Discrete fractures (DFM) are snapped onto fine-grid edges. Embedded
 * fractures (EFM) keep their own 1D mesh and record how they cut the fine
 * cells.
 */
#pragma once

#include "fracms/mesh.hpp"

#include <string>
#include <vector>

namespace fracms {

enum class FractureModel { Dfm, Efm };

std::string to_string(FractureModel m);
FractureModel parse_fracture_model(const std::string& s);

struct Fracture {
  int id = 0;
  std::vector<Vec2> polyline;
  double aperture = 1e-3;
  double kappa_f = 1e4;
  FractureModel model = FractureModel::Dfm;

  /// Lower-dimensional conductivity kappa_f * aperture.
  double conductivity() const { return kappa_f * aperture; }
  double length() const;
};

/// Throws Error naming the fracture id if the fracture is malformed or leaves
/// the domain.
void validate(const Fracture& f, const Rect& domain);

struct DfmTrace {
  int fracture_id = 0;
  std::vector<int> fine_edges;
  /// Lattice nodes visited by the trace; path_nodes.size() == fine_edges.size() + 1.
  std::vector<int> path_nodes;
  double effective_coeff = 0.0;
};

enum class SnapMode {
  Snap,    ///< vertices go to the nearest fine node, then a lattice path joins them
  Strict,  ///< input must already lie on fine-grid edges
};

DfmTrace rasterize_dfm(const Fracture& f, const FineGrid& grid, SnapMode mode = SnapMode::Snap);

/// Monotone lattice steps from (0,0) to (dx,dy). Each step keeps the path
/// closest to the straight line; ties go to x. true = x-step.
std::vector<bool> lattice_steps(int dx, int dy);

struct CellOverlap {
  int cell = 0;
  double length = 0.0;
  Vec2 midpoint;
  /// Arclength of the midpoint along the fracture.
  double arclength = 0.0;
};

struct EfmTrace {
  int fracture_id = 0;
  std::vector<Vec2> nodes;
  std::vector<double> node_arclength;
  std::vector<double> element_length;
  std::vector<CellOverlap> cell_overlaps;
  double conductivity = 0.0;
  double total_length = 0.0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  /// 1D element containing arclength s and the two linear shape values there.
  std::pair<int, std::array<double, 2>> locate(double s) const;
};

EfmTrace intersect_efm(const Fracture& f, const FineGrid& grid, double seg_len);

/// Per-edge DFM conductivity; fractures sharing an edge add up.
VectorX edge_conductivity(const FineGrid& grid, const std::vector<DfmTrace>& traces);

}  // namespace fracms
