/**
 * @file mesh.hpp
 * @brief Structured fine/coarse quadrilateral grids, coarse neighborhoods and
 * their oversampled extensions.
 *
 * Numbering is lexicographic with x running fastest for nodes, cells and
 * edges. Horizontal edges are numbered first, then vertical edges.
 */
#pragma once

#include "fracms/types.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace fracms {

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double diameter() const;
  bool contains(const Vec2& p, double tol) const;
};

/// Half-open range of fine cells [i0, i1) x [j0, j1).
struct CellBox {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

  int nx() const { return i1 - i0; }
  int ny() const { return j1 - j0; }
  int num_nodes() const { return (nx() + 1) * (ny() + 1); }
  int num_cells() const { return nx() * ny(); }
  bool contains(const CellBox& other) const;
  bool contains_cell(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
  bool contains_node(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  bool on_boundary(int i, int j) const;
  /// Box-local lexicographic index of the fine node (i, j).
  int local_node(int i, int j) const { return (j - j0) * (nx() + 1) + (i - i0); }
  bool operator==(const CellBox&) const = default;
};

class FineGrid {
 public:
  FineGrid() = default;
  FineGrid(const Rect& domain, int nx, int ny);

  const Rect& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double cell_area() const { return hx_ * hy_; }
  double tolerance() const { return 1e-12 * domain_.diameter(); }

  int num_nodes() const { return (nx_ + 1) * (ny_ + 1); }
  int num_cells() const { return nx_ * ny_; }
  int num_h_edges() const { return nx_ * (ny_ + 1); }
  int num_edges() const { return num_h_edges() + (nx_ + 1) * ny_; }

  int node(int i, int j) const { return j * (nx_ + 1) + i; }
  std::array<int, 2> node_ij(int n) const { return {n % (nx_ + 1), n / (nx_ + 1)}; }
  Vec2 node_position(int n) const;
  Vec2 node_position(int i, int j) const;

  int cell(int i, int j) const { return j * nx_ + i; }
  std::array<int, 2> cell_ij(int c) const { return {c % nx_, c / nx_}; }
  /// Counter-clockwise corners starting at the lower-left node.
  std::array<int, 4> cell_nodes(int c) const;
  Vec2 cell_origin(int c) const;
  /// Cell containing p; points on shared faces go to the upper/right cell,
  /// clamped to the grid.
  std::array<int, 2> locate(const Vec2& p) const;

  int h_edge(int i, int j) const { return j * nx_ + i; }
  int v_edge(int i, int j) const { return num_h_edges() + j * (nx_ + 1) + i; }
  std::array<int, 2> edge_nodes(int e) const;
  double edge_length(int e) const { return e < num_h_edges() ? hx_ : hy_; }
  /// Edge joining two lattice-adjacent nodes, or -1.
  int edge_between(int a, int b) const;

  bool is_boundary_node(int n) const;
  std::vector<int> boundary_nodes() const;

  CellBox full_box() const { return {0, nx_, 0, ny_}; }
  /// Global node indices of a box, in box-local lexicographic order.
  std::vector<int> box_nodes(const CellBox& box) const;
  std::vector<int> box_boundary_nodes(const CellBox& box) const;
  std::vector<int> box_interior_nodes(const CellBox& box) const;
  /// Bilinear shape values of the four cell corners at p (p inside cell c).
  std::array<double, 4> shape_values(int c, const Vec2& p) const;

 private:
  Rect domain_;
  int nx_ = 0, ny_ = 0;
  double hx_ = 0.0, hy_ = 0.0;
};

/// Fine grid plus the coarse grid it refines, the coarse neighborhoods
/// omega_i and their oversampled regions omega_i^+.
struct GridHierarchy {
  FineGrid fine;
  int coarse_nx = 0, coarse_ny = 0;
  int refine = 0;
  int oversampling = 0;
  double Hx = 0.0, Hy = 0.0;
  std::vector<CellBox> neighborhoods;
  std::vector<CellBox> oversampled;
  std::vector<std::vector<int>> neighborhood_nodes;

  double H() const { return std::max(Hx, Hy); }
  int num_coarse_nodes() const { return (coarse_nx + 1) * (coarse_ny + 1); }
  int num_coarse_elements() const { return coarse_nx * coarse_ny; }
  int coarse_node(int I, int J) const { return J * (coarse_nx + 1) + I; }
  std::array<int, 2> coarse_node_ij(int id) const { return {id % (coarse_nx + 1), id / (coarse_nx + 1)}; }
  /// Fine node sitting on coarse vertex x_i.
  int coarse_node_fine(int id) const;
  bool is_boundary_coarse_node(int id) const;
  CellBox coarse_element_box(int K) const;
  /// Coarse elements whose closure contains x_i.
  std::vector<int> elements_of_node(int id) const;
  /// Coarse vertices of element K, counter-clockwise from lower-left.
  std::array<int, 4> element_corners(int K) const;
  int coarse_element_of_cell(int c) const;
};

GridHierarchy build_hierarchy(const Rect& domain, int coarse_nx, int coarse_ny, int refine, int oversampling);

/// Box grown by t cell layers on every side and clipped to the grid.
CellBox dilate(const CellBox& box, int t, const FineGrid& grid);

}  // namespace fracms
