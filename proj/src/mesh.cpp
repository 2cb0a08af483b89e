#include "fracms/mesh.hpp"

#include <cmath>

namespace fracms {

double Rect::diameter() const { return std::hypot(width(), height()); }

bool Rect::contains(const Vec2& p, double tol) const {
  return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
}

bool CellBox::contains(const CellBox& o) const {
  return o.i0 >= i0 && o.i1 <= i1 && o.j0 >= j0 && o.j1 <= j1;
}

bool CellBox::on_boundary(int i, int j) const {
  return contains_node(i, j) && (i == i0 || i == i1 || j == j0 || j == j1);
}

FineGrid::FineGrid(const Rect& domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
  if (nx <= 0 || ny <= 0) throw Error("FineGrid: cell counts must be positive");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) throw Error("FineGrid: degenerate domain");
  hx_ = domain.width() / nx;
  hy_ = domain.height() / ny;
}

Vec2 FineGrid::node_position(int i, int j) const {
  return {domain_.x0 + i * hx_, domain_.y0 + j * hy_};
}

Vec2 FineGrid::node_position(int n) const {
  const auto [i, j] = node_ij(n);
  return node_position(i, j);
}

std::array<int, 4> FineGrid::cell_nodes(int c) const {
  const auto [i, j] = cell_ij(c);
  return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

Vec2 FineGrid::cell_origin(int c) const {
  const auto [i, j] = cell_ij(c);
  return node_position(i, j);
}

std::array<int, 2> FineGrid::locate(const Vec2& p) const {
  const double tol = tolerance();
  int i = static_cast<int>(std::floor((p.x() - domain_.x0 + tol) / hx_));
  int j = static_cast<int>(std::floor((p.y() - domain_.y0 + tol) / hy_));
  i = std::clamp(i, 0, nx_ - 1);
  j = std::clamp(j, 0, ny_ - 1);
  return {i, j};
}

std::array<int, 2> FineGrid::edge_nodes(int e) const {
  if (e < num_h_edges()) {
    const int i = e % nx_, j = e / nx_;
    return {node(i, j), node(i + 1, j)};
  }
  const int k = e - num_h_edges();
  const int i = k % (nx_ + 1), j = k / (nx_ + 1);
  return {node(i, j), node(i, j + 1)};
}

int FineGrid::edge_between(int a, int b) const {
  if (a > b) std::swap(a, b);
  const auto [ia, ja] = node_ij(a);
  const auto [ib, jb] = node_ij(b);
  if (ja == jb && ib == ia + 1) return h_edge(ia, ja);
  if (ia == ib && jb == ja + 1) return v_edge(ia, ja);
  return -1;
}

bool FineGrid::is_boundary_node(int n) const {
  const auto [i, j] = node_ij(n);
  return i == 0 || j == 0 || i == nx_ || j == ny_;
}

std::vector<int> FineGrid::boundary_nodes() const { return box_boundary_nodes(full_box()); }

std::vector<int> FineGrid::box_nodes(const CellBox& box) const {
  std::vector<int> out;
  out.reserve(box.num_nodes());
  for (int j = box.j0; j <= box.j1; ++j)
    for (int i = box.i0; i <= box.i1; ++i) out.push_back(node(i, j));
  return out;
}

std::vector<int> FineGrid::box_boundary_nodes(const CellBox& box) const {
  std::vector<int> out;
  for (int j = box.j0; j <= box.j1; ++j)
    for (int i = box.i0; i <= box.i1; ++i)
      if (box.on_boundary(i, j)) out.push_back(node(i, j));
  return out;
}

std::vector<int> FineGrid::box_interior_nodes(const CellBox& box) const {
  std::vector<int> out;
  for (int j = box.j0 + 1; j < box.j1; ++j)
    for (int i = box.i0 + 1; i < box.i1; ++i) out.push_back(node(i, j));
  return out;
}

std::array<double, 4> FineGrid::shape_values(int c, const Vec2& p) const {
  const Vec2 o = cell_origin(c);
  const double s = std::clamp((p.x() - o.x()) / hx_, 0.0, 1.0);
  const double t = std::clamp((p.y() - o.y()) / hy_, 0.0, 1.0);
  return {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t};
}

int GridHierarchy::coarse_node_fine(int id) const {
  const auto [I, J] = coarse_node_ij(id);
  return fine.node(I * refine, J * refine);
}

bool GridHierarchy::is_boundary_coarse_node(int id) const {
  const auto [I, J] = coarse_node_ij(id);
  return I == 0 || J == 0 || I == coarse_nx || J == coarse_ny;
}

CellBox GridHierarchy::coarse_element_box(int K) const {
  const int I = K % coarse_nx, J = K / coarse_nx;
  return {I * refine, (I + 1) * refine, J * refine, (J + 1) * refine};
}

std::vector<int> GridHierarchy::elements_of_node(int id) const {
  const auto [I, J] = coarse_node_ij(id);
  std::vector<int> out;
  for (int b = J - 1; b <= J; ++b)
    for (int a = I - 1; a <= I; ++a)
      if (a >= 0 && a < coarse_nx && b >= 0 && b < coarse_ny) out.push_back(b * coarse_nx + a);
  return out;
}

std::array<int, 4> GridHierarchy::element_corners(int K) const {
  const int I = K % coarse_nx, J = K / coarse_nx;
  return {coarse_node(I, J), coarse_node(I + 1, J), coarse_node(I + 1, J + 1), coarse_node(I, J + 1)};
}

int GridHierarchy::coarse_element_of_cell(int c) const {
  const auto [i, j] = fine.cell_ij(c);
  return (j / refine) * coarse_nx + (i / refine);
}

CellBox dilate(const CellBox& box, int t, const FineGrid& grid) {
  return {std::max(box.i0 - t, 0), std::min(box.i1 + t, grid.nx()), std::max(box.j0 - t, 0),
          std::min(box.j1 + t, grid.ny())};
}

GridHierarchy build_hierarchy(const Rect& domain, int coarse_nx, int coarse_ny, int refine, int oversampling) {
  if (coarse_nx < 2 || coarse_ny < 2) throw Error("build_hierarchy: coarse grid needs at least 2x2 elements");
  if (refine < 2) throw Error("build_hierarchy: refinement factor must be at least 2");
  if (oversampling < 0) throw Error("build_hierarchy: oversampling must be non-negative");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) throw Error("build_hierarchy: degenerate domain");

  GridHierarchy g;
  g.fine = FineGrid(domain, coarse_nx * refine, coarse_ny * refine);
  g.coarse_nx = coarse_nx;
  g.coarse_ny = coarse_ny;
  g.refine = refine;
  g.oversampling = oversampling;
  g.Hx = domain.width() / coarse_nx;
  g.Hy = domain.height() / coarse_ny;

  const int n = g.num_coarse_nodes();
  g.neighborhoods.reserve(n);
  g.oversampled.reserve(n);
  g.neighborhood_nodes.reserve(n);
  for (int id = 0; id < n; ++id) {
    const auto [I, J] = g.coarse_node_ij(id);
    CellBox box{std::max(I - 1, 0) * refine, std::min(I + 1, coarse_nx) * refine, std::max(J - 1, 0) * refine,
                std::min(J + 1, coarse_ny) * refine};
    g.neighborhoods.push_back(box);
    g.oversampled.push_back(dilate(box, oversampling, g.fine));
    auto nodes = g.fine.box_nodes(box);
    std::sort(nodes.begin(), nodes.end());
    g.neighborhood_nodes.push_back(std::move(nodes));
  }
  return g;
}

}  // namespace fracms
