#include "fracms/assembly.hpp"

#include "fracms/linalg.hpp"

#include <cmath>

namespace fracms {

namespace {

constexpr double kGauss = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2 on [0, 1]
constexpr std::array<double, 2> kGaussPts{kGauss, 1.0 - kGauss};

std::array<double, 4> shape(double s, double t) {
  return {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t};
}

std::array<Vec2, 4> shape_grad(double s, double t, double hx, double hy) {
  return {Vec2(-(1 - t) / hx, -(1 - s) / hy), Vec2((1 - t) / hx, -s / hy), Vec2(t / hx, s / hy),
          Vec2(-t / hx, (1 - s) / hy)};
}

template <typename EdgeFn>
void for_each_edge_in_box(const FineGrid& grid, const CellBox& box, EdgeFn&& fn) {
  for (int j = box.j0; j <= box.j1; ++j)
    for (int i = box.i0; i < box.i1; ++i) fn(grid.h_edge(i, j), box.local_node(i, j), box.local_node(i + 1, j));
  for (int j = box.j0; j < box.j1; ++j)
    for (int i = box.i0; i <= box.i1; ++i) fn(grid.v_edge(i, j), box.local_node(i, j), box.local_node(i, j + 1));
}

void add_block(std::vector<Triplet>& trip, const std::array<int, 4>& dofs, const Eigen::Matrix4d& K, double w) {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) trip.emplace_back(dofs[a], dofs[b], w * K(a, b));
}

void add_line(std::vector<Triplet>& trip, Index a, Index b, double k_aa, double k_ab) {
  trip.emplace_back(a, a, k_aa);
  trip.emplace_back(b, b, k_aa);
  trip.emplace_back(a, b, k_ab);
  trip.emplace_back(b, a, k_ab);
}

std::array<int, 4> local_cell_nodes(const CellBox& box, int i, int j) {
  return {box.local_node(i, j), box.local_node(i + 1, j), box.local_node(i + 1, j + 1), box.local_node(i, j + 1)};
}

void matrix_triplets(const FineGrid& grid, const VectorX& cell_w, const VectorX& edge_w, const CellBox& box,
                     const Eigen::Matrix4d& Ke, bool stiffness, std::vector<Triplet>& trip) {
  for (int j = box.j0; j < box.j1; ++j)
    for (int i = box.i0; i < box.i1; ++i) {
      const double w = cell_w[grid.cell(i, j)];
      if (w != 0.0) add_block(trip, local_cell_nodes(box, i, j), Ke, w);
    }
  if (edge_w.size() == 0) return;
  for_each_edge_in_box(grid, box, [&](int e, int a, int b) {
    const double c = edge_w[e];
    if (c == 0.0) return;
    const double len = grid.edge_length(e);
    if (stiffness) add_line(trip, a, b, c / len, -c / len);
    else add_line(trip, a, b, c * len / 3.0, c * len / 6.0);
  });
}

void check_kappa(const FineGrid& grid, const PermeabilityField& perm) {
  if (perm.kappa_cells.size() != grid.num_cells()) throw Error("permeability field size does not match the fine grid");
  if (perm.kappa_cells.minCoeff() <= 0.0) throw Error("permeability must be positive on every cell");
}

}  // namespace

PermeabilityField PermeabilityField::constant(const FineGrid& grid, double kappa) {
  return {VectorX::Constant(grid.num_cells(), kappa)};
}

PermeabilityField PermeabilityField::from_function(const FineGrid& grid, const ScalarField& kappa) {
  PermeabilityField p{VectorX(grid.num_cells())};
  for (int c = 0; c < grid.num_cells(); ++c)
    p.kappa_cells[c] = kappa(grid.cell_origin(c) + Vec2(0.5 * grid.hx(), 0.5 * grid.hy()));
  return p;
}

BoundaryData BoundaryData::bilinear(double a, double b, double c, double d) {
  return {[=](const Vec2& p) { return a + b * p.x() + c * p.y() + d * p.x() * p.y(); }};
}

Eigen::Matrix4d element_stiffness(double hx, double hy) {
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  for (double s : kGaussPts)
    for (double t : kGaussPts) {
      const auto g = shape_grad(s, t, hx, hy);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) K(a, b) += 0.25 * hx * hy * g[a].dot(g[b]);
    }
  return K;
}

Eigen::Matrix4d element_mass(double hx, double hy) {
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  for (double s : kGaussPts)
    for (double t : kGaussPts) {
      const auto N = shape(s, t);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) K(a, b) += 0.25 * hx * hy * N[a] * N[b];
    }
  return K;
}

SparseMatrix assemble_stiffness(const FineGrid& grid, const VectorX& cell_kappa, const VectorX& edge_cond,
                                const CellBox& box) {
  std::vector<Triplet> trip;
  matrix_triplets(grid, cell_kappa, edge_cond, box, element_stiffness(grid.hx(), grid.hy()), true, trip);
  SparseMatrix A(box.num_nodes(), box.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SparseMatrix assemble_mass(const FineGrid& grid, const VectorX& cell_weight, const VectorX& edge_weight,
                           const CellBox& box) {
  std::vector<Triplet> trip;
  matrix_triplets(grid, cell_weight, edge_weight, box, element_mass(grid.hx(), grid.hy()), false, trip);
  SparseMatrix M(box.num_nodes(), box.num_nodes());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

VectorX assemble_load(const FineGrid& grid, const ScalarField& f, const CellBox& box) {
  VectorX F = VectorX::Zero(box.num_nodes());
  if (!f) return F;
  const double w = 0.25 * grid.cell_area();
  for (int j = box.j0; j < box.j1; ++j)
    for (int i = box.i0; i < box.i1; ++i) {
      const Vec2 o = grid.node_position(i, j);
      const auto nodes = local_cell_nodes(box, i, j);
      for (double s : kGaussPts)
        for (double t : kGaussPts) {
          const double fv = f(o + Vec2(s * grid.hx(), t * grid.hy()));
          const auto N = shape(s, t);
          for (int a = 0; a < 4; ++a) F[nodes[a]] += w * fv * N[a];
        }
    }
  return F;
}

SparseMatrix FineSystem::matrix_block() const {
  return A.topLeftCorner(num_matrix_dofs, num_matrix_dofs);
}

SparseMatrix FineSystem::fracture_block(int i) const {
  return A.block(efm[i].offset, efm[i].offset, efm[i].size, efm[i].size);
}

SparseMatrix FineSystem::coupling_block(int i) const {
  return A.block(0, efm[i].offset, num_matrix_dofs, efm[i].size);
}

FineSystem assemble_dfm(const FineGrid& grid, const PermeabilityField& perm, const std::vector<DfmTrace>& traces,
                        const ScalarField& f, const BoundaryData& bc) {
  return assemble_efm(grid, perm, traces, {}, f, bc, {});
}

FineSystem assemble_efm(const FineGrid& grid, const PermeabilityField& perm, const std::vector<DfmTrace>& dfm_traces,
                        const std::vector<EfmTrace>& efm_traces, const ScalarField& f, const BoundaryData& bc,
                        const EfmOptions& opts) {
  check_kappa(grid, perm);
  if (!bc.g) throw Error("boundary data missing");

  FineSystem sys;
  sys.mode = efm_traces.empty() ? SystemMode::DfmMonolithic : SystemMode::EfmBlock;
  sys.grid = grid;
  sys.cell_kappa = perm.kappa_cells;
  sys.edge_conductivity = edge_conductivity(grid, dfm_traces);
  sys.num_matrix_dofs = grid.num_nodes();
  sys.coupling_scale = opts.coupling_scale;

  Index n = sys.num_matrix_dofs;
  for (const auto& tr : efm_traces) {
    if (tr.cell_overlaps.empty())
      throw Error("fracture " + std::to_string(tr.fracture_id) + ": embedded trace has no cell overlaps");
    sys.efm.push_back({tr.fracture_id, n, tr.num_nodes(), tr});
    n += tr.num_nodes();
  }

  const CellBox all = grid.full_box();
  std::vector<Triplet> a_trip, m_trip;
  matrix_triplets(grid, sys.cell_kappa, sys.edge_conductivity, all, element_stiffness(grid.hx(), grid.hy()), true,
                  a_trip);
  matrix_triplets(grid, sys.cell_kappa, sys.edge_conductivity, all, element_mass(grid.hx(), grid.hy()), false,
                  m_trip);

  for (const auto& blk : sys.efm) {
    const EfmTrace& tr = blk.trace;
    const double c = tr.conductivity;
    for (int e = 0; e + 1 < tr.num_nodes(); ++e) {
      const double len = tr.element_length[e];
      add_line(a_trip, blk.offset + e, blk.offset + e + 1, c / len, -c / len);
      add_line(m_trip, blk.offset + e, blk.offset + e + 1, c * len / 3.0, c * len / 6.0);
    }
    for (const auto& cp : efm_couplings(sys, blk))
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          if (cp.coef[a] != 0.0 && cp.coef[b] != 0.0) a_trip.emplace_back(cp.dofs[a], cp.dofs[b], cp.ci * cp.coef[a] * cp.coef[b]);
  }

  sys.A.resize(n, n);
  sys.A.setFromTriplets(a_trip.begin(), a_trip.end());
  sys.M.resize(n, n);
  sys.M.setFromTriplets(m_trip.begin(), m_trip.end());
  sys.F = VectorX::Zero(n);
  sys.F.head(sys.num_matrix_dofs) = assemble_load(grid, f, all);

  sys.dirichlet_mask.assign(n, 0);
  sys.dirichlet_values = VectorX::Zero(n);
  for (int node : grid.boundary_nodes()) {
    sys.dirichlet_mask[node] = 1;
    sys.dirichlet_values[node] = bc.g(grid.node_position(node));
  }
  const double tol = grid.tolerance();
  const Rect& d = grid.domain();
  for (const auto& blk : sys.efm)
    for (int k = 0; k < blk.size; ++k) {
      const Vec2& p = blk.trace.nodes[k];
      const bool on_boundary = std::abs(p.x() - d.x0) <= tol || std::abs(p.x() - d.x1) <= tol ||
                               std::abs(p.y() - d.y0) <= tol || std::abs(p.y() - d.y1) <= tol;
      if (on_boundary) {
        sys.dirichlet_mask[blk.offset + k] = 1;
        sys.dirichlet_values[blk.offset + k] = bc.g(p);
      }
    }
  return sys;
}

std::vector<EfmCoupling> efm_couplings(const FineSystem& sys, const EfmBlock& blk) {
  const FineGrid& grid = sys.grid;
  const EfmTrace& tr = blk.trace;
  std::vector<EfmCoupling> out;
  out.reserve(tr.cell_overlaps.size());
  for (const auto& ov : tr.cell_overlaps) {
    const double ci = sys.coupling_scale * 2.0 * sys.cell_kappa[ov.cell] * ov.length * ov.length / grid.cell_area();
    if (ci == 0.0) continue;
    const auto w = grid.shape_values(ov.cell, ov.midpoint);
    const auto nodes = grid.cell_nodes(ov.cell);
    const auto [e, v] = tr.locate(ov.arclength);
    EfmCoupling cp;
    cp.cell = ov.cell;
    cp.ci = ci;
    cp.dofs = {nodes[0], nodes[1], nodes[2], nodes[3], blk.offset + e, blk.offset + e + 1};
    cp.coef = {w[0], w[1], w[2], w[3], -v[0], -v[1]};
    out.push_back(cp);
  }
  return out;
}

FineSolution solve_fine(const FineSystem& sys) {
  FineSolution sol;
  sol.u = solve_with_constraints(sys.A, sys.F, sys.dirichlet_mask, sys.dirichlet_values, &sol.relative_residual);
  return sol;
}

}  // namespace fracms
