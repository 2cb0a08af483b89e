#include "fracms/fracture.hpp"

#include <cmath>
#include <cstdlib>

namespace fracms {

std::string to_string(FractureModel m) { return m == FractureModel::Dfm ? "dfm" : "efm"; }

FractureModel parse_fracture_model(const std::string& s) {
  if (s == "dfm" || s == "DFM") return FractureModel::Dfm;
  if (s == "efm" || s == "EFM") return FractureModel::Efm;
  throw Error("unknown fracture model '" + s + "' (expected dfm or efm)");
}

double Fracture::length() const {
  double L = 0.0;
  for (std::size_t k = 1; k < polyline.size(); ++k) L += (polyline[k] - polyline[k - 1]).norm();
  return L;
}

void validate(const Fracture& f, const Rect& domain) {
  const std::string who = "fracture " + std::to_string(f.id) + ": ";
  const double tol = 1e-12 * domain.diameter();
  if (f.polyline.size() < 2) throw Error(who + "polyline needs at least 2 vertices");
  if (!(f.aperture > 0.0)) throw Error(who + "aperture must be positive");
  if (!(f.kappa_f > 0.0)) throw Error(who + "permeability must be positive");
  for (std::size_t k = 0; k < f.polyline.size(); ++k) {
    if (!domain.contains(f.polyline[k], tol)) throw Error(who + "vertex " + std::to_string(k) + " lies outside the domain");
    if (k > 0 && (f.polyline[k] - f.polyline[k - 1]).norm() <= tol)
      throw Error(who + "zero-length segment at vertex " + std::to_string(k));
  }
}

std::vector<bool> lattice_steps(int dx, int dy) {
  std::vector<bool> steps;
  steps.reserve(dx + dy);
  int sx = 0, sy = 0;
  while (sx < dx || sy < dy) {
    // Deviation from the straight line after each candidate step.
    const long ex = std::labs((sx + 1L) * dy - static_cast<long>(sy) * dx);
    const long ey = std::labs(static_cast<long>(sx) * dy - (sy + 1L) * dx);
    const bool take_x = sx < dx && (sy == dy || ex <= ey);
    steps.push_back(take_x);
    (take_x ? sx : sy)++;
  }
  return steps;
}

DfmTrace rasterize_dfm(const Fracture& f, const FineGrid& grid, SnapMode mode) {
  if (f.model != FractureModel::Dfm) throw Error("rasterize_dfm: fracture " + std::to_string(f.id) + " is not DFM");
  validate(f, grid.domain());
  const std::string who = "fracture " + std::to_string(f.id) + ": ";
  const double tol = grid.tolerance();
  const Rect& d = grid.domain();

  std::vector<std::array<int, 2>> snapped;
  for (const Vec2& p : f.polyline) {
    const int i = std::clamp(static_cast<int>(std::lround((p.x() - d.x0) / grid.hx())), 0, grid.nx());
    const int j = std::clamp(static_cast<int>(std::lround((p.y() - d.y0) / grid.hy())), 0, grid.ny());
    if (mode == SnapMode::Strict && (grid.node_position(i, j) - p).norm() > tol)
      throw Error(who + "vertex is not on a fine-grid node (strict mode)");
    snapped.push_back({i, j});
  }

  DfmTrace trace;
  trace.fracture_id = f.id;
  trace.effective_coeff = f.conductivity();
  trace.path_nodes.push_back(grid.node(snapped[0][0], snapped[0][1]));
  for (std::size_t k = 1; k < snapped.size(); ++k) {
    auto [i, j] = snapped[k - 1];
    const int di = snapped[k][0] - i, dj = snapped[k][1] - j;
    if (di == 0 && dj == 0) continue;
    if (mode == SnapMode::Strict && di != 0 && dj != 0)
      throw Error(who + "segment " + std::to_string(k) + " is not aligned with the fine grid (strict mode)");
    const int si = di > 0 ? 1 : -1, sj = dj > 0 ? 1 : -1;
    for (bool x_step : lattice_steps(std::abs(di), std::abs(dj))) {
      const int prev = grid.node(i, j);
      if (x_step) i += si;
      else j += sj;
      const int next = grid.node(i, j);
      trace.fine_edges.push_back(grid.edge_between(prev, next));
      trace.path_nodes.push_back(next);
    }
  }
  if (trace.fine_edges.empty()) throw Error(who + "degenerate trace (all vertices snap to one fine node)");
  return trace;
}

std::pair<int, std::array<double, 2>> EfmTrace::locate(double s) const {
  const auto it = std::upper_bound(node_arclength.begin(), node_arclength.end(), s);
  int e = static_cast<int>(it - node_arclength.begin()) - 1;
  e = std::clamp(e, 0, static_cast<int>(element_length.size()) - 1);
  const double t = std::clamp((s - node_arclength[e]) / element_length[e], 0.0, 1.0);
  return {e, {1.0 - t, t}};
}

EfmTrace intersect_efm(const Fracture& f, const FineGrid& grid, double seg_len) {
  if (f.model != FractureModel::Efm) throw Error("intersect_efm: fracture " + std::to_string(f.id) + " is not EFM");
  if (!(seg_len > 0.0)) throw Error("intersect_efm: segment length must be positive");
  validate(f, grid.domain());
  const double tol = grid.tolerance();
  const Rect& d = grid.domain();

  EfmTrace tr;
  tr.fracture_id = f.id;
  tr.conductivity = f.conductivity();
  tr.total_length = f.length();
  if (tr.total_length <= tol) throw Error("fracture " + std::to_string(f.id) + ": degenerate (zero length)");

  double s0 = 0.0;
  tr.nodes.push_back(f.polyline.front());
  tr.node_arclength.push_back(0.0);
  for (std::size_t k = 1; k < f.polyline.size(); ++k) {
    const Vec2 P = f.polyline[k - 1], Q = f.polyline[k];
    const double L = (Q - P).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(L / seg_len - 1e-9)));
    for (int m = 1; m <= n; ++m) {
      const double t = static_cast<double>(m) / n;
      tr.nodes.push_back(P + t * (Q - P));
      tr.node_arclength.push_back(s0 + t * L);
      tr.element_length.push_back(L / n);
    }

    // Parameters where the segment crosses fine grid lines.
    std::vector<double> cuts{0.0, 1.0};
    const Vec2 D = Q - P;
    if (std::abs(D.x()) > tol) {
      const double a = (std::min(P.x(), Q.x()) - d.x0) / grid.hx(), b = (std::max(P.x(), Q.x()) - d.x0) / grid.hx();
      for (int i = static_cast<int>(std::ceil(a)); i <= static_cast<int>(std::floor(b)); ++i)
        cuts.push_back((d.x0 + i * grid.hx() - P.x()) / D.x());
    }
    if (std::abs(D.y()) > tol) {
      const double a = (std::min(P.y(), Q.y()) - d.y0) / grid.hy(), b = (std::max(P.y(), Q.y()) - d.y0) / grid.hy();
      for (int j = static_cast<int>(std::ceil(a)); j <= static_cast<int>(std::floor(b)); ++j)
        cuts.push_back((d.y0 + j * grid.hy() - P.y()) / D.y());
    }
    for (double& c : cuts) c = std::clamp(c, 0.0, 1.0);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 1; c < cuts.size(); ++c) {
      const double piece = (cuts[c] - cuts[c - 1]) * L;
      if (piece <= tol) continue;
      const double tm = 0.5 * (cuts[c] + cuts[c - 1]);
      const Vec2 mid = P + tm * D;
      const auto [ci, cj] = grid.locate(mid);
      tr.cell_overlaps.push_back({grid.cell(ci, cj), piece, mid, s0 + tm * L});
    }
    s0 += L;
  }
  return tr;
}

VectorX edge_conductivity(const FineGrid& grid, const std::vector<DfmTrace>& traces) {
  VectorX c = VectorX::Zero(grid.num_edges());
  for (const auto& tr : traces)
    for (int e : tr.fine_edges) {
      if (e < 0 || e >= grid.num_edges())
        throw Error("fracture " + std::to_string(tr.fracture_id) + ": trace references an edge outside the grid");
      c[e] += tr.effective_coeff;
    }
  return c;
}

}  // namespace fracms
