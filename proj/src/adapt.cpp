#include "fracms/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fracms {

void AdaptConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("adapt: theta must lie in (0, 1]");
  if (max_iters < 0) throw Error("adapt: max_iters must be non-negative");
  if (basis_increment < 0) throw Error("adapt: basis_increment must be non-negative");
}

VectorX residual_indicators(const GridHierarchy& grid, const PartitionOfUnity& pou,
                            const std::vector<NeighborhoodSpace>& spaces, const CoarseSolution& sol,
                            const FineSystem& sys) {
  VectorX r = sys.F - sys.A * sol.u_fine;
  for (Index k = 0; k < r.size(); ++k)
    if (sys.dirichlet_mask[k]) r[k] = 0.0;

  VectorX eta = VectorX::Zero(grid.num_coarse_nodes());
  for (const auto& ns : spaces) {
    const int i = ns.omega_id;
    const Index l = ns.num_snapshots();
    if (ns.m_off >= l) continue;
    const auto nodes = grid.fine.box_nodes(grid.neighborhoods[i]);
    VectorX w(nodes.size());
    for (std::size_t q = 0; q < nodes.size(); ++q) w[q] = r[nodes[q]] * pou.chi[i][q];
    const VectorX values = ns.offline_basis.rightCols(l - ns.m_off).transpose() * w;
    const double lam = std::max(ns.next_eigenvalue(), 1e-14);
    eta[i] = std::sqrt(values.squaredNorm() / lam);
  }
  return eta;
}

std::vector<int> dorfler_mark(const VectorX& eta, double theta) {
  std::vector<int> order(eta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta[a] * eta[a] > eta[b] * eta[b]; });
  // Tail sums keep theta = 1 exact: stop once the unmarked mass is small enough.
  std::vector<double> tail(order.size() + 1, 0.0);
  for (std::size_t k = order.size(); k-- > 0;) tail[k] = tail[k + 1] + eta[order[k]] * eta[order[k]];
  const double total = tail[0];
  std::vector<int> marked;
  if (!(total > 0.0)) return marked;
  for (std::size_t k = 0; k < order.size() && tail[k] > (1.0 - theta) * total; ++k) marked.push_back(order[k]);
  return marked;
}

IndicatorReport compute_indicators(const GridHierarchy& grid, const PartitionOfUnity& pou,
                                   const std::vector<NeighborhoodSpace>& spaces, const CoarseSolution& sol,
                                   const FineSystem& sys, const AdaptConfig& cfg) {
  cfg.validate();
  IndicatorReport rep;
  for (const auto& s : spaces) rep.dim += s.m_off;
  if (cfg.indicator == IndicatorKind::ManualRegion) {
    rep.eta = VectorX::Zero(grid.num_coarse_nodes());
    for (int id = 0; id < grid.num_coarse_nodes(); ++id) {
      const auto [I, J] = grid.coarse_node_ij(id);
      if (cfg.region.contains(I + 1, J + 1)) {
        rep.eta[id] = 1.0;
        rep.marked.push_back(id);
      }
    }
    return rep;
  }
  rep.eta = residual_indicators(grid, pou, spaces, sol, sys);
  if (rep.eta.maxCoeff() > cfg.tolerance) rep.marked = dorfler_mark(rep.eta, cfg.theta);
  return rep;
}

EnrichResult enrich(const IndicatorReport& report, std::vector<NeighborhoodSpace>& spaces, const AdaptConfig& cfg) {
  EnrichResult res;
  if (cfg.basis_increment == 0) return res;
  for (int i : report.marked) {
    auto& s = spaces[i];
    const int cap = static_cast<int>(s.num_snapshots());
    if (s.m_off >= cap) {
      res.skipped.push_back(i);
      continue;
    }
    s.m_off = std::min(s.m_off + cfg.basis_increment, cap);
    res.enriched.push_back(i);
  }
  return res;
}

AdaptResult adaptive_loop(const GridHierarchy& grid, const FineSystem& sys, const PartitionOfUnity& pou,
                          std::vector<NeighborhoodSpace> spaces, const AdaptConfig& cfg, const VectorX* u_ref) {
  cfg.validate();
  AdaptResult out;
  for (int iter = 0;; ++iter) {
    out.space = build_space(grid, pou, spaces, sys);
    out.solution = solve_coarse(out.space, sys);
    IndicatorReport rep = compute_indicators(grid, pou, spaces, out.solution, sys, cfg);
    rep.iteration = iter;
    rep.dim = out.space.dim();
    if (u_ref) {
      rep.errors = compute_errors(sys, *u_ref, out.solution.u_fine);
      rep.errors->dim = rep.dim;
    }
    const bool target_met = cfg.target_energy_error && rep.errors && rep.errors->rel_energy_fine <= *cfg.target_energy_error;
    const bool converged = cfg.indicator == IndicatorKind::Residual && rep.eta.maxCoeff() <= cfg.tolerance;
    const bool stop = iter >= cfg.max_iters || target_met || converged;
    if (stop) rep.marked.clear();
    out.history.push_back(rep);
    if (stop) break;
    if (enrich(rep, spaces, cfg).enriched.empty()) break;
    // Manual regions are enriched once.
    if (cfg.indicator == IndicatorKind::ManualRegion) {
      out.space = build_space(grid, pou, spaces, sys);
      out.solution = solve_coarse(out.space, sys);
      IndicatorReport last;
      last.iteration = iter + 1;
      last.dim = out.space.dim();
      last.eta = VectorX::Zero(grid.num_coarse_nodes());
      if (u_ref) {
        last.errors = compute_errors(sys, *u_ref, out.solution.u_fine);
        last.errors->dim = last.dim;
      }
      out.history.push_back(last);
      break;
    }
  }
  out.spaces = std::move(spaces);
  return out;
}

}  // namespace fracms
