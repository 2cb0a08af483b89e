#include "fracms/pipeline.hpp"

#include "fracms/generators.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fracms {

namespace {

std::vector<double> read_raster(const std::string& path, const FineGrid& grid) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open raster '" + path + "'");
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw Error("config: raster '" + path + "' lacks the 'nx ny' header");
  if (nx != grid.nx() || ny != grid.ny())
    throw Error("config: raster '" + path + "' is " + std::to_string(nx) + "x" + std::to_string(ny) +
                ", fine grid is " + std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
  std::vector<double> v(static_cast<std::size_t>(nx) * ny);
  for (auto& x : v)
    if (!(in >> x)) throw Error("config: raster '" + path + "' is truncated");
  return v;
}

BoundaryData boundary_from(const std::array<double, 6>& c) {
  return {[c](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x * x + c[5] * y * y;
  }};
}

void apply_counts(std::vector<NeighborhoodSpace>& spaces, const std::vector<int>& counts) {
  for (auto& s : spaces) s.m_off = std::min<int>(counts[s.omega_id], static_cast<int>(s.num_snapshots()));
}

std::filesystem::path prepare(const std::string& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  p.config = cfg;
  const auto& g = cfg.grid;
  p.grid = build_hierarchy(g.domain, g.coarse_nx, g.coarse_ny, g.refine, g.oversampling);
  const FineGrid& fg = p.grid.fine;

  p.fractures = cfg.fractures;
  if (cfg.generator) {
    int next = 0;
    for (const auto& f : p.fractures) next = std::max(next, f.id + 1);
    auto gen = generate_fractures(cfg.generator->name, p.grid, cfg.generator->seed, default_aperture(g.domain),
                                  default_fracture_kappa(cfg.matrix.kappa), next);
    p.fractures.insert(p.fractures.end(), gen.begin(), gen.end());
  }
  for (const auto& f : p.fractures) validate(f, g.domain);

  PermeabilityField perm = PermeabilityField::constant(fg, cfg.matrix.kappa);
  if (!cfg.matrix.kappa_file.empty()) {
    const auto v = read_raster(cfg.matrix.kappa_file, fg);
    for (int c = 0; c < fg.num_cells(); ++c) {
      if (!(v[c] > 0.0)) throw Error("config: raster '" + cfg.matrix.kappa_file + "' has a non-positive value");
      perm.kappa_cells[c] = v[c];
    }
  }
  if (!cfg.matrix.mask_file.empty()) {
    const auto v = read_raster(cfg.matrix.mask_file, fg);
    for (int c = 0; c < fg.num_cells(); ++c)
      if (v[c] != 0.0) perm.kappa_cells[c] = cfg.matrix.mask_kappa;
  }

  std::vector<DfmTrace> dfm;
  std::vector<EfmTrace> efm;
  const double seg = cfg.efm_segment > 0.0 ? cfg.efm_segment : std::min(fg.hx(), fg.hy());
  for (const auto& f : p.fractures) {
    try {
      if (f.model == FractureModel::Dfm)
        dfm.push_back(rasterize_dfm(f, fg, cfg.strict_dfm ? SnapMode::Strict : SnapMode::Snap));
      else
        efm.push_back(intersect_efm(f, fg, seg));
    } catch (const Error& e) {
      const std::string what = e.what();
      throw Error(what.rfind("fracture ", 0) == 0 ? what : "fracture " + std::to_string(f.id) + ": " + what);
    }
  }
  const double src = cfg.source;
  const ScalarField f = [src](const Vec2&) { return src; };
  const BoundaryData bc = boundary_from(cfg.boundary);
  p.sys = efm.empty() ? assemble_dfm(fg, perm, dfm, f, bc)
                      : assemble_efm(fg, perm, dfm, efm, f, bc, EfmOptions{cfg.coupling_scale});
  return p;
}

std::vector<int> node_counts(const GridHierarchy& grid, const OfflineConfig& off, int m) {
  std::vector<int> counts(grid.num_coarse_nodes(), m);
  if (off.boundary_m_off)
    for (int i = 0; i < grid.num_coarse_nodes(); ++i)
      if (grid.is_boundary_coarse_node(i)) counts[i] = *off.boundary_m_off;
  return counts;
}

OfflineStage build_offline(const Problem& p, const PartitionOfUnity& pou, const std::vector<int>& counts) {
  const auto& off = p.config.offline;
  OfflineStage st;
  st.pou = pou;
  const SnapshotOptions opts{off.snapshots, off.oversampled, off.p_bf, off.seed};
  st.snapshots = build_snapshots(p.grid, p.sys, opts, counts);
  st.spaces = build_offline_spaces(p.grid, p.sys, pou, st.snapshots, counts);
  return st;
}

SolveResult run_solve(const Problem& p, const VectorX& u_fine, int m) {
  SolveResult r;
  r.u_fine = u_fine;
  const auto counts = node_counts(p.grid, p.config.offline, m);
  r.offline = build_offline(p, compute_pou(p.grid, p.sys), counts);
  apply_counts(r.offline.spaces, counts);
  const MultiscaleSpace ms = build_space(p.grid, r.offline.pou, r.offline.spaces, p.sys);
  r.coarse = solve_coarse(ms, p.sys);
  r.report = compute_errors(p.sys, u_fine, r.coarse.u_fine);
  r.report.dim = ms.dim();
  r.snapshot_ratio = snapshot_ratio(p.grid, r.offline.snapshots);
  return r;
}

SweepResult run_sweep(const Problem& p, const VectorX& u_fine) {
  const auto& off = p.config.offline;
  const PartitionOfUnity pou = compute_pou(p.grid, p.sys);
  const int m_max = *std::max_element(off.m_off.begin(), off.m_off.end());

  std::vector<CoarseSolution> sols;
  std::vector<Index> dims;
  SweepResult res;
  OfflineStage shared;
  const bool full = off.snapshots == SnapshotKind::Full;
  if (full) shared = build_offline(p, pou, node_counts(p.grid, off, m_max));
  for (int m : off.m_off) {
    const auto counts = node_counts(p.grid, off, m);
    OfflineStage local = full ? OfflineStage{} : build_offline(p, pou, counts);
    OfflineStage& st = full ? shared : local;
    apply_counts(st.spaces, counts);
    const MultiscaleSpace ms = build_space(p.grid, pou, st.spaces, p.sys);
    sols.push_back(solve_coarse(ms, p.sys));
    dims.push_back(ms.dim());
    res.snapshot_ratios.push_back(snapshot_ratio(p.grid, st.snapshots));
  }

  // Snapshot reference: the full snapshot-space solution when affordable.
  std::optional<VectorX> u_snap;
  if (full) {
    Index snap_dim = 0;
    for (const auto& s : shared.snapshots) snap_dim += s.vectors.cols();
    if (snap_dim <= kMaxSnapshotSpaceDim) {
      u_snap = solve_coarse(build_snapshot_space(p.grid, pou, shared.snapshots, p.sys), p.sys).u_fine;
      res.snapshot_reference = true;
    }
  }
  std::size_t ref = 0;
  for (std::size_t k = 0; k < sols.size(); ++k)
    if (off.m_off[k] == m_max) ref = k;
  for (std::size_t k = 0; k < sols.size(); ++k) {
    const VectorX* snap = u_snap ? &*u_snap : (k == ref ? nullptr : &sols[ref].u_fine);
    ErrorReport r = compute_errors(p.sys, u_fine, sols[k].u_fine, snap);
    r.dim = dims[k];
    r.seed = off.seed;
    res.rows.push_back(r);
  }
  return res;
}

AdaptResult run_adapt(const Problem& p, const VectorX& u_fine) {
  const auto& off = p.config.offline;
  const PartitionOfUnity pou = compute_pou(p.grid, p.sys);
  const auto counts = node_counts(p.grid, off, p.config.adapt_initial_m_off);
  // Randomized snapshots need room for the enrichment budget.
  std::vector<int> k_nb = counts;
  if (off.snapshots == SnapshotKind::Randomized)
    for (auto& k : k_nb) k += p.config.adapt.basis_increment * p.config.adapt.max_iters;
  OfflineStage st = build_offline(p, pou, k_nb);
  apply_counts(st.spaces, counts);
  return adaptive_loop(p.grid, p.sys, pou, st.spaces, p.config.adapt, &u_fine);
}

std::string manifest_json(const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["config"] = nlohmann::ordered_json::parse(to_json_text(cfg));
  m["seeds"] = {{"offline", cfg.offline.seed}, {"generator", cfg.generator ? cfg.generator->seed : 0}};
  m["versions"] = {{"fracms", "0.1.0"},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  return m.dump(2) + "\n";
}

int cmd_solve(const RunConfig& cfg, const std::string& out_dir, int m_override) {
  const auto dir = prepare(out_dir);
  const Problem p = build_problem(cfg);
  const FineSolution fine = solve_fine(p.sys);
  const int m = m_override > 0 ? m_override : cfg.offline.m_off.front();
  SolveResult r = run_solve(p, fine.u, m);
  r.report.seed = cfg.offline.seed;
  write_errors_csv((dir / "errors.csv").string(), {r.report});
  if (cfg.output.fields) {
    const Index n = p.sys.num_matrix_dofs;
    write_grid_csv((dir / "u_fine.csv").string(), p.grid.fine, fine.u.head(n));
    write_grid_csv((dir / "u_ms.csv").string(), p.grid.fine, r.coarse.u_fine.head(n));
    if (p.sys.num_efm() > 0) {
      write_fracture_csv((dir / "fracture_fine.csv").string(), p.sys, fine.u);
      write_fracture_csv((dir / "fracture_ms.csv").string(), p.sys, r.coarse.u_fine);
    }
  }
  if (cfg.output.vtk) {
    const Index n = p.sys.num_matrix_dofs;
    write_vtk((dir / "fields.vtk").string(), p.grid.fine,
              {{"u_fine", fine.u.head(n)}, {"u_ms", r.coarse.u_fine.head(n)},
               {"error", fine.u.head(n) - r.coarse.u_fine.head(n)}});
  }
  if (cfg.output.eigenvalues) write_eigenvalues_csv((dir / "eigenvalues.csv").string(), r.offline.spaces);
  write_text((dir / "manifest.json").string(), manifest_json(cfg, "solve"));
  std::cout << csv_header() << '\n' << csv_row(r.report) << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& out_dir) {
  const auto dir = prepare(out_dir);
  const Problem p = build_problem(cfg);
  const FineSolution fine = solve_fine(p.sys);
  const SweepResult res = run_sweep(p, fine.u);
  write_errors_csv((dir / "errors.csv").string(), res.rows);
  {
    std::ofstream out(dir / "snapshot_ratio.csv");
    out << "dim,snapshot_ratio_pct\n";
    for (std::size_t k = 0; k < res.rows.size(); ++k) out << res.rows[k].dim << ',' << 100.0 * res.snapshot_ratios[k] << '\n';
  }
  write_text((dir / "manifest.json").string(), manifest_json(cfg, "sweep"));
  std::cout << csv_header() << '\n';
  for (const auto& r : res.rows) std::cout << csv_row(r) << '\n';
  return 0;
}

int cmd_adapt(const RunConfig& cfg, const std::string& out_dir) {
  const auto dir = prepare(out_dir);
  const Problem p = build_problem(cfg);
  const FineSolution fine = solve_fine(p.sys);
  const AdaptResult res = run_adapt(p, fine.u);
  write_trajectory_csv((dir / "trajectory.csv").string(), res.history);
  ErrorReport last = compute_errors(p.sys, fine.u, res.solution.u_fine);
  last.dim = res.space.dim();
  last.seed = cfg.offline.seed;
  write_errors_csv((dir / "errors.csv").string(), {last});
  if (cfg.output.vtk)
    write_vtk((dir / "fields.vtk").string(), p.grid.fine,
              {{"u_fine", fine.u.head(p.sys.num_matrix_dofs)},
               {"u_ms", res.solution.u_fine.head(p.sys.num_matrix_dofs)}});
  write_text((dir / "manifest.json").string(), manifest_json(cfg, "adapt"));
  for (const auto& h : res.history)
    std::cout << "iteration " << h.iteration << " dim " << h.dim << " marked " << h.marked.size()
              << (h.errors ? " energy_pct " + std::to_string(100.0 * h.errors->rel_energy_fine) : "") << '\n';
  return 0;
}

int cmd_export_matrices(const RunConfig& cfg, const std::string& out_dir) {
  const auto dir = prepare(out_dir);
  const Problem p = build_problem(cfg);
  write_matrix_market((dir / "A.mtx").string(), p.sys.A);
  write_matrix_market((dir / "M.mtx").string(), p.sys.M);
  write_vector_market((dir / "F.mtx").string(), p.sys.F);
  const PartitionOfUnity pou = compute_pou(p.grid, p.sys);
  OfflineStage st = build_offline(p, pou, node_counts(p.grid, cfg.offline, cfg.offline.m_off.front()));
  apply_counts(st.spaces, node_counts(p.grid, cfg.offline, cfg.offline.m_off.front()));
  const MultiscaleSpace ms = build_space(p.grid, pou, st.spaces, p.sys);
  write_matrix_market((dir / "R0T.mtx").string(), ms.R0T);
  const MatrixX A0 = coarse_matrix(ms, p.sys);
  write_matrix_market((dir / "A0.mtx").string(), SparseMatrix(A0.sparseView()));
  write_text((dir / "manifest.json").string(), manifest_json(cfg, "export-matrices"));
  return 0;
}

}  // namespace fracms
