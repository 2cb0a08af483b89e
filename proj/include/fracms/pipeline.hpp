/**
 * @file pipeline.hpp
 * @brief Run driver: assemble, build offline spaces, solve, report.
 */
#pragma once

#include "fracms/config.hpp"
#include "fracms/output.hpp"

#include <string>
#include <vector>

namespace fracms {

struct Problem {
  RunConfig config;
  GridHierarchy grid;
  std::vector<Fracture> fractures;
  FineSystem sys;
};

/// Grid, fractures (explicit plus generated), permeability and fine system.
Problem build_problem(const RunConfig& cfg);

/// Per-node offline counts for schedule value m: m on interior nodes,
/// boundary_m_off (or m) on boundary coarse nodes.
std::vector<int> node_counts(const GridHierarchy& grid, const OfflineConfig& off, int m);

struct OfflineStage {
  PartitionOfUnity pou;
  std::vector<SnapshotSpace> snapshots;
  std::vector<NeighborhoodSpace> spaces;
};

/// Snapshots and eigendecompositions with the given per-node counts. For
/// randomized snapshots the counts also set k_nb.
OfflineStage build_offline(const Problem& p, const PartitionOfUnity& pou, const std::vector<int>& counts);

struct SolveResult {
  VectorX u_fine;
  CoarseSolution coarse;
  OfflineStage offline;
  ErrorReport report;
  double snapshot_ratio = 0.0;
};

/// One multiscale solve at schedule value m, compared with the fine solution.
SolveResult run_solve(const Problem& p, const VectorX& u_fine, int m);

/// Largest snapshot-space dimension solved directly as the snapshot reference.
inline constexpr Index kMaxSnapshotSpaceDim = 3000;

struct SweepResult {
  std::vector<ErrorReport> rows;
  std::vector<double> snapshot_ratios;
  /// True when the reference is the full snapshot-space solution; otherwise
  /// the largest-schedule solution serves as reference.
  bool snapshot_reference = false;
};

SweepResult run_sweep(const Problem& p, const VectorX& u_fine);

AdaptResult run_adapt(const Problem& p, const VectorX& u_fine);

/// CLI entry points; return the process exit status.
int cmd_solve(const RunConfig& cfg, const std::string& out_dir, int m_override);
int cmd_sweep(const RunConfig& cfg, const std::string& out_dir);
int cmd_adapt(const RunConfig& cfg, const std::string& out_dir);
int cmd_export_matrices(const RunConfig& cfg, const std::string& out_dir);

/// Run manifest: config echo, seeds and library versions, no timestamps.
std::string manifest_json(const RunConfig& cfg, const std::string& command);

}  // namespace fracms
