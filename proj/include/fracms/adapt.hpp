/**
 * @file adapt.hpp
 * @brief Error indicators, bulk marking and the enrichment loop.
 *
 * The residual indicator of neighborhood omega_i is
 *
 *   eta_i^2 = sum_{k > m_off} r_i(chi_i psi_k)^2 / lambda_{m_off + 1},
 *
 * where r_i(v) = (f, v) - a(u_ms, v) and psi_k are the S_off-orthonormal
 * offline eigenvectors not yet in use.
 */
#pragma once

#include "fracms/analysis.hpp"
#include "fracms/coarse.hpp"

#include <optional>
#include <vector>

namespace fracms {

enum class IndicatorKind { ManualRegion, Residual };

/// Coarse-node rectangle, 1-based inclusive indices (i along x, j along y).
struct NodeRegion {
  int i0 = 1, i1 = 1, j0 = 1, j1 = 1;
  bool contains(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
};

struct AdaptConfig {
  double theta = 0.7;
  int max_iters = 10;
  int basis_increment = 1;
  IndicatorKind indicator = IndicatorKind::Residual;
  NodeRegion region;
  /// Stop once every indicator is at or below this value.
  double tolerance = 0.0;
  /// Stop once the relative energy error against the reference drops to this value.
  std::optional<double> target_energy_error;

  void validate() const;
};

struct IndicatorReport {
  VectorX eta;
  std::vector<int> marked;
  int iteration = 0;
  Index dim = 0;
  std::optional<ErrorReport> errors;
};

/// Residual indicators per coarse node (zero where every eigenvector is used).
VectorX residual_indicators(const GridHierarchy& grid, const PartitionOfUnity& pou,
                            const std::vector<NeighborhoodSpace>& spaces, const CoarseSolution& sol,
                            const FineSystem& sys);

/// Smallest prefix of nodes, sorted by descending eta^2 (ties by index),
/// carrying at least theta of the total; returned in that order.
std::vector<int> dorfler_mark(const VectorX& eta, double theta);

IndicatorReport compute_indicators(const GridHierarchy& grid, const PartitionOfUnity& pou,
                                   const std::vector<NeighborhoodSpace>& spaces, const CoarseSolution& sol,
                                   const FineSystem& sys, const AdaptConfig& cfg);

struct EnrichResult {
  std::vector<int> enriched;
  /// Marked nodes that had no unused eigenvector left.
  std::vector<int> skipped;
};

/// Raises m_off by the increment at marked nodes, capped at the snapshot count.
EnrichResult enrich(const IndicatorReport& report, std::vector<NeighborhoodSpace>& spaces, const AdaptConfig& cfg);

struct AdaptResult {
  CoarseSolution solution;
  MultiscaleSpace space;
  std::vector<NeighborhoodSpace> spaces;
  std::vector<IndicatorReport> history;
};

/// solve -> indicate -> mark -> enrich until max_iters, the indicator
/// tolerance or the target error is reached. `u_ref` enables error tracking.
AdaptResult adaptive_loop(const GridHierarchy& grid, const FineSystem& sys, const PartitionOfUnity& pou,
                          std::vector<NeighborhoodSpace> spaces, const AdaptConfig& cfg,
                          const VectorX* u_ref = nullptr);

}  // namespace fracms
