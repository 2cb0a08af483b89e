#pragma once

#include "fracms/assembly.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace fracms {

/// v^T A v with the fracture-inclusive stiffness.
double energy_squared(const FineSystem& sys, const VectorX& v);
/// ||kappa^{1/2} v||^2 including the 1D fracture terms.
double weighted_l2_squared(const FineSystem& sys, const VectorX& v);

struct ErrorReport {
  Index dim = 0;
  double rel_l2_fine = 0.0;
  double rel_energy_fine = 0.0;
  std::optional<double> rel_l2_snap;
  std::optional<double> rel_energy_snap;
  std::string field_id;
  std::string mode;
  std::uint64_t seed = 0;
};

/// Relative errors of u_off against the fine solution and, when given,
/// against the snapshot solution.
ErrorReport compute_errors(const FineSystem& sys, const VectorX& u_fine, const VectorX& u_off,
                           const VectorX* u_snap = nullptr);

/// Column header: dim,l2_fine_pct,h1_fine_pct,l2_snap_pct,h1_snap_pct
std::string csv_header();
/// Percentages; missing snapshot comparisons are left empty.
std::string csv_row(const ErrorReport& r);

}  // namespace fracms
