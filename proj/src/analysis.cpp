#include "fracms/analysis.hpp"

#include <cmath>
#include <cstdio>

namespace fracms {

double energy_squared(const FineSystem& sys, const VectorX& v) { return v.dot(sys.A * v); }

double weighted_l2_squared(const FineSystem& sys, const VectorX& v) { return v.dot(sys.M * v); }

ErrorReport compute_errors(const FineSystem& sys, const VectorX& u_fine, const VectorX& u_off, const VectorX* u_snap) {
  if (u_fine.size() != sys.size() || u_off.size() != sys.size() || (u_snap && u_snap->size() != sys.size()))
    throw Error("compute_errors: fields must live on the fine dof set");

  auto relative = [&](const VectorX& ref, const VectorX& approx) {
    const double e_ref = energy_squared(sys, ref), l_ref = weighted_l2_squared(sys, ref);
    if (!(e_ref > 0.0) || !(l_ref > 0.0)) throw Error("compute_errors: reference field has zero energy");
    const VectorX e = ref - approx;
    return std::pair{std::sqrt(std::max(weighted_l2_squared(sys, e), 0.0) / l_ref),
                     std::sqrt(std::max(energy_squared(sys, e), 0.0) / e_ref)};
  };

  ErrorReport r;
  std::tie(r.rel_l2_fine, r.rel_energy_fine) = relative(u_fine, u_off);
  if (u_snap) {
    const auto [l2, en] = relative(*u_snap, u_off);
    r.rel_l2_snap = l2;
    r.rel_energy_snap = en;
  }
  r.mode = sys.mode == SystemMode::DfmMonolithic ? "dfm" : "efm";
  return r;
}

std::string csv_header() { return "dim,l2_fine_pct,h1_fine_pct,l2_snap_pct,h1_snap_pct"; }

std::string csv_row(const ErrorReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%lld,%.6f,%.6f,", static_cast<long long>(r.dim), 100.0 * r.rel_l2_fine,
                100.0 * r.rel_energy_fine);
  std::string row(buf);
  if (r.rel_l2_snap && r.rel_energy_snap) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", 100.0 * *r.rel_l2_snap, 100.0 * *r.rel_energy_snap);
    row += buf;
  } else {
    row += ",";
  }
  return row;
}

}  // namespace fracms
