/**
 * @file config.hpp
 * @brief Run configuration: JSON schema, validation and echo.
 *
 * Every object rejects unknown keys. Parse errors carry the line and column
 * reported by the JSON reader; validation errors name the offending field.
 */
#pragma once

#include "fracms/adapt.hpp"
#include "fracms/fracture.hpp"
#include "fracms/msgen.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fracms {

struct GridConfig {
  Rect domain;
  int coarse_nx = 10, coarse_ny = 10;
  int refine = 10;
  int oversampling = 2;
};

struct MatrixConfig {
  double kappa = 1.0;
  /// Per-cell permeability raster (header "nx ny", then nx*ny values, row-major).
  std::string kappa_file;
  /// Per-cell 0/1 mask (same layout); masked cells get mask_kappa.
  std::string mask_file;
  double mask_kappa = 1e4;
};

struct GeneratorConfig {
  std::string name;
  std::uint64_t seed = 0;
};

struct OfflineConfig {
  SnapshotKind snapshots = SnapshotKind::Full;
  bool oversampled = false;
  std::vector<int> m_off{1};
  /// Basis count on boundary coarse nodes; defaults to the schedule value.
  std::optional<int> boundary_m_off;
  int p_bf = 4;
  std::uint64_t seed = 0;
};

struct OutputConfig {
  std::string dir = "out";
  bool fields = true;
  bool vtk = true;
  bool eigenvalues = false;
};

struct RunConfig {
  GridConfig grid;
  MatrixConfig matrix;
  std::vector<Fracture> fractures;
  std::optional<GeneratorConfig> generator;
  bool strict_dfm = false;
  double coupling_scale = 1.0;
  /// EFM 1D element length; 0 means the fine mesh size.
  double efm_segment = 0.0;
  /// a + b x + c y + d xy + e x^2 + f y^2
  std::array<double, 6> boundary{0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  double source = 0.0;
  OfflineConfig offline;
  AdaptConfig adapt;
  int adapt_initial_m_off = 1;
  OutputConfig output;
};

/// Default fracture aperture and permeability for a domain and matrix kappa.
double default_aperture(const Rect& domain);
double default_fracture_kappa(double matrix_kappa);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON echo; parse_config(to_json_text(c)) reproduces c.
std::string to_json_text(const RunConfig& c);

}  // namespace fracms
