#include "fracms/output.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <cstdio>
#include <fstream>

namespace fracms {

namespace {

std::ofstream open(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out.precision(17);
  return out;
}

}  // namespace

void write_grid_csv(const std::string& path, const FineGrid& grid, const VectorX& u) {
  auto out = open(path);
  for (int j = 0; j <= grid.ny(); ++j) {
    for (int i = 0; i <= grid.nx(); ++i) out << (i ? "," : "") << u[grid.node(i, j)];
    out << '\n';
  }
}

void write_vtk(const std::string& path, const FineGrid& grid,
               const std::vector<std::pair<std::string, VectorX>>& fields) {
  auto out = open(path);
  const auto& d = grid.domain();
  out << "# vtk DataFile Version 3.0\nfracms fields\nASCII\nDATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << grid.nx() + 1 << ' ' << grid.ny() + 1 << " 1\n"
      << "ORIGIN " << d.x0 << ' ' << d.y0 << " 0\n"
      << "SPACING " << grid.hx() << ' ' << grid.hy() << " 1\n"
      << "POINT_DATA " << grid.num_nodes() << '\n';
  for (const auto& [name, u] : fields) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < grid.num_nodes(); ++n) out << u[n] << '\n';
  }
}

void write_fracture_csv(const std::string& path, const FineSystem& sys, const VectorX& u) {
  auto out = open(path);
  out << "fracture_id,x,y,u\n";
  for (const auto& blk : sys.efm)
    for (Index k = 0; k < blk.size; ++k)
      out << blk.fracture_id << ',' << blk.trace.nodes[k].x() << ',' << blk.trace.nodes[k].y() << ','
          << u[blk.offset + k] << '\n';
}

void write_eigenvalues_csv(const std::string& path, const std::vector<NeighborhoodSpace>& spaces) {
  auto out = open(path);
  out << "omega_id,k,lambda\n";
  for (const auto& s : spaces)
    for (Index k = 0; k < s.eigenvalues.size(); ++k) out << s.omega_id << ',' << k << ',' << s.eigenvalues[k] << '\n';
}

void write_errors_csv(const std::string& path, const std::vector<ErrorReport>& rows) {
  auto out = open(path);
  out << csv_header() << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

void write_trajectory_csv(const std::string& path, const std::vector<IndicatorReport>& history) {
  auto out = open(path);
  out << "iteration,dim,l2_fine_pct,h1_fine_pct,marked\n";
  char buf[128];
  for (const auto& h : history) {
    out << h.iteration << ',' << h.dim << ',';
    if (h.errors) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f", 100.0 * h.errors->rel_l2_fine, 100.0 * h.errors->rel_energy_fine);
      out << buf;
    } else {
      out << ',';
    }
    out << ',' << h.marked.size() << '\n';
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& A) {
  if (!Eigen::saveMarket(A, path)) throw Error("cannot write '" + path + "'");
}

void write_vector_market(const std::string& path, const VectorX& v) {
  if (!Eigen::saveMarketVector(v, path)) throw Error("cannot write '" + path + "'");
}

void write_text(const std::string& path, const std::string& text) { open(path) << text; }

}  // namespace fracms
