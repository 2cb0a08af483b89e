#pragma once

#include "fracms/adapt.hpp"

#include <string>
#include <vector>

namespace fracms {

/// Matrix-node values as a (ny+1) x (nx+1) CSV grid, row j = 0 first.
void write_grid_csv(const std::string& path, const FineGrid& grid, const VectorX& u);
/// Legacy VTK STRUCTURED_POINTS with one point scalar per named field.
void write_vtk(const std::string& path, const FineGrid& grid, const std::vector<std::pair<std::string, VectorX>>& fields);
/// EFM fracture unknowns: fracture_id,x,y,u.
void write_fracture_csv(const std::string& path, const FineSystem& sys, const VectorX& u);
/// omega_id,k,lambda for every eigenvalue of every neighborhood.
void write_eigenvalues_csv(const std::string& path, const std::vector<NeighborhoodSpace>& spaces);
void write_errors_csv(const std::string& path, const std::vector<ErrorReport>& rows);
/// iteration,dim,l2_fine_pct,h1_fine_pct,marked
void write_trajectory_csv(const std::string& path, const std::vector<IndicatorReport>& history);
void write_matrix_market(const std::string& path, const SparseMatrix& A);
void write_vector_market(const std::string& path, const VectorX& v);
void write_text(const std::string& path, const std::string& text);

}  // namespace fracms
