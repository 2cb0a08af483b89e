#include "fracms/msgen.hpp"

#include "fracms/linalg.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <random>

namespace fracms {

namespace {

// Parallel loop over neighborhoods; results land in per-index slots so the
// outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

VectorX PartitionOfUnity::chi_global(const GridHierarchy& grid, int i) const {
  VectorX out = VectorX::Zero(grid.fine.num_nodes());
  const auto nodes = grid.fine.box_nodes(grid.neighborhoods[i]);
  for (std::size_t k = 0; k < nodes.size(); ++k) out[nodes[k]] = chi[i][k];
  return out;
}

LocalOperator local_operator(const FineSystem& sys, const CellBox& box) {
  const FineGrid& grid = sys.grid;
  LocalOperator op;
  op.num_matrix = box.num_nodes();
  SparseMatrix Am = assemble_stiffness(grid, sys.cell_kappa, sys.edge_conductivity, box);
  if (sys.efm.empty()) {
    op.A = std::move(Am);
    return op;
  }

  // Embedded fractures enter through the transfer terms of cells in the box
  // and the 1D elements carrying them; fracture ends inside the box are free.
  std::vector<Triplet> trip;
  for (Index k = 0; k < Am.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(Am, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  std::map<Index, Index> frac_local;
  auto local_dof = [&](Index dof) -> Index {
    if (dof < sys.num_matrix_dofs) {
      const auto [i, j] = grid.node_ij(static_cast<int>(dof));
      return box.local_node(i, j);
    }
    return frac_local.emplace(dof, op.num_matrix + static_cast<Index>(frac_local.size())).first->second;
  };
  for (const auto& blk : sys.efm) {
    std::set<int> elements;
    for (const auto& cp : efm_couplings(sys, blk)) {
      const auto [ci, cj] = grid.cell_ij(cp.cell);
      if (ci < box.i0 || ci >= box.i1 || cj < box.j0 || cj >= box.j1) continue;
      elements.insert(static_cast<int>(cp.dofs[4] - blk.offset));
      std::array<Index, 6> ld;
      for (int a = 0; a < 6; ++a) ld[a] = local_dof(cp.dofs[a]);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          if (cp.coef[a] != 0.0 && cp.coef[b] != 0.0) trip.emplace_back(ld[a], ld[b], cp.ci * cp.coef[a] * cp.coef[b]);
    }
    for (int e : elements) {
      const double k = blk.trace.conductivity / blk.trace.element_length[e];
      const Index a = local_dof(blk.offset + e), b = local_dof(blk.offset + e + 1);
      trip.emplace_back(a, a, k);
      trip.emplace_back(b, b, k);
      trip.emplace_back(a, b, -k);
      trip.emplace_back(b, a, -k);
    }
  }
  const Index n = op.num_matrix + static_cast<Index>(frac_local.size());
  op.A.resize(n, n);
  op.A.setFromTriplets(trip.begin(), trip.end());
  return op;
}

MatrixX harmonic_extension(const FineSystem& sys, const CellBox& box, const MatrixX& boundary_values) {
  const LocalOperator op = local_operator(sys, box);
  std::vector<Index> bidx, iidx;
  for (int j = box.j0; j <= box.j1; ++j)
    for (int i = box.i0; i <= box.i1; ++i) (box.on_boundary(i, j) ? bidx : iidx).push_back(box.local_node(i, j));
  for (Index k = op.num_matrix; k < op.A.rows(); ++k) iidx.push_back(k);
  if (boundary_values.rows() != static_cast<Index>(bidx.size()))
    throw Error("harmonic_extension: boundary data has the wrong number of rows");

  MatrixX out = MatrixX::Zero(box.num_nodes(), boundary_values.cols());
  for (std::size_t k = 0; k < bidx.size(); ++k) out.row(bidx[k]) = boundary_values.row(k);
  if (iidx.empty()) return out;

  const SparseMatrix Aii = submatrix(op.A, iidx, iidx);
  const SparseMatrix Aib = submatrix(op.A, iidx, bidx);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Aii);
  if (ldlt.info() != Eigen::Success) throw Error("harmonic_extension: local factorization failed");
  const MatrixX rhs = -(Aib * boundary_values);
  const MatrixX x = ldlt.solve(rhs);
  for (std::size_t k = 0; k < iidx.size(); ++k)
    if (iidx[k] < op.num_matrix) out.row(iidx[k]) = x.row(k);
  return out;
}

MatrixX local_energy(const FineSystem& sys, const CellBox& box, const MatrixX& values) {
  const LocalOperator op = local_operator(sys, box);
  const Index nm = op.num_matrix, nf = op.A.rows() - nm;
  const SparseMatrix Amm = op.A.topLeftCorner(nm, nm);
  MatrixX E = values.transpose() * (Amm * values);
  if (nf > 0) {
    const SparseMatrix Aff = op.A.bottomRightCorner(nf, nf);
    const MatrixX AfmV = SparseMatrix(op.A.bottomLeftCorner(nf, nm)) * values;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(Aff);
    if (ldlt.info() != Eigen::Success) throw Error("local_energy: fracture block factorization failed");
    E -= AfmV.transpose() * ldlt.solve(AfmV);
  }
  return 0.5 * (E + E.transpose());
}

MatrixX restrict_to_box(const MatrixX& values, const CellBox& outer, const CellBox& inner) {
  if (!outer.contains(inner)) throw Error("restrict_to_box: inner box is not contained in the outer box");
  MatrixX out(inner.num_nodes(), values.cols());
  for (int j = inner.j0; j <= inner.j1; ++j)
    for (int i = inner.i0; i <= inner.i1; ++i) out.row(inner.local_node(i, j)) = values.row(outer.local_node(i, j));
  return out;
}

PartitionOfUnity compute_pou(const GridHierarchy& grid, const FineSystem& sys) {
  const FineGrid& fine = grid.fine;
  PartitionOfUnity pou;
  pou.chi.resize(grid.num_coarse_nodes());
  for (int i = 0; i < grid.num_coarse_nodes(); ++i) pou.chi[i] = VectorX::Zero(grid.neighborhoods[i].num_nodes());
  pou.gradient_energy = VectorX::Zero(fine.num_cells());

  const Eigen::Matrix4d Ke = element_stiffness(fine.hx(), fine.hy());
  const double H2 = grid.H() * grid.H();
  const int nK = grid.num_coarse_elements();
  std::vector<MatrixX> local(nK);

  parallel_for(nK, [&](int K) {
    const CellBox box = grid.coarse_element_box(K);
    MatrixX g(fine.box_boundary_nodes(box).size(), 4);
    int row = 0;
    for (int j = box.j0; j <= box.j1; ++j)
      for (int i = box.i0; i <= box.i1; ++i) {
        if (!box.on_boundary(i, j)) continue;
        const double s = static_cast<double>(i - box.i0) / box.nx();
        const double t = static_cast<double>(j - box.j0) / box.ny();
        g.row(row++) << (1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t;
      }
    local[K] = harmonic_extension(sys, box, g);
  });

  for (int K = 0; K < nK; ++K) {
    const CellBox box = grid.coarse_element_box(K);
    const auto corners = grid.element_corners(K);
    for (int a = 0; a < 4; ++a) {
      const CellBox& om = grid.neighborhoods[corners[a]];
      for (int j = box.j0; j <= box.j1; ++j)
        for (int i = box.i0; i <= box.i1; ++i) pou.chi[corners[a]][om.local_node(i, j)] = local[K](box.local_node(i, j), a);
    }
    for (int j = box.j0; j < box.j1; ++j)
      for (int i = box.i0; i < box.i1; ++i) {
        const std::array<int, 4> ln{box.local_node(i, j), box.local_node(i + 1, j), box.local_node(i + 1, j + 1),
                                    box.local_node(i, j + 1)};
        double e = 0.0;
        for (int a = 0; a < 4; ++a) {
          Eigen::Vector4d v;
          for (int q = 0; q < 4; ++q) v[q] = local[K](ln[q], a);
          e += v.dot(Ke * v) / fine.cell_area();
        }
        pou.gradient_energy[fine.cell(i, j)] = H2 * e;
      }
  }
  pou.kappa_tilde = sys.cell_kappa.cwiseProduct(pou.gradient_energy);

  // Fracture edges carry the tangential analogue: c H^2 sum_i (d chi_i / ds)^2.
  pou.edge_weight = VectorX::Zero(fine.num_edges());
  for (int e = 0; e < fine.num_edges(); ++e) {
    const double c = sys.edge_conductivity[e];
    if (c == 0.0) continue;
    const auto [n0, n1] = fine.edge_nodes(e);
    const auto [i0, j0] = fine.node_ij(n0);
    const auto [i1, j1] = fine.node_ij(n1);
    // Any coarse element containing the edge sees the same traces.
    const int K = grid.coarse_element_of_cell(fine.cell(std::min(i0, fine.nx() - 1), std::min(j0, fine.ny() - 1)));
    const CellBox box = grid.coarse_element_box(K);
    const int a0 = box.local_node(i0, j0), a1 = box.local_node(i1, j1);
    const double len = fine.edge_length(e);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double d = (local[K](a1, a) - local[K](a0, a)) / len;
      sum += d * d;
    }
    pou.edge_weight[e] = c * H2 * sum;
  }
  pou.S = assemble_mass(fine, pou.kappa_tilde, pou.edge_weight, fine.full_box());
  return pou;
}

int full_snapshot_count(const GridHierarchy& grid, int omega_id, bool oversampled) {
  const CellBox& box = oversampled ? grid.oversampled[omega_id] : grid.neighborhoods[omega_id];
  return 2 * (box.nx() + box.ny());
}

SnapshotSpace full_snapshots(const GridHierarchy& grid, const FineSystem& sys, int omega_id, bool oversampled) {
  const CellBox& om = grid.neighborhoods[omega_id];
  const CellBox& gen = oversampled ? grid.oversampled[omega_id] : om;
  if (om.nx() < 2 || om.ny() < 2) throw Error("full_snapshots: neighborhood has no interior fine node");
  const int nb = full_snapshot_count(grid, omega_id, oversampled);

  SnapshotSpace s;
  s.omega_id = omega_id;
  s.kind = SnapshotKind::Full;
  s.oversampling = oversampled ? grid.oversampling : 0;
  s.boundary_data = MatrixX::Identity(nb, nb);
  s.vectors = restrict_to_box(harmonic_extension(sys, gen, s.boundary_data), gen, om);
  return s;
}

SnapshotSpace randomized_snapshots(const GridHierarchy& grid, const FineSystem& sys, int omega_id, int k_nb, int p_bf,
                                   std::uint64_t seed) {
  if (k_nb < 1) throw Error("randomized_snapshots: k_nb must be at least 1");
  if (p_bf < 0) throw Error("randomized_snapshots: buffer must be non-negative");
  const CellBox& om = grid.neighborhoods[omega_id];
  const CellBox& gen = grid.oversampled[omega_id];
  const int nb = full_snapshot_count(grid, omega_id, true);
  const int nr = k_nb + p_bf;

  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(omega_id))));
  SnapshotSpace s;
  s.omega_id = omega_id;
  s.kind = SnapshotKind::Randomized;
  s.oversampling = grid.oversampling;
  s.buffer = p_bf;
  s.constant_included = true;
  s.boundary_data.resize(nb, nr);
  for (int c = 0; c < nr; ++c)
    for (int r = 0; r < nb; ++r) {
      const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      s.boundary_data(r, c) = 2.0 * u01 - 1.0;
    }
  const MatrixX ext = restrict_to_box(harmonic_extension(sys, gen, s.boundary_data), gen, om);
  s.vectors.resize(ext.rows(), nr + 1);
  s.vectors.leftCols(nr) = ext;
  s.vectors.col(nr).setOnes();
  return s;
}

double NeighborhoodSpace::next_eigenvalue() const {
  return m_off < eigenvalues.size() ? eigenvalues[m_off] : std::numeric_limits<double>::infinity();
}

NeighborhoodSpace offline_eigendecomposition(const SnapshotSpace& snap, const GridHierarchy& grid,
                                             const FineSystem& sys, const PartitionOfUnity& pou, int m_off) {
  const Index l = snap.size();
  if (m_off < 1 || m_off > l)
    throw Error("offline_eigendecomposition: m_off=" + std::to_string(m_off) + " outside [1, " + std::to_string(l) +
                "] on neighborhood " + std::to_string(snap.omega_id));
  const CellBox& om = grid.neighborhoods[snap.omega_id];
  const SparseMatrix S = assemble_mass(grid.fine, pou.kappa_tilde, pou.edge_weight, om);
  const MatrixX& R = snap.vectors;

  NeighborhoodSpace ns;
  ns.omega_id = snap.omega_id;
  ns.m_off = m_off;
  ns.A_off = local_energy(sys, om, R);
  ns.S_off = R.transpose() * (S * R);
  ns.A_off = 0.5 * (ns.A_off + ns.A_off.transpose()).eval();
  ns.S_off = 0.5 * (ns.S_off + ns.S_off.transpose()).eval();

  // Whiten with S_off and drop numerically dependent snapshot directions.
  Eigen::SelfAdjointEigenSolver<MatrixX> sev(ns.S_off);
  if (sev.info() != Eigen::Success)
    throw Error("offline_eigendecomposition: eigensolver failed on neighborhood " + std::to_string(snap.omega_id));
  const double smax = std::max(sev.eigenvalues().maxCoeff(), 0.0);
  if (!(smax > 0.0)) throw Error("offline_eigendecomposition: zero weighted mass on neighborhood " + std::to_string(snap.omega_id));
  std::vector<Index> keep;
  for (Index k = 0; k < l; ++k)
    if (sev.eigenvalues()[k] > kSnapshotDependenceTol * smax) keep.push_back(k);
  ns.regularized = static_cast<Index>(keep.size()) < l;
  MatrixX W(l, keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    W.col(c) = sev.eigenvectors().col(keep[c]) / std::sqrt(sev.eigenvalues()[keep[c]]);
  MatrixX C = W.transpose() * ns.A_off * W;
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixX> ces(C);
  if (ces.info() != Eigen::Success)
    throw Error("offline_eigendecomposition: eigensolver failed on neighborhood " + std::to_string(snap.omega_id));
  ns.eigenvalues = ces.eigenvalues();
  ns.eigenvectors = W * ces.eigenvectors();
  const Index r = ns.eigenvalues.size();
  ns.m_off = std::min<int>(m_off, static_cast<int>(r));
  for (Index k = 0; k < r; ++k) {
    Index arg;
    ns.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (ns.eigenvectors(arg, k) < 0.0) ns.eigenvectors.col(k) *= -1.0;
  }
  ns.offline_basis = R * ns.eigenvectors;

  auto first = ns.offline_basis.col(0);
  const double mean = first.mean();
  if (first.minCoeff() * first.maxCoeff() >= 0.0 && std::abs(mean) > 1e-12 * first.cwiseAbs().maxCoeff())
    first /= mean;
  return ns;
}

std::vector<SnapshotSpace> build_snapshots(const GridHierarchy& grid, const FineSystem& sys,
                                           const SnapshotOptions& opts, const std::vector<int>& k_nb) {
  const int n = grid.num_coarse_nodes();
  if (opts.kind == SnapshotKind::Randomized && static_cast<int>(k_nb.size()) != n)
    throw Error("build_snapshots: randomized snapshots need one k_nb per coarse node");
  std::vector<SnapshotSpace> out(n);
  parallel_for(n, [&](int i) {
    out[i] = opts.kind == SnapshotKind::Full ? full_snapshots(grid, sys, i, opts.oversampled)
                                             : randomized_snapshots(grid, sys, i, k_nb[i], opts.p_bf, opts.seed);
  });
  return out;
}

std::vector<NeighborhoodSpace> build_offline_spaces(const GridHierarchy& grid, const FineSystem& sys,
                                                    const PartitionOfUnity& pou,
                                                    const std::vector<SnapshotSpace>& snapshots,
                                                    const std::vector<int>& m_off) {
  const int n = static_cast<int>(snapshots.size());
  if (static_cast<int>(m_off.size()) != n) throw Error("build_offline_spaces: one m_off per neighborhood required");
  std::vector<NeighborhoodSpace> out(n);
  parallel_for(n, [&](int i) { out[i] = offline_eigendecomposition(snapshots[i], grid, sys, pou, m_off[i]); });
  return out;
}

double snapshot_ratio(const GridHierarchy& grid, const std::vector<SnapshotSpace>& snapshots) {
  double used = 0.0, full = 0.0;
  for (const auto& s : snapshots) {
    if (grid.is_boundary_coarse_node(s.omega_id)) continue;
    // Nominal omega_i^+ before clipping to the domain.
    const CellBox& om = grid.neighborhoods[s.omega_id];
    used += static_cast<double>(s.boundary_data.cols());
    full += 2.0 * (om.nx() + om.ny() + 4 * grid.oversampling);
  }
  return full > 0.0 ? used / full : 0.0;
}

}  // namespace fracms
