#pragma once

// Lumped mass, the two nonlinear-coefficient stiffness variants, lumped
// velocity weights and the SPD solve used inside Newton.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pme/error.hpp"
#include "pme/mesh.hpp"

namespace pme {

using Vector = Eigen::VectorXd;
/// Diagonal of a lumped (mass or velocity) matrix.
using LumpedVector = Eigen::VectorXd;
/// Per-vertex activity flags; an empty mask means every entry is active.
using ActiveMask = std::vector<std::uint8_t>;

/// Symmetric sparse matrix in full (both triangles) column-major storage.
class SparseSymMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double>;

  SparseSymMatrix() = default;
  explicit SparseSymMatrix(Storage m) : m_(std::move(m)) {}

  Eigen::Index size() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_.coeff(i, j); }
  const Storage& storage() const { return m_; }
  Vector operator*(const Vector& x) const { return m_ * x; }
  Vector diagonal() const { return m_.diagonal(); }

 private:
  Storage m_;
};

namespace detail {

/// Accumulates symmetric off-diagonal couplings once per unordered pair and
/// closes each row with diagonal = -(sum of off-diagonals), so constants lie in
/// the kernel to rounding.
class PairAssembler {
 public:
  explicit PairAssembler(std::size_t n) : n_(n), rowsum_(n, 0.0) {}

  void add(int i, int j, double value) {
    if (i == j || value == 0.0) return;
    triplets_.emplace_back(i, j, value);
    triplets_.emplace_back(j, i, value);
    rowsum_[i] += value;
    rowsum_[j] += value;
  }

  SparseSymMatrix finish() {
    for (std::size_t i = 0; i < n_; ++i)
      if (rowsum_[i] != 0.0) triplets_.emplace_back(static_cast<int>(i), static_cast<int>(i), -rowsum_[i]);
    SparseSymMatrix::Storage m(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    m.setFromTriplets(triplets_.begin(), triplets_.end());
    m.makeCompressed();
    return SparseSymMatrix(std::move(m));
  }

 private:
  std::size_t n_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<double> rowsum_;
};

inline bool is_active(std::span<const std::uint8_t> mask, std::size_t i) { return mask.empty() || mask[i] != 0; }

/// Gradients of the nodal basis of cell k evaluated at local vertex q.
/// For simplices the gradients are constant and q is ignored.
inline std::array<Point, 4> basis_gradients(const Mesh& mesh, std::size_t k, int q) {
  const auto& c = mesh.cells[k];
  const auto& X = mesh.vertices;
  std::array<Point, 4> g{};
  switch (mesh.kind) {
    case CellKind::interval: {
      const double h = mesh.cell_volume[k];
      g[0] = {-1.0 / h, 0.0};
      g[1] = {1.0 / h, 0.0};
      break;
    }
    case CellKind::triangle: {
      const double two_area = 2.0 * mesh.cell_volume[k];
      for (int i = 0; i < 3; ++i) {
        const Point& a = X[c[(i + 1) % 3]];
        const Point& b = X[c[(i + 2) % 3]];
        g[i] = {(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area};
      }
      break;
    }
    case CellKind::quad: {
      const double hx = X[c[1]][0] - X[c[0]][0];
      const double hy = X[c[3]][1] - X[c[0]][1];
      static constexpr double xi[4] = {0.0, 1.0, 1.0, 0.0};
      static constexpr double eta[4] = {0.0, 0.0, 1.0, 1.0};
      const double s = xi[q], t = eta[q];
      g[0] = {-(1.0 - t) / hx, -(1.0 - s) / hy};
      g[1] = {(1.0 - t) / hx, -s / hy};
      g[2] = {t / hx, s / hy};
      g[3] = {-t / hx, (1.0 - s) / hy};
      break;
    }
  }
  return g;
}

}  // namespace detail

/// Vertex-based (lumped) mass: |S_i|/(d+1) on simplices, |K|/4 per vertex on quads.
inline LumpedVector lumped_mass(const Mesh& mesh) {
  LumpedVector M = LumpedVector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  const int nv = mesh.nodes_per_cell();
  for (std::size_t k = 0; k < mesh.num_cells(); ++k)
    for (int v : mesh.cell(k)) M[v] += mesh.cell_volume[k] / nv;
  return M;
}

/// Harmonic average of gamma = m exp(m u) along an edge on which u is linear,
/// i.e. [ (1/|E|) \int_E exp(-m u)/m ds ]^{-1}, in closed form.
inline double harmonic_edge_average(double ui, double uj, double m) {
  constexpr double branch_eps = 1e-10;
  const double delta = std::abs(ui - uj);
  if (delta <= branch_eps) return m * std::exp(0.5 * m * (ui + uj));
  // m^2 (uj - ui) / (exp(-m ui) - exp(-m uj)), factored around the smaller endpoint.
  const double lo = std::min(ui, uj);
  const double x = m * delta;
  return m * std::exp(m * lo) * (x / -std::expm1(-x));
}

/// Edge-based stiffness  A = sum_E omega_E * gamma~_E * (e_i - e_j)(e_i - e_j)^T
/// with cotangent weights on triangles and 1/|K| on intervals.  Edges with an
/// inactive endpoint contribute nothing.
inline SparseSymMatrix stiffness_edge_based(const Mesh& mesh, const EdgeGeometry& geom, std::span<const double> u_prev,
                                            double m, std::span<const std::uint8_t> active = {}) {
  if (mesh.kind == CellKind::quad) throw InvalidArgument("edge-based stiffness requires a simplicial mesh");
  detail::PairAssembler asmb(mesh.num_vertices());
  auto edge = [&](int i, int j, double w) {
    if (!detail::is_active(active, i) || !detail::is_active(active, j)) return;
    asmb.add(i, j, -w * harmonic_edge_average(u_prev[i], u_prev[j], m));
  };
  if (mesh.kind == CellKind::interval) {
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) edge(mesh.cells[k][0], mesh.cells[k][1], 1.0 / mesh.cell_volume[k]);
  } else {
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) edge(mesh.faces[f].vertices[0], mesh.faces[f].vertices[1], geom.omega[f]);
  }
  return asmb.finish();
}

/// Stiffness with the coefficient gamma = m exp(m u) integrated by the vertex
/// (mass-lumping) rule: |K|/(d+1) * sum_v gamma(v) * grad phi_i . grad phi_j on
/// simplices, the tensor trapezoidal rule on quads.  Inactive vertices carry gamma = 0.
inline SparseSymMatrix stiffness_vertex_quadrature(const Mesh& mesh, std::span<const double> u_prev, double m,
                                                   std::span<const std::uint8_t> active = {}) {
  detail::PairAssembler asmb(mesh.num_vertices());
  const int nv = mesh.nodes_per_cell();
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    auto c = mesh.cell(k);
    std::array<double, 4> gamma{};
    for (int l = 0; l < nv; ++l) gamma[l] = detail::is_active(active, c[l]) ? m * std::exp(m * u_prev[c[l]]) : 0.0;
    const double w = mesh.cell_volume[k] / nv;
    if (mesh.kind == CellKind::quad) {
      for (int q = 0; q < 4; ++q) {
        if (gamma[q] == 0.0) continue;
        auto g = detail::basis_gradients(mesh, k, q);
        for (int i = 0; i < 4; ++i)
          for (int j = i + 1; j < 4; ++j)
            asmb.add(c[i], c[j], w * gamma[q] * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
      }
    } else {
      double gsum = 0.0;
      for (int l = 0; l < nv; ++l) gsum += gamma[l];
      if (gsum == 0.0) continue;
      auto g = detail::basis_gradients(mesh, k, 0);
      for (int i = 0; i < nv; ++i)
        for (int j = i + 1; j < nv; ++j) asmb.add(c[i], c[j], w * gsum * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
    }
  }
  return asmb.finish();
}

/// Diagonal of the lumped lowest-order Raviart-Thomas velocity mass matrix for
/// the normal-component degrees of freedom.  Intervals and quads: sum of |K|/2.
/// Triangles: sum of cot(theta)/2 scaled by |E|^2, the conversion from the
/// flux-normalised cotangent rule to normal-component unknowns.
inline LumpedVector velocity_lumped_weights(const Mesh& mesh, const EdgeGeometry& geom) {
  LumpedVector w(static_cast<Eigen::Index>(mesh.num_faces()));
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const double len = mesh.faces[f].measure;
    w[f] = mesh.kind == CellKind::triangle ? geom.omega[f] * len * len : geom.omega[f];
  }
  return w;
}

/// Solves (diag(shift) + A) x = rhs for a symmetric positive definite system.
/// Jacobi-scaled sparse LDL^T followed by iterative refinement.  Throws
/// SolverError when the system is singular.
inline Vector spd_solve(const SparseSymMatrix& A, const LumpedVector& shift, const Vector& rhs) {
  const Eigen::Index n = A.size();
  if (shift.size() != n || rhs.size() != n) throw InvalidArgument("spd_solve: dimension mismatch");
  if (n == 0) return Vector();
  SparseSymMatrix::Storage S = A.storage();
  for (Eigen::Index i = 0; i < n; ++i) S.coeffRef(i, i) += shift[i];
  Vector d = S.diagonal();
  Vector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(d[i] > 0.0) || !std::isfinite(d[i])) throw SolverError("spd_solve: singular system (non-positive diagonal)");
    scale[i] = 1.0 / std::sqrt(d[i]);
  }
  SparseSymMatrix::Storage Ss = scale.asDiagonal() * S * scale.asDiagonal();
  Eigen::SimplicialLDLT<SparseSymMatrix::Storage> ldlt(Ss);
  if (ldlt.info() != Eigen::Success) throw SolverError("spd_solve: factorization failed");
  const Vector& D = ldlt.vectorD();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(D[i] > 1e-14)) throw SolverError("spd_solve: singular system (vanishing pivot)");

  // Refinement on the unscaled residual, accumulated in extended precision.
  auto residual = [&](const Vector& x) {
    Vector r(n);
    std::vector<long double> acc(rhs.data(), rhs.data() + n);
    for (Eigen::Index j = 0; j < S.outerSize(); ++j)
      for (SparseSymMatrix::Storage::InnerIterator it(S, j); it; ++it)
        acc[it.row()] -= static_cast<long double>(it.value()) * x[j];
    for (Eigen::Index i = 0; i < n; ++i) r[i] = static_cast<double>(acc[i]);
    return r;
  };
  Vector x = scale.cwiseProduct(ldlt.solve(scale.cwiseProduct(rhs)));
  const double target = 1e-13 * rhs.norm();
  for (int sweep = 0; sweep < 10; ++sweep) {
    const Vector r = residual(x);
    if (r.norm() <= target) break;
    x += scale.cwiseProduct(ldlt.solve(scale.cwiseProduct(r)));
  }
  return x;
}

}  // namespace pme
