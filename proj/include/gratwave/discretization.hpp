#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gratwave/graph.hpp"

namespace gratwave {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseMatrixC = Eigen::SparseMatrix<std::complex<double>>;

/// Uniform grid on one bounded edge or one truncated half-line.
struct EdgeGrid {
  std::string name;
  bool half_line = false;
  double length = 0.0;  // ℓ_e, or the truncation length for half-lines
  double step = 0.0;
  std::vector<std::size_t> dofs;  // one per node, x = k * step

  std::size_t n_elements() const { return dofs.size() - 1; }
};

/// One P1 element: nodes `a` (smaller x) and `b`.
struct Element {
  std::size_t a;
  std::size_t b;
  double length;
  bool core;
  std::size_t edge;
};

/// Per-edge uniform grids with one shared degree of freedom per graph vertex.
///
/// Dof ordering is fixed: graph vertices (sorted by name), then interior nodes of
/// bounded edges edge by edge, then interior nodes of half-lines, and finally the
/// artificial far endpoints of truncated half-lines. The far endpoints carry a
/// homogeneous Dirichlet condition, so fields and operators live on the leading
/// `n_free()` dofs only.
class Grid {
 public:
  /// Steps are adjusted per edge to divide the length exactly without exceeding
  /// `h`; every bounded edge gets at least two interior nodes.
  static Grid build(const MetricGraph& g, double h, double truncation);

  /// Same graph with every element split in two, so P1 spaces are nested.
  Grid refined() const;

  const MetricGraph& graph() const { return graph_; }
  double h() const { return h_; }
  double truncation() const { return truncation_; }
  const std::vector<EdgeGrid>& edges() const { return edges_; }
  const std::vector<Element>& elements() const { return elements_; }
  std::size_t n_dofs() const { return n_dofs_; }
  std::size_t n_free() const { return n_free_; }
  bool is_free(std::size_t dof) const { return dof < n_free_; }

 private:
  Grid() = default;
  void finalize();

  MetricGraph graph_;
  double h_ = 0.0;
  double truncation_ = 0.0;
  std::vector<EdgeGrid> edges_;  // bounded edges first, then half-lines
  std::vector<Element> elements_;
  std::size_t n_dofs_ = 0;
  std::size_t n_free_ = 0;
};

/// Value of a free-dof field at any dof (zero on Dirichlet endpoints).
template <class Vec>
auto dof_value(const Grid& grid, const Vec& u, std::size_t dof) {
  using Scalar = typename Vec::Scalar;
  return grid.is_free(dof) ? u[static_cast<Eigen::Index>(dof)] : Scalar(0);
}

/// Samples f(edge index, x) at every free dof. Vertex dofs take the value from
/// the first edge that touches them.
template <class F>
Eigen::VectorXd interpolate(const Grid& grid, F&& f) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n_free()));
  std::vector<bool> seen(grid.n_free(), false);
  for (std::size_t e = 0; e < grid.edges().size(); ++e) {
    const auto& eg = grid.edges()[e];
    for (std::size_t k = 0; k < eg.dofs.size(); ++k) {
      std::size_t d = eg.dofs[k];
      if (!grid.is_free(d) || seen[d]) continue;
      seen[d] = true;
      u[static_cast<Eigen::Index>(d)] = f(e, static_cast<double>(k) * eg.step);
    }
  }
  return u;
}

/// Lumped (dual cell) weight of every free node: half the adjacent element lengths.
Eigen::VectorXd node_weights(const Grid& grid);

/// Shortest-path distance along the grid from `source_dof` to every dof.
std::vector<double> grid_distances(const Grid& grid, std::size_t source_dof);

/// Prolongates a field on `coarse` to `coarse.refined()` by linear interpolation.
Eigen::VectorXd prolongate(const Grid& coarse, const Grid& fine, const Eigen::VectorXd& u);

struct LaplacianOperators {
  SparseMatrix stiffness;  // ∫ u'v' plus the vertex coupling α Σ u(v)v(v)
  SparseMatrix mass;       // ∫ uv over the truncated graph
  SparseMatrix core_mass;  // ∫ uv over bounded edges only
  double alpha = 0.0;
};

/// P1 finite elements with δ-type coupling of strength `alpha` at every vertex;
/// alpha = 0 is the Kirchhoff Laplacian.
LaplacianOperators assemble_laplacian(const Grid& grid, double alpha = 0.0);

/// Staggered Kirchhoff-type Dirac operator D = -i c σ1 d/dx + m c² σ3.
///
/// The upper component φ lives on the free nodes (continuous at vertices by dof
/// sharing), the lower component χ on element midpoints. `matrix` is the
/// Hermitian form W·D for the diagonal weight W (lumped node weights for φ,
/// element lengths for χ), so eigenpairs of D solve matrix·ψ = ν W ψ. The
/// signed vertex sum of χ enters the φ rows at vertices as a discrete flux balance.
struct DiracOperator {
  SparseMatrixC matrix;
  Eigen::VectorXd weights;
  std::size_t n_phi = 0;
  std::size_t n_chi = 0;
  double m = 0.0;
  double c = 0.0;

  std::size_t size() const { return n_phi + n_chi; }
};

DiracOperator assemble_dirac(const Grid& grid, double m, double c);

/// Coordinate text dump, one "row col value" triple per line (0-based).
void write_coordinate(std::ostream& os, const SparseMatrix& a);
/// Complex variant: "row col re im".
void write_coordinate(std::ostream& os, const SparseMatrixC& a);

}  // namespace gratwave
