#include "gratwave/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

namespace gratwave {

namespace {

using Triplet = Eigen::Triplet<double>;
using TripletC = Eigen::Triplet<std::complex<double>>;

std::size_t count_elements(double length, double h) {
  return static_cast<std::size_t>(std::ceil(length / h - 1e-9));
}

}  // namespace

Grid Grid::build(const MetricGraph& g, double h, double truncation) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("grid step must be positive");
  if (!(truncation > 0.0) || !std::isfinite(truncation)) throw InputError("truncation length must be positive");
  if (truncation < 10.0 * h * (1.0 - 1e-12)) throw InputError("truncation length must be at least 10 h");

  Grid grid;
  grid.graph_ = g;
  grid.h_ = h;
  grid.truncation_ = truncation;
  for (const auto& e : g.edges()) {
    if (e.length < 2.0 * h * (1.0 - 1e-12)) throw InputError("edge shorter than 2h: '" + e.name + "'");
    std::size_t n = std::max<std::size_t>(3, count_elements(e.length, h));
    grid.edges_.push_back({e.name, false, e.length, e.length / static_cast<double>(n), std::vector<std::size_t>(n + 1)});
  }
  for (const auto& r : g.half_lines()) {
    std::size_t n = std::max<std::size_t>(10, count_elements(truncation, h));
    grid.edges_.push_back({r.name, true, truncation, truncation / static_cast<double>(n),
                           std::vector<std::size_t>(n + 1)});
  }
  grid.finalize();
  return grid;
}

Grid Grid::refined() const {
  Grid fine = *this;
  fine.h_ = h_ / 2.0;
  for (auto& eg : fine.edges_) {
    std::size_t n = 2 * eg.n_elements();
    eg.step = eg.length / static_cast<double>(n);
    eg.dofs.assign(n + 1, 0);
  }
  fine.finalize();
  return fine;
}

void Grid::finalize() {
  const auto& g = graph_;
  std::size_t next = g.vertices().size();
  const std::size_t nb = g.edges().size();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto& dofs = edges_[e].dofs;
    if (e < nb) {
      dofs.front() = g.edges()[e].v1;
      dofs.back() = g.edges()[e].v2;
    } else {
      dofs.front() = g.half_lines()[e - nb].vertex;
    }
    for (std::size_t k = 1; k + 1 < dofs.size(); ++k) dofs[k] = next++;
  }
  n_free_ = next;
  for (std::size_t e = nb; e < edges_.size(); ++e) edges_[e].dofs.back() = next++;
  n_dofs_ = next;

  elements_.clear();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& eg = edges_[e];
    for (std::size_t k = 0; k < eg.n_elements(); ++k)
      elements_.push_back({eg.dofs[k], eg.dofs[k + 1], eg.step, !eg.half_line, e});
  }
}

Eigen::VectorXd node_weights(const Grid& grid) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n_free()));
  for (const auto& el : grid.elements()) {
    if (grid.is_free(el.a)) w[static_cast<Eigen::Index>(el.a)] += 0.5 * el.length;
    if (grid.is_free(el.b)) w[static_cast<Eigen::Index>(el.b)] += 0.5 * el.length;
  }
  return w;
}

std::vector<double> grid_distances(const Grid& grid, std::size_t source_dof) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(grid.n_dofs());
  for (const auto& el : grid.elements()) {
    adj[el.a].push_back({el.b, el.length});
    adj[el.b].push_back({el.a, el.length});
  }
  std::vector<double> dist(grid.n_dofs(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source_dof] = 0.0;
  queue.push({0.0, source_dof});
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (auto [w, len] : adj[v]) {
      if (d + len < dist[w]) {
        dist[w] = d + len;
        queue.push({dist[w], w});
      }
    }
  }
  return dist;
}

Eigen::VectorXd prolongate(const Grid& coarse, const Grid& fine, const Eigen::VectorXd& u) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fine.n_free()));
  for (std::size_t e = 0; e < coarse.edges().size(); ++e) {
    const auto& ce = coarse.edges()[e];
    const auto& fe = fine.edges()[e];
    if (fe.n_elements() != 2 * ce.n_elements()) throw InputError("prolongate: grids are not nested");
    for (std::size_t k = 0; k < fe.dofs.size(); ++k) {
      std::size_t d = fe.dofs[k];
      if (!fine.is_free(d)) continue;
      double v = (k % 2 == 0) ? dof_value(coarse, u, ce.dofs[k / 2])
                              : 0.5 * (dof_value(coarse, u, ce.dofs[k / 2]) + dof_value(coarse, u, ce.dofs[k / 2 + 1]));
      out[static_cast<Eigen::Index>(d)] = v;
    }
  }
  return out;
}

LaplacianOperators assemble_laplacian(const Grid& grid, double alpha) {
  const auto n = static_cast<Eigen::Index>(grid.n_free());
  std::vector<Triplet> ks, ms, cs;
  ks.reserve(4 * grid.elements().size() + grid.graph().vertices().size());
  ms.reserve(4 * grid.elements().size());
  for (const auto& el : grid.elements()) {
    const std::size_t idx[2] = {el.a, el.b};
    const double k_local[2][2] = {{1.0 / el.length, -1.0 / el.length}, {-1.0 / el.length, 1.0 / el.length}};
    const double m_local[2][2] = {{el.length / 3.0, el.length / 6.0}, {el.length / 6.0, el.length / 3.0}};
    for (int i = 0; i < 2; ++i) {
      if (!grid.is_free(idx[i])) continue;
      for (int j = 0; j < 2; ++j) {
        if (!grid.is_free(idx[j])) continue;
        auto r = static_cast<Eigen::Index>(idx[i]);
        auto c = static_cast<Eigen::Index>(idx[j]);
        ks.emplace_back(r, c, k_local[i][j]);
        ms.emplace_back(r, c, m_local[i][j]);
        if (el.core) cs.emplace_back(r, c, m_local[i][j]);
      }
    }
  }
  if (alpha != 0.0)
    for (std::size_t v = 0; v < grid.graph().vertices().size(); ++v)
      ks.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v), alpha);

  LaplacianOperators ops;
  ops.alpha = alpha;
  ops.stiffness.resize(n, n);
  ops.mass.resize(n, n);
  ops.core_mass.resize(n, n);
  ops.stiffness.setFromTriplets(ks.begin(), ks.end());
  ops.mass.setFromTriplets(ms.begin(), ms.end());
  ops.core_mass.setFromTriplets(cs.begin(), cs.end());
  return ops;
}

DiracOperator assemble_dirac(const Grid& grid, double m, double c) {
  if (!(m > 0.0) || !(c > 0.0)) throw InputError("Dirac operator needs m > 0 and c > 0");
  DiracOperator op;
  op.m = m;
  op.c = c;
  op.n_phi = grid.n_free();
  op.n_chi = grid.elements().size();
  op.weights.resize(static_cast<Eigen::Index>(op.size()));
  op.weights.head(static_cast<Eigen::Index>(op.n_phi)) = node_weights(grid);

  const double rest = m * c * c;
  const std::complex<double> ic(0.0, c);
  std::vector<TripletC> t;
  t.reserve(op.size() + 4 * op.n_chi);
  for (std::size_t i = 0; i < op.n_phi; ++i) {
    auto r = static_cast<Eigen::Index>(i);
    t.emplace_back(r, r, rest * op.weights[r]);
  }
  for (std::size_t k = 0; k < op.n_chi; ++k) {
    const auto& el = grid.elements()[k];
    auto row = static_cast<Eigen::Index>(op.n_phi + k);
    op.weights[row] = el.length;
    t.emplace_back(row, row, -rest * el.length);
    // χ rows: -i c (φ_b - φ_a); φ rows receive the adjoint, i.e. the signed χ flux.
    if (grid.is_free(el.a)) {
      auto a = static_cast<Eigen::Index>(el.a);
      t.emplace_back(row, a, ic);
      t.emplace_back(a, row, std::conj(ic));
    }
    if (grid.is_free(el.b)) {
      auto b = static_cast<Eigen::Index>(el.b);
      t.emplace_back(row, b, -ic);
      t.emplace_back(b, row, std::conj(-ic));
    }
  }
  auto n = static_cast<Eigen::Index>(op.size());
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

void write_coordinate(std::ostream& os, const SparseMatrix& a) {
  os.precision(17);
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_coordinate(std::ostream& os, const SparseMatrixC& a) {
  os.precision(17);
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(a, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
}

}  // namespace gratwave
