#include "gratwave/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace gratwave {

namespace {

using Eigen::Index;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

inline Index idx(std::size_t i) { return static_cast<Index>(i); }

void check_spinor(const NldeProblem& prob, const Spinor& psi) {
  if (psi.phi.size() != idx(prob.op->n_phi) || psi.chi.size() != idx(prob.op->n_chi))
    throw InputError("spinor does not match the problem grid");
}

/// Visits every (φ node, χ element) pair at the ends of core elements with the
/// trapezoid weight h/2. The node is skipped when it is a Dirichlet endpoint.
template <class F>
void for_core_ends(const NldeProblem& prob, F&& f) {
  const Grid& grid = *prob.grid;
  for (std::size_t k = 0; k < grid.elements().size(); ++k) {
    const auto& el = grid.elements()[k];
    if (!el.core) continue;
    f(el.a, k, 0.5 * el.length);
    f(el.b, k, 0.5 * el.length);
  }
}

double weighted_norm2(const VectorXcd& v, const VectorXd& w) {
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += w[i] * std::norm(v[i]);
  return s;
}

double dual_norm2(const VectorXcd& r, const VectorXd& w) {
  double s = 0.0;
  for (Index i = 0; i < r.size(); ++i) s += std::norm(r[i]) / w[i];
  return s;
}

VectorXd to_real(const VectorXcd& z) {
  VectorXd x(2 * z.size());
  x.head(z.size()) = z.real();
  x.tail(z.size()) = z.imag();
  return x;
}

VectorXcd to_complex(const VectorXd& x) {
  const Index n = x.size() / 2;
  VectorXcd z(n);
  for (Index i = 0; i < n; ++i) z[i] = cplx(x[i], x[n + i]);
  return z;
}

/// Number of negative pivots of the LDLᴴ factorization of a quasidefinite
/// Hermitian matrix, i.e. its count of negative eigenvalues.
long negative_inertia(const SparseMatrixC& a) {
  Eigen::SimplicialLDLT<SparseMatrixC> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("LDL factorization failed in the spectral gap check");
  long neg = 0;
  for (Index i = 0; i < ldlt.vectorD().size(); ++i)
    if (ldlt.vectorD()[i].real() < 0.0) ++neg;
  return neg;
}

SparseMatrixC shifted(const DiracOperator& op, double sigma) {
  SparseMatrixC a = op.matrix;
  for (Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) -= sigma * op.weights[i];
  return a;
}

/// Eigenvalues of (K, W) below σ equal the negative inertia of K - σW.
long eigenvalues_in_gap(const DiracOperator& op, double fraction) {
  const double edge = fraction * op.m * op.c * op.c;
  return negative_inertia(shifted(op, edge)) - negative_inertia(shifted(op, -edge));
}

}  // namespace

VectorXcd Spinor::stacked() const {
  VectorXcd z(phi.size() + chi.size());
  z << phi, chi;
  return z;
}

NldeProblem NldeProblem::create(const Grid& grid, double m, double c, double p) {
  if (!(p > 2.0)) throw InputError("exponent p must exceed 2");
  NldeProblem prob;
  prob.grid = std::make_shared<const Grid>(grid);
  prob.op = std::make_shared<const DiracOperator>(assemble_dirac(grid, m, c));
  prob.p = p;
  return prob;
}

Spinor NldeProblem::split(const VectorXcd& psi) const {
  if (psi.size() != idx(op->size())) throw InputError("spinor does not match the problem grid");
  Spinor s;
  s.phi = psi.head(idx(op->n_phi));
  s.chi = psi.tail(idx(op->n_chi));
  s.m = op->m;
  s.c = op->c;
  return s;
}

double power_integral(const NldeProblem& prob, const Spinor& psi) {
  check_spinor(prob, psi);
  const Grid& grid = *prob.grid;
  double total = 0.0;
  for_core_ends(prob, [&](std::size_t node, std::size_t k, double w) {
    double s = std::norm(dof_value(grid, psi.phi, node)) + std::norm(psi.chi[idx(k)]);
    total += w * std::pow(s, 0.5 * prob.p);
  });
  return total;
}

double action(const Spinor& psi, double omega, const NldeProblem& prob) {
  check_spinor(prob, psi);
  VectorXcd z = psi.stacked();
  double quad = z.dot(prob.op->matrix * z).real();
  double mass = weighted_norm2(z, prob.op->weights);
  return 0.5 * quad - 0.5 * omega * mass - power_integral(prob, psi) / prob.p;
}

VectorXcd nlde_residual_vector(const Spinor& psi, double omega, const NldeProblem& prob) {
  check_spinor(prob, psi);
  const auto& op = *prob.op;
  const Grid& grid = *prob.grid;
  VectorXcd z = psi.stacked();
  VectorXcd r = op.matrix * z - omega * op.weights.cwiseProduct(z);
  const double beta = 0.5 * prob.p - 1.0;
  for_core_ends(prob, [&](std::size_t node, std::size_t k, double w) {
    cplx phi = dof_value(grid, psi.phi, node);
    cplx chi = psi.chi[idx(k)];
    double s = std::norm(phi) + std::norm(chi);
    if (s == 0.0) return;
    double f = w * std::pow(s, beta);
    if (grid.is_free(node)) r[idx(node)] -= f * phi;
    r[idx(op.n_phi + k)] -= f * chi;
  });
  return r;
}

double nlde_residual(const Spinor& psi, double omega, const NldeProblem& prob) {
  return std::sqrt(dual_norm2(nlde_residual_vector(psi, omega, prob), prob.op->weights));
}

SparseMatrix nlde_jacobian(const Spinor& psi, double omega, const NldeProblem& prob) {
  check_spinor(prob, psi);
  const auto& op = *prob.op;
  const Grid& grid = *prob.grid;
  const Index n = idx(op.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(4 * op.matrix.nonZeros() + 2 * n + 16 * op.n_chi));
  for (Index k = 0; k < op.matrix.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(op.matrix, k); it; ++it) {
      cplx v = it.value();
      if (it.row() == it.col()) v -= omega * op.weights[it.row()];
      Index i = it.row(), j = it.col();
      if (v.real() != 0.0) {
        t.emplace_back(i, j, v.real());
        t.emplace_back(n + i, n + j, v.real());
      }
      if (v.imag() != 0.0) {
        t.emplace_back(i, n + j, -v.imag());
        t.emplace_back(n + i, j, v.imag());
      }
    }
  const double beta = 0.5 * prob.p - 1.0;
  for_core_ends(prob, [&](std::size_t node, std::size_t k, double w) {
    cplx phi = dof_value(grid, psi.phi, node);
    cplx chi = psi.chi[idx(k)];
    double y[4] = {phi.real(), phi.imag(), chi.real(), chi.imag()};
    double s = std::norm(phi) + std::norm(chi);
    if (s == 0.0) return;
    bool free = grid.is_free(node);
    Index rows[4] = {idx(node), n + idx(node), idx(op.n_phi + k), n + idx(op.n_phi + k)};
    double a = w * std::pow(s, beta);
    double b = 2.0 * beta * w * std::pow(s, beta - 1.0);
    for (int i = 0; i < 4; ++i) {
      if (i < 2 && !free) continue;
      for (int j = 0; j < 4; ++j) {
        if (j < 2 && !free) continue;
        double v = b * y[i] * y[j] + (i == j ? a : 0.0);
        if (v != 0.0) t.emplace_back(rows[i], rows[j], -v);
      }
    }
  });
  SparseMatrix jac(2 * n, 2 * n);
  jac.setFromTriplets(t.begin(), t.end());
  return jac;
}

Spinor lift_from_nls(const NldeProblem& prob, const VectorXd& u, double omega) {
  const Grid& grid = *prob.grid;
  if (u.size() != idx(grid.n_free())) throw InputError("field does not match the problem grid");
  const auto& op = *prob.op;
  Spinor s;
  s.m = op.m;
  s.c = op.c;
  s.phi = u.cast<cplx>();
  s.chi.resize(idx(op.n_chi));
  const cplx factor = -cplx(0.0, op.c) / (omega + op.m * op.c * op.c);
  for (std::size_t k = 0; k < op.n_chi; ++k) {
    const auto& el = grid.elements()[k];
    double du = (dof_value(grid, u, el.b) - dof_value(grid, u, el.a)) / el.length;
    s.chi[idx(k)] = factor * du;
  }
  return s;
}

SpectralGapCertificate certify_spectral_gap(const DiracOperator& op, double fraction, int max_lanczos) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) throw InputError("gap fraction must lie in (0, 1)");
  SpectralGapCertificate cert;
  cert.fraction = fraction;
  cert.eigenvalues_in_gap = eigenvalues_in_gap(op, fraction);
  cert.certified = cert.eigenvalues_in_gap == 0;

  // Lanczos on K⁻¹W, self-adjoint in the W inner product; its extreme Ritz
  // values approach 1/ν for the eigenvalue ν of smallest modulus.
  Eigen::SimplicialLDLT<SparseMatrixC> solver(op.matrix);
  if (solver.info() != Eigen::Success) throw SolverFailure("factorization of the Dirac matrix failed");
  const Index n = idx(op.size());
  const VectorXd& w = op.weights;
  auto inner = [&](const VectorXcd& a, const VectorXcd& b) { return a.dot(w.cwiseProduct(b)); };

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  VectorXcd q(n);
  for (Index i = 0; i < n; ++i) q[i] = cplx(normal(rng), normal(rng));
  q /= std::sqrt(inner(q, q).real());

  const int steps = std::min<int>(max_lanczos, static_cast<int>(n));
  std::vector<VectorXcd> basis;
  std::vector<double> alpha, beta;
  double best = 0.0;
  for (int j = 0; j < steps; ++j) {
    basis.push_back(q);
    VectorXcd r = solver.solve(w.cwiseProduct(q));
    alpha.push_back(inner(q, r).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) r -= inner(v, r) * v;
    double b = std::sqrt(std::max(0.0, inner(r, r).real()));

    const auto m = static_cast<Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    Index top = 0;
    es.eigenvalues().cwiseAbs().maxCoeff(&top);
    best = es.eigenvalues()[top];
    cert.ritz_residual = std::abs(b * es.eigenvectors()(m - 1, top));
    cert.lanczos_steps = j + 1;
    if (b < 1e-14 || cert.ritz_residual < 1e-10 * std::abs(best)) break;
    beta.push_back(b);
    q = r / b;
  }
  cert.min_abs_eigenvalue = 1.0 / std::abs(best);
  // Ritz residual of 1/ν converted to an error estimate on ν.
  cert.ritz_residual *= cert.min_abs_eigenvalue * cert.min_abs_eigenvalue;
  return cert;
}

NldeReport bound_state(const NldeProblem& prob, double omega, const std::optional<Spinor>& seed,
                       const NldeOptions& opts) {
  const auto& op = *prob.op;
  const double rest = op.m * op.c * op.c;
  if (!(std::abs(omega) < rest))
    throw InputError("frequency outside spectral gap: need |omega| < m c^2 = " + std::to_string(rest));
  if (opts.certify_gap) {
    if (eigenvalues_in_gap(op, 0.99) != 0) throw SolverFailure("free Dirac operator has spectrum inside the gap on this grid");
  }

  Spinor psi;
  if (seed) {
    psi = *seed;
    check_spinor(prob, psi);
  } else {
    NlsProblem nls = NlsProblem::create(*prob.grid, prob.p, 1.0, 0.0, 2.0 * op.m);
    double lambda = 2.0 * op.m * (omega - rest);
    psi = lift_from_nls(prob, ground_state_at_frequency(nls, lambda).state, omega);
  }
  psi.m = op.m;
  psi.c = op.c;

  const VectorXd& w = op.weights;
  const Index n = idx(op.size());
  auto norm_w = [&](const Spinor& s) { return std::sqrt(weighted_norm2(s.stacked(), w)); };
  auto merit = [&](const Spinor& s) { return dual_norm2(nlde_residual_vector(s, omega, prob), w); };

  NldeReport rep;
  rep.omega = omega;
  if (norm_w(psi) < opts.collapse) throw SolverFailure("trivial solution: spinor norm vanished");

  double f0 = merit(psi);
  int it = 0;
  for (; it < opts.max_iter && std::sqrt(f0) >= opts.tol; ++it) {
    VectorXcd z = psi.stacked();
    VectorXd gauge = to_real(cplx(0.0, 1.0) * z);
    SparseMatrix jac = nlde_jacobian(psi, omega, prob);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(jac.nonZeros() + 4 * n));
    for (Index k = 0; k < jac.outerSize(); ++k)
      for (SparseMatrix::InnerIterator e(jac, k); e; ++e) t.emplace_back(e.row(), e.col(), e.value());
    for (Index i = 0; i < 2 * n; ++i) {
      if (gauge[i] == 0.0) continue;
      t.emplace_back(i, 2 * n, gauge[i]);
      t.emplace_back(2 * n, i, gauge[i]);
    }
    SparseMatrix border(2 * n + 1, 2 * n + 1);
    border.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(border);
    if (lu.info() != Eigen::Success) throw SolverFailure("Newton stagnation: singular bordered Jacobian");
    VectorXd rhs = VectorXd::Zero(2 * n + 1);
    rhs.head(2 * n) = -to_real(nlde_residual_vector(psi, omega, prob));
    VectorXd delta = lu.solve(rhs);
    if (!delta.allFinite()) throw SolverFailure("Newton stagnation: singular bordered Jacobian");
    VectorXcd dz = to_complex(delta.head(2 * n));

    double step = 1.0;
    Spinor trial;
    double ft = f0;
    for (;;) {
      trial = prob.split(z + step * dz);
      ft = merit(trial);
      if (ft <= (1.0 - 2e-4 * step) * f0) break;
      step *= 0.5;
      if (step < opts.min_step) throw SolverFailure("Newton stagnation: no sufficient decrease of the residual");
    }
    psi = trial;
    f0 = ft;
    if (norm_w(psi) < opts.collapse) throw SolverFailure("trivial solution: spinor norm vanished");
  }

  rep.spinor = psi;
  rep.residual = std::sqrt(f0);
  rep.iterations = it;
  rep.action = action(psi, omega, prob);
  rep.converged = rep.residual < opts.tol;
  return rep;
}

double LimitTable::rate_constant() const {
  if (rows.empty()) return 0.0;
  return rows.back().c * rows.back().chi_phi_ratio;
}

LimitTable nonrel_limit(const Grid& grid, double lambda, double m, double p, const std::vector<double>& schedule,
                        const NldeOptions& opts, const GroundStateOptions& nls_opts) {
  if (!(lambda < 0.0)) throw InputError("nonrelativistic limit needs lambda < 0");
  if (!(m > 0.0)) throw InputError("mass parameter m must be positive");
  if (!(p > 2.0) || !(p < 6.0)) throw InputError("nonrelativistic limit needs p in (2, 6)");
  if (schedule.empty()) throw InputError("empty c schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0)) throw InputError("c values must be positive");
    if (i > 0 && !(schedule[i] > schedule[i - 1])) throw InputError("c schedule must be strictly increasing");
  }

  LimitTable table;
  table.lambda = lambda;
  table.m = m;
  table.p = p;
  NlsProblem nls = NlsProblem::create(grid, p, 1.0, 0.0, 2.0 * m);
  table.target = ground_state_at_frequency(nls, lambda, nls_opts);
  if (!table.target.converged) throw SolverFailure("NLS limit profile did not converge");
  const VectorXd& u = table.target.state;
  const NlsProblem target_prob = nls.with_mass(u.dot(nls.ops->mass * u));
  const SparseMatrix h1 = assemble_laplacian(grid, 0.0).stiffness + nls.ops->mass;

  std::optional<Spinor> prev;
  double prev_omega = 0.0;
  for (double c : schedule) {
    const double omega = m * c * c + lambda / (2.0 * m);
    NldeProblem prob = NldeProblem::create(grid, m, c, p);
    Spinor seed;
    if (prev) {
      seed = *prev;
      seed.chi *= (c / prev->c) * (prev_omega + m * prev->c * prev->c) / (omega + m * c * c);
    } else {
      seed = lift_from_nls(prob, u, omega);
    }
    NldeReport rep;
    try {
      rep = bound_state(prob, omega, seed, opts);
      if (!rep.converged) throw SolverFailure("bound state did not converge at c = " + std::to_string(c));
    } catch (const SolverFailure& e) {
      table.failure = e.what();
      return table;
    }

    const Spinor& s = rep.spinor;
    // Align the global phase of φ with the real profile u.
    cplx overlap = s.phi.dot(nls.ops->mass.cast<cplx>() * u.cast<cplx>());
    cplx phase = std::abs(overlap) > 0.0 ? std::conj(overlap) / std::abs(overlap) : cplx(1.0);
    VectorXcd phi = s.phi * std::conj(phase);
    VectorXd phi_re = phi.real();
    VectorXd diff = phi_re - u;
    double imag2 = phi.imag().dot(h1 * phi.imag());

    LimitRow row;
    row.c = c;
    row.omega = omega;
    row.chi_l2 = std::sqrt(weighted_norm2(s.chi, prob.op->weights.tail(idx(prob.op->n_chi))));
    double phi_l2 = std::sqrt(weighted_norm2(s.phi, prob.op->weights.head(idx(prob.op->n_phi))));
    row.chi_phi_ratio = phi_l2 > 0.0 ? row.chi_l2 / phi_l2 : 0.0;
    row.phi_minus_u_h1 = std::sqrt(diff.dot(h1 * diff) + imag2);
    row.nlse_residual = residual(phi_re, lambda, target_prob);
    row.iterations = rep.iterations;
    table.rows.push_back(row);

    prev = s;
    prev_omega = omega;
  }
  table.complete = true;
  return table;
}

void write_limit_csv(std::ostream& os, const LimitTable& table) {
  os << "c,omega,chi_l2,phi_minus_u_h1,nlse_residual\n";
  char buf[160];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%.17g,%.17g\n", r.c, r.omega, r.chi_l2, r.phi_minus_u_h1,
                  r.nlse_residual);
    os << buf;
  }
}

}  // namespace gratwave
