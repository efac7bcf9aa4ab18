#include "gratwave/nls.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "gratwave/gn.hpp"

namespace gratwave {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

inline Index idx(std::size_t i) { return static_cast<Index>(i); }

inline bool in_region(const Element& el, Region region) { return region == Region::Whole || el.core; }

// |x|^{p-2} x
inline double spow(double x, double p) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), p - 2.0) * x; }

inline double apow(double x, double q) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), q); }

void check_size(const NlsProblem& prob, Index n) {
  if (n != idx(prob.grid->n_free())) throw InputError("field does not match the problem grid");
}

double quad(const VectorXd& u, const SparseMatrix& a) { return u.dot(a * u); }

VectorXd normalized(const VectorXd& u, const SparseMatrix& mass, double mu) {
  double m = quad(u, mass);
  return u * std::sqrt(mu / m);
}

/// [[H, -Mu], [-(Mu)ᵀ, 0]] with H = S - κ J_f - λ M.
SparseMatrix bordered_jacobian(const NlsProblem& prob, const VectorXd& u, double lambda) {
  const auto& ops = *prob.ops;
  SparseMatrix h = ops.stiffness - prob.coupling * power_hessian(*prob.grid, u, prob.p) - lambda * ops.mass;
  VectorXd mu = ops.mass * u;
  const Index n = u.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(h.nonZeros() + 2 * n));
  for (Index k = 0; k < h.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index i = 0; i < n; ++i) {
    if (mu[i] == 0.0) continue;
    t.emplace_back(i, n, -mu[i]);
    t.emplace_back(n, i, -mu[i]);
  }
  SparseMatrix j(n + 1, n + 1);
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

VectorXd weak_residual(const NlsProblem& prob, const VectorXd& u, double lambda) {
  const auto& ops = *prob.ops;
  return ops.stiffness * u - prob.coupling * power_gradient(*prob.grid, u, prob.p) - lambda * (ops.mass * u);
}

/// sqrt(rᵀ M⁻¹ r) with a prefactored mass matrix.
double dual_norm(const Eigen::SimplicialLDLT<SparseMatrix>& mass_solver, const VectorXd& r) {
  VectorXd z = mass_solver.solve(r);
  return std::sqrt(std::max(0.0, r.dot(z)));
}

}  // namespace

double power_integral(const Grid& grid, const VectorXd& u, double p, Region region) {
  double total = 0.0;
  for (const auto& el : grid.elements()) {
    if (!in_region(el, region)) continue;
    double a = dof_value(grid, u, el.a), b = dof_value(grid, u, el.b);
    double m = 0.5 * (a + b);
    total += el.length / 6.0 * (apow(a, p) + 4.0 * apow(m, p) + apow(b, p));
  }
  return total;
}

double power_integral(const Grid& grid, const Eigen::VectorXcd& u, double p, Region region) {
  double total = 0.0;
  for (const auto& el : grid.elements()) {
    if (!in_region(el, region)) continue;
    auto a = dof_value(grid, u, el.a), b = dof_value(grid, u, el.b);
    total += el.length / 6.0 * (apow(std::abs(a), p) + 4.0 * apow(std::abs(0.5 * (a + b)), p) + apow(std::abs(b), p));
  }
  return total;
}

VectorXd power_gradient(const Grid& grid, const VectorXd& u, double p, Region region) {
  VectorXd f = VectorXd::Zero(u.size());
  for (const auto& el : grid.elements()) {
    if (!in_region(el, region)) continue;
    double a = dof_value(grid, u, el.a), b = dof_value(grid, u, el.b);
    double m = spow(0.5 * (a + b), p);
    double w = el.length / 6.0;
    if (grid.is_free(el.a)) f[idx(el.a)] += w * (spow(a, p) + 2.0 * m);
    if (grid.is_free(el.b)) f[idx(el.b)] += w * (spow(b, p) + 2.0 * m);
  }
  return f;
}

SparseMatrix power_hessian(const Grid& grid, const VectorXd& u, double p, Region region) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * grid.elements().size());
  for (const auto& el : grid.elements()) {
    if (!in_region(el, region)) continue;
    double a = dof_value(grid, u, el.a), b = dof_value(grid, u, el.b);
    double w = el.length / 6.0 * (p - 1.0);
    double mq = apow(0.5 * (a + b), p - 2.0);
    bool fa = grid.is_free(el.a), fb = grid.is_free(el.b);
    if (fa) t.emplace_back(idx(el.a), idx(el.a), w * (apow(a, p - 2.0) + mq));
    if (fb) t.emplace_back(idx(el.b), idx(el.b), w * (apow(b, p - 2.0) + mq));
    if (fa && fb) {
      t.emplace_back(idx(el.a), idx(el.b), w * mq);
      t.emplace_back(idx(el.b), idx(el.a), w * mq);
    }
  }
  SparseMatrix h(idx(grid.n_free()), idx(grid.n_free()));
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

NlsProblem NlsProblem::create(const Grid& grid, double p, double mass, double alpha, double coupling) {
  if (!(p > 2.0) || p > 6.0) throw InputError("exponent p must lie in (2, 6]");
  if (!(mass > 0.0)) throw InputError("mass must be positive");
  if (!(coupling > 0.0)) throw InputError("nonlinear coupling must be positive");
  NlsProblem prob;
  prob.grid = std::make_shared<const Grid>(grid);
  prob.ops = std::make_shared<const LaplacianOperators>(assemble_laplacian(grid, alpha));
  prob.p = p;
  prob.mass = mass;
  prob.coupling = coupling;
  return prob;
}

NlsProblem NlsProblem::with_mass(double mu) const {
  if (!(mu > 0.0)) throw InputError("mass must be positive");
  NlsProblem copy = *this;
  copy.mass = mu;
  return copy;
}

double energy(const VectorXd& u, const NlsProblem& prob) {
  check_size(prob, u.size());
  return 0.5 * quad(u, prob.ops->stiffness) - prob.coupling / prob.p * power_integral(*prob.grid, u, prob.p);
}

double energy(const Eigen::VectorXcd& u, const NlsProblem& prob) {
  check_size(prob, u.size());
  double kinetic = u.dot(prob.ops->stiffness.cast<std::complex<double>>() * u).real();
  return 0.5 * kinetic - prob.coupling / prob.p * power_integral(*prob.grid, u, prob.p);
}

double field_mass(const VectorXd& u, const NlsProblem& prob) {
  check_size(prob, u.size());
  return quad(u, prob.ops->mass);
}

double lagrange_multiplier(double kinetic, double core_power, double mu, double coupling) {
  if (!(mu > 0.0)) throw InputError("Lagrange multiplier of a zero-mass field");
  return (kinetic - coupling * core_power) / mu;
}

double lagrange_multiplier(const VectorXd& u, const NlsProblem& prob) {
  check_size(prob, u.size());
  return lagrange_multiplier(quad(u, prob.ops->stiffness), power_integral(*prob.grid, u, prob.p),
                             quad(u, prob.ops->mass), prob.coupling);
}

double lagrange_multiplier(const Eigen::VectorXcd& u, const NlsProblem& prob) {
  check_size(prob, u.size());
  auto s = prob.ops->stiffness.cast<std::complex<double>>();
  auto m = prob.ops->mass.cast<std::complex<double>>();
  return lagrange_multiplier(u.dot(s * u).real(), power_integral(*prob.grid, u, prob.p), u.dot(m * u).real(),
                             prob.coupling);
}

double residual(const VectorXd& u, double lambda, const NlsProblem& prob) {
  check_size(prob, u.size());
  Eigen::SimplicialLDLT<SparseMatrix> mass_solver(prob.ops->mass);
  return dual_norm(mass_solver, weak_residual(prob, u, lambda));
}

VectorXd default_seed(const NlsProblem& prob) {
  const Grid& grid = *prob.grid;
  VectorXd u = interpolate(grid, [&](std::size_t e, double x) { return grid.edges()[e].half_line ? std::exp(-x) : 1.0; });
  return normalized(u, prob.ops->mass, prob.mass);
}

SolverReport ground_state(const NlsProblem& prob, const std::optional<VectorXd>& seed, const GroundStateOptions& opts) {
  const Grid& grid = *prob.grid;
  const auto& ops = *prob.ops;
  const double mu = prob.mass;

  if (prob.p >= 6.0 - 1e-12) {
    double mu_k = opts.critical_mass ? *opts.critical_mass
                                     : critical_mass(gn_constant(grid.graph(), 6.0, GnVariant::CoreRestricted,
                                                                 {.h = grid.h(), .truncation = grid.truncation()})
                                                         .value);
    if (mu >= (1.0 + opts.critical_margin) * mu_k)
      throw RefusedRegime("unbounded regime: mass " + std::to_string(mu) + " is not below the estimated critical mass " +
                          std::to_string(mu_k));
  }

  VectorXd u = seed ? *seed : default_seed(prob);
  check_size(prob, u.size());
  if (quad(u, ops.mass) <= 0.0) throw InputError("seed has zero mass");
  u = normalized(u, ops.mass, mu);

  SolverReport rep;
  SparseMatrix precond = ops.stiffness + opts.preconditioner_shift * ops.mass;
  Eigen::SimplicialLDLT<SparseMatrix> psolver(precond);
  Eigen::SimplicialLDLT<SparseMatrix> mass_solver(ops.mass);
  if (psolver.info() != Eigen::Success || mass_solver.info() != Eigen::Success)
    throw SolverFailure("factorization of the flow preconditioner failed");

  double e = energy(u, prob);
  rep.energy_trace.push_back(e);
  double tau = 1.0;
  VectorXd prev_u, prev_pd;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    VectorXd g = ops.stiffness * u - prob.coupling * power_gradient(grid, u, prob.p);
    VectorXd mu_vec = ops.mass * u;
    VectorXd z = psolver.solve(g);
    VectorXd w = psolver.solve(mu_vec);
    VectorXd d = z - (mu_vec.dot(z) / mu_vec.dot(w)) * w;
    double gd = g.dot(d);
    if (std::sqrt(std::max(gd, 0.0)) < opts.flow_tol) break;

    VectorXd pd = precond * d;
    if (prev_u.size() == u.size()) {
      VectorXd s = u - prev_u;
      double num = s.dot(precond * s);
      double den = s.dot(pd - prev_pd);
      tau = den > 0.0 ? std::clamp(num / den, 1e-6, 1e3) : std::min(2.0 * tau, 1e3);
    }

    double step = tau;
    VectorXd trial;
    double e_trial = e;
    for (;;) {
      trial = normalized(u - step * d, ops.mass, mu);
      e_trial = energy(trial, prob);
      if (e_trial <= e - 1e-4 * step * gd) break;
      step *= 0.5;
      if (step < 1e-14) {
        // No descent left at rounding level: the flow has stalled.
        if (gd < 1e-20 || std::abs(e_trial - e) <= 1e-14 * std::max(1.0, std::abs(e))) break;
        throw SolverFailure("energy not decreasing along the normalized flow (line search failed)");
      }
    }
    prev_u = u;
    prev_pd = pd;
    u = trial;
    e = e_trial;
    rep.energy_trace.push_back(e);
    rep.max_mass_drift = std::max(rep.max_mass_drift, std::abs(quad(u, ops.mass) - mu));
  }
  rep.iterations = it;

  double lambda = lagrange_multiplier(u, prob);
  double res = dual_norm(mass_solver, weak_residual(prob, u, lambda));
  bool ok = res < opts.tol;
  if (opts.polish && !ok && it < opts.max_iter) {
    auto merit = [&](const VectorXd& v, double lam) {
      double c = quad(v, ops.mass) - mu;
      return std::hypot(dual_norm(mass_solver, weak_residual(prob, v, lam)), 0.5 * c);
    };
    double current = merit(u, lambda);
    for (int k = 0; k < opts.newton_max; ++k) {
      VectorXd r = weak_residual(prob, u, lambda);
      VectorXd rhs(u.size() + 1);
      rhs.head(u.size()) = -r;
      rhs[u.size()] = 0.5 * (quad(u, ops.mass) - mu);
      Eigen::SparseLU<SparseMatrix> lu;
      lu.compute(bordered_jacobian(prob, u, lambda));
      if (lu.info() != Eigen::Success) break;
      VectorXd delta = lu.solve(rhs);
      double t = 1.0;
      VectorXd cand;
      double lam_cand = lambda;
      double m_cand = current;
      for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
        cand = u + t * delta.head(u.size());
        lam_cand = lambda + t * delta[u.size()];
        m_cand = merit(cand, lam_cand);
        if (m_cand < current) break;
      }
      ++rep.newton_iterations;
      if (!(m_cand < current)) break;
      u = cand;
      lambda = lam_cand;
      current = m_cand;
      u = normalized(u, ops.mass, mu);
      res = dual_norm(mass_solver, weak_residual(prob, u, lambda));
      if (res < opts.tol) {
        ok = true;
        break;
      }
    }
  }

  if (u.sum() < 0.0) u = -u;
  rep.state = u;
  rep.energy = energy(u, prob);
  rep.lagrange = lagrange_multiplier(u, prob);
  rep.residual = dual_norm(mass_solver, weak_residual(prob, u, rep.lagrange));
  rep.iterations += rep.newton_iterations;
  rep.converged = ok && rep.residual < std::max(opts.tol, 10.0 * res) &&
                  std::abs(quad(u, ops.mass) - mu) <= opts.constraint_tol * std::max(1.0, mu);
  return rep;
}

SolverReport ground_state_at_frequency(const NlsProblem& prob, double lambda, const GroundStateOptions& opts) {
  if (!(lambda < 0.0)) throw InputError("ground states at fixed frequency need lambda < 0");
  if (prob.p >= 6.0) throw InputError("fixed-frequency ground states need p < 6");

  // λ(μ) of the ground state decreases with μ; bracket in log μ, then regula falsi.
  std::optional<VectorXd> warm;
  auto solve_at = [&](double mu) {
    SolverReport r = ground_state(prob.with_mass(mu), warm, opts);
    warm = r.state;
    return r;
  };

  double lo = prob.mass, hi = prob.mass;
  SolverReport rep = solve_at(lo);
  double lam_lo = rep.lagrange, lam_hi = rep.lagrange;
  for (int k = 0; lam_hi > lambda; ++k) {
    if (k == 60) throw SolverFailure("could not bracket the target frequency");
    lo = hi;
    lam_lo = lam_hi;
    hi *= 2.0;
    rep = solve_at(hi);
    lam_hi = rep.lagrange;
  }
  for (int k = 0; lam_lo <= lambda; ++k) {
    if (k == 60) throw SolverFailure("could not bracket the target frequency");
    hi = lo;
    lam_hi = lam_lo;
    lo *= 0.5;
    rep = solve_at(lo);
    lam_lo = rep.lagrange;
  }

  double a = std::log(lo), b = std::log(hi);
  int side = 0;
  for (int k = 0; k < 60 && std::abs(rep.lagrange - lambda) > 1e-6 * std::abs(lambda); ++k) {
    double fa = lam_lo - lambda, fb = lam_hi - lambda;
    double x = (a * fb - b * fa) / (fb - fa);
    rep = solve_at(std::exp(x));
    double fx = rep.lagrange - lambda;
    if (fx > 0.0) {
      a = x;
      lam_lo = rep.lagrange;
      if (side == -1) lam_hi = lambda + 0.5 * (lam_hi - lambda);
      side = -1;
    } else {
      b = x;
      lam_hi = rep.lagrange;
      if (side == 1) lam_lo = lambda + 0.5 * (lam_lo - lambda);
      side = 1;
    }
  }

  // Newton at fixed λ to hit the frequency exactly.
  const auto& ops = *prob.ops;
  Eigen::SimplicialLDLT<SparseMatrix> mass_solver(ops.mass);
  VectorXd u = rep.state;
  double res = dual_norm(mass_solver, weak_residual(prob, u, lambda));
  int newton = 0;
  for (; newton < opts.newton_max && res >= opts.tol; ++newton) {
    SparseMatrix jac = ops.stiffness - prob.coupling * power_hessian(*prob.grid, u, prob.p) - lambda * ops.mass;
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) break;
    VectorXd delta = lu.solve(-weak_residual(prob, u, lambda));
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
      VectorXd cand = u + t * delta;
      double rc = dual_norm(mass_solver, weak_residual(prob, cand, lambda));
      if (rc < res) {
        u = cand;
        res = rc;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  NlsProblem fin = prob.with_mass(quad(u, ops.mass));
  SolverReport out;
  out.state = u.sum() < 0.0 ? VectorXd(-u) : u;
  out.energy = energy(out.state, fin);
  out.lagrange = lambda;
  out.residual = res;
  out.iterations = rep.iterations + newton;
  out.newton_iterations = rep.newton_iterations + newton;
  out.converged = res < opts.tol;
  return out;
}

}  // namespace gratwave
