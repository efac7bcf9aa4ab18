#include "gratwave/gn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "gratwave/nls.hpp"

namespace gratwave {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Region region_of(GnVariant v) { return v == GnVariant::CoreRestricted ? Region::Core : Region::Whole; }

/// log of the power-type quotient and its gradient; 0-homogeneous in u.
class LogQuotient {
 public:
  LogQuotient(const Grid& grid, const LaplacianOperators& ops, double p, Region region)
      : grid_(grid), ops_(ops), p_(p), region_(region), a_((p - 2.0) / 4.0), b_((p + 2.0) / 4.0) {}

  double value(const VectorXd& u) const {
    double n = power_integral(grid_, u, p_, region_);
    double k = u.dot(ops_.stiffness * u);
    double m = u.dot(ops_.mass * u);
    if (!(n > 0.0) || !(k > 0.0) || !(m > 0.0)) return kNegInf;
    return std::log(n) - a_ * std::log(k) - b_ * std::log(m);
  }

  VectorXd gradient(const VectorXd& u) const {
    double n = power_integral(grid_, u, p_, region_);
    VectorXd su = ops_.stiffness * u;
    VectorXd mu = ops_.mass * u;
    return (p_ / n) * power_gradient(grid_, u, p_, region_) - (2.0 * a_ / u.dot(su)) * su -
           (2.0 * b_ / u.dot(mu)) * mu;
  }

 private:
  const Grid& grid_;
  const LaplacianOperators& ops_;
  double p_;
  Region region_;
  double a_, b_;
};

VectorXd unit_mass(const VectorXd& u, const SparseMatrix& mass) { return u / std::sqrt(u.dot(mass * u)); }

/// Preconditioned ascent with Barzilai-Borwein steps, backtracking and
/// renormalization to unit mass after every step.
VectorXd ascend(const LogQuotient& q, const LaplacianOperators& ops, VectorXd u, const GnOptions& opts) {
  u = unit_mass(u, ops.mass);
  double shift = std::max(u.dot(ops.stiffness * u), 1e-6);
  SparseMatrix precond = ops.stiffness + shift * ops.mass;
  Eigen::SimplicialLDLT<SparseMatrix> solver(precond);
  if (solver.info() != Eigen::Success) throw SolverFailure("GN ascent: preconditioner factorization failed");

  double val = q.value(u);
  if (val == kNegInf) return u;
  std::vector<double> trace{val};
  double tau = 1.0;
  VectorXd prev_u, prev_pd;
  const int window = 200;
  for (int it = 0; it < opts.max_iter; ++it) {
    VectorXd g = q.gradient(u);
    VectorXd d = solver.solve(g);
    double gd = g.dot(d);
    if (!(gd > 1e-24)) break;
    VectorXd pd = precond * d;
    if (prev_u.size() == u.size()) {
      VectorXd s = u - prev_u;
      double num = s.dot(precond * s);
      double den = -s.dot(pd - prev_pd);
      tau = den > 0.0 ? std::clamp(num / den, 1e-8, 1e4) : std::min(2.0 * tau, 1e4);
    }
    double step = tau;
    VectorXd trial;
    double tv = kNegInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      trial = unit_mass(u + step * d, ops.mass);
      tv = q.value(trial);
      if (tv >= val + 1e-4 * step * gd) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    prev_u = u;
    prev_pd = pd;
    u = trial;
    val = tv;
    trace.push_back(val);
    if (trace.size() > static_cast<std::size_t>(window) &&
        val - trace[trace.size() - 1 - window] < window * opts.tol)
      break;
  }
  return u;
}

std::vector<VectorXd> seeds(const Grid& grid, const LaplacianOperators& ops) {
  const MetricGraph& g = grid.graph();
  double width = std::max(0.5 * g.core_length() / static_cast<double>(g.edges().size()), 5.0 * grid.h());
  auto bump = [&](std::size_t centre) {
    auto dist = grid_distances(grid, centre);
    VectorXd u(static_cast<Index>(grid.n_free()));
    for (std::size_t d = 0; d < grid.n_free(); ++d) {
      double r = dist[d] / width;
      u[static_cast<Index>(d)] = std::exp(-r * r);
    }
    return u;
  };

  std::vector<VectorXd> out;
  for (std::size_t v = 0; v < g.vertices().size(); ++v) out.push_back(bump(v));
  std::size_t longest = 0;
  for (std::size_t e = 1; e < g.edges().size(); ++e)
    if (g.edges()[e].length > g.edges()[longest].length) longest = e;
  const auto& dofs = grid.edges()[longest].dofs;
  out.push_back(bump(dofs[dofs.size() / 2]));
  out.push_back(interpolate(grid, [&](std::size_t e, double x) { return grid.edges()[e].half_line ? std::exp(-x / width) : 1.0; }));
  for (auto& s : out) s = unit_mass(s, ops.mass);
  return out;
}

struct LevelResult {
  double value;
  VectorXd maximizer;
};

LevelResult power_level(const Grid& grid, double p, GnVariant variant, const GnOptions& opts,
                        const std::vector<VectorXd>& starts) {
  LaplacianOperators ops = assemble_laplacian(grid, 0.0);
  LogQuotient q(grid, ops, p, region_of(variant));
  LevelResult best{-1.0, {}};
  for (const auto& s : starts) {
    VectorXd u = ascend(q, ops, s, opts);
    double v = gn_quotient(grid, u, p, variant);
    if (v > best.value) best = {v, u};
  }
  return best;
}

std::vector<std::size_t> sup_candidates(const Grid& grid) {
  std::vector<std::size_t> c;
  for (std::size_t v = 0; v < grid.graph().vertices().size(); ++v) c.push_back(v);
  for (const auto& eg : grid.edges()) {
    std::size_t n = eg.n_elements();
    if (eg.half_line) {
      c.push_back(eg.dofs[1]);
      auto k = static_cast<std::size_t>(std::round(1.0 / eg.step));
      if (k > 1 && k < n) c.push_back(eg.dofs[k]);
    } else {
      for (std::size_t k : {n / 4, n / 2, (3 * n) / 4})
        if (k > 0 && k < n) c.push_back(eg.dofs[k]);
    }
  }
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

// sup_u u_j² / (‖u'‖‖u‖) = sup_t 2 t [(t² S + M)⁻¹]_jj.
LevelResult sup_level(const Grid& grid) {
  LaplacianOperators ops = assemble_laplacian(grid, 0.0);
  const auto cand = sup_candidates(grid);
  double total = grid.graph().core_length() + grid.truncation() * static_cast<double>(grid.graph().half_lines().size());
  double t_lo = std::log(2.0 * grid.h()), t_hi = std::log(0.5 * total);
  const int n_t = 48;

  auto green_column = [&](double t, std::size_t j) {
    SparseMatrix a = (t * t) * ops.stiffness + ops.mass;
    Eigen::SimplicialLDLT<SparseMatrix> solver(a);
    VectorXd e = VectorXd::Zero(static_cast<Index>(grid.n_free()));
    e[static_cast<Index>(j)] = 1.0;
    return VectorXd(solver.solve(e));
  };

  double best_f = -1.0, best_logt = t_lo;
  std::size_t best_j = cand.front();
  for (int i = 0; i < n_t; ++i) {
    double lt = t_lo + (t_hi - t_lo) * i / (n_t - 1);
    double t = std::exp(lt);
    SparseMatrix a = (t * t) * ops.stiffness + ops.mass;
    Eigen::SimplicialLDLT<SparseMatrix> solver(a);
    for (std::size_t j : cand) {
      VectorXd e = VectorXd::Zero(static_cast<Index>(grid.n_free()));
      e[static_cast<Index>(j)] = 1.0;
      double f = 2.0 * t * solver.solve(e)[static_cast<Index>(j)];
      if (f > best_f) {
        best_f = f;
        best_j = j;
        best_logt = lt;
      }
    }
  }

  // Golden section on log t around the best sample.
  double step = (t_hi - t_lo) / (n_t - 1);
  double a = best_logt - step, b = best_logt + step;
  auto objective = [&](double lt) {
    double t = std::exp(lt);
    return 2.0 * t * green_column(t, best_j)[static_cast<Index>(best_j)];
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int k = 0; k < 40; ++k) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = objective(x2);
    }
  }
  double lt = f1 > f2 ? x1 : x2;
  if (std::max(f1, f2) < best_f) lt = best_logt;
  VectorXd u = green_column(std::exp(lt), best_j);
  return {gn_quotient(grid, u, 0.0, GnVariant::SupNorm), u};
}

}  // namespace

double gn_quotient(const Grid& grid, const VectorXd& u, double p, GnVariant variant) {
  LaplacianOperators ops = assemble_laplacian(grid, 0.0);
  double k = u.dot(ops.stiffness * u);
  double m = u.dot(ops.mass * u);
  if (!(k > 0.0) || !(m > 0.0)) return 0.0;
  if (variant == GnVariant::SupNorm) return u.cwiseAbs().maxCoeff() / std::pow(k * m, 0.25);
  double n = power_integral(grid, u, p, region_of(variant));
  return n / (std::pow(k, (p - 2.0) / 4.0) * std::pow(m, (p + 2.0) / 4.0));
}

GnEstimate gn_constant(const MetricGraph& g, double p, GnVariant variant, const GnOptions& opts) {
  if (variant != GnVariant::SupNorm && !(p > 2.0)) throw InputError("GN exponent must exceed 2");
  if (opts.levels < 1) throw InputError("GN estimate needs at least one grid level");

  GnEstimate est;
  est.p = p;
  est.variant = variant;
  Grid grid = Grid::build(g, opts.h, opts.truncation);
  LevelResult best{};
  for (int level = 0; level < opts.levels; ++level) {
    if (level > 0) {
      Grid fine = grid.refined();
      VectorXd warm = prolongate(grid, fine, best.maximizer);
      grid = fine;
      if (variant == GnVariant::SupNorm) {
        LevelResult r = sup_level(grid);
        // The prolongated maximizer is feasible on the finer grid.
        double v = gn_quotient(grid, warm, p, variant);
        best = r.value >= v ? r : LevelResult{v, warm};
      } else {
        best = power_level(grid, p, variant, opts, {warm});
      }
    } else if (variant == GnVariant::SupNorm) {
      best = sup_level(grid);
    } else {
      LaplacianOperators ops = assemble_laplacian(grid, 0.0);
      best = power_level(grid, p, variant, opts, seeds(grid, ops));
    }
    est.history.push_back({grid.h(), best.value});
  }
  est.value = best.value;
  est.maximizer = best.maximizer;
  est.grid = std::make_shared<const Grid>(grid);
  return est;
}

double critical_mass(double constant) {
  if (!(constant > 0.0)) throw InputError("critical mass of a nonpositive constant");
  return std::sqrt(3.0 / constant);
}

}  // namespace gratwave
