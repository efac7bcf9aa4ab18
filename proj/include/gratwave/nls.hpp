#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gratwave/discretization.hpp"

namespace gratwave {

/// Which elements a power integral runs over.
enum class Region { Core, Whole };

/// ∫ |u|^p over the region, per-element Simpson rule on the P1 interpolant.
double power_integral(const Grid& grid, const Eigen::VectorXd& u, double p, Region region = Region::Core);
double power_integral(const Grid& grid, const Eigen::VectorXcd& u, double p, Region region = Region::Core);

/// Gradient of (1/p)·power_integral, i.e. the weak form of |u|^{p-2}u.
Eigen::VectorXd power_gradient(const Grid& grid, const Eigen::VectorXd& u, double p, Region region = Region::Core);

/// Jacobian of power_gradient (symmetric).
SparseMatrix power_hessian(const Grid& grid, const Eigen::VectorXd& u, double p, Region region = Region::Core);

/// Mass-constrained problem -Δu - κ χ_K |u|^{p-2} u = λ u with ‖u‖² = μ.
/// The coupling κ is 1 for the standard problem; the nonrelativistic limit of the
/// Dirac equation uses κ = 2m.
struct NlsProblem {
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const LaplacianOperators> ops;
  double p = 4.0;
  double mass = 1.0;
  double coupling = 1.0;

  static NlsProblem create(const Grid& grid, double p, double mass, double alpha = 0.0, double coupling = 1.0);
  NlsProblem with_mass(double mu) const;
};

/// E(u) = ½ ∫|u'|² - (κ/p) ∫_K |u|^p (plus ½ α Σ u(v)² for δ-coupling).
double energy(const Eigen::VectorXd& u, const NlsProblem& prob);
/// Complex path; E(e^{iθ}u) = E(u).
double energy(const Eigen::VectorXcd& u, const NlsProblem& prob);

double field_mass(const Eigen::VectorXd& u, const NlsProblem& prob);

/// λ = (∫|u'|² - κ ∫_K|u|^p) / μ from the already integrated pieces.
double lagrange_multiplier(double kinetic, double core_power, double mu, double coupling = 1.0);
/// Uses the measured mass of u.
double lagrange_multiplier(const Eigen::VectorXd& u, const NlsProblem& prob);
double lagrange_multiplier(const Eigen::VectorXcd& u, const NlsProblem& prob);

/// Discrete L² norm of S u - κ f(u) - λ M u, measured as sqrt(rᵀ M⁻¹ r).
double residual(const Eigen::VectorXd& u, double lambda, const NlsProblem& prob);

struct SolverReport {
  Eigen::VectorXd state;
  double energy = 0.0;
  double lagrange = 0.0;
  double residual = 0.0;
  int iterations = 0;  // flow steps plus Newton steps
  int newton_iterations = 0;
  bool converged = false;
  /// Energy after every accepted flow step (starting with the seed).
  std::vector<double> energy_trace;
  /// Largest |‖u‖² - μ| observed after any flow step.
  double max_mass_drift = 0.0;
};

struct GroundStateOptions {
  double tol = 1e-8;              // residual target
  double constraint_tol = 1e-12;  // relative mass tolerance
  int max_iter = 5000;
  double flow_tol = 1e-4;  // projected gradient level at which Newton takes over
  int newton_max = 40;
  double preconditioner_shift = 1.0;
  /// Critical exponent only: the estimated reduced critical mass μ_K. Runs with
  /// μ ≥ (1 + margin) μ_K are refused.
  std::optional<double> critical_mass;
  double critical_margin = 0.01;
  /// Skip the Newton polish (flow only).
  bool polish = true;
};

/// Constant on the compact core, e^{-x} on half-lines, scaled to the target mass.
Eigen::VectorXd default_seed(const NlsProblem& prob);

/// Minimizes the energy on the mass sphere: preconditioned normalized gradient
/// flow with Barzilai-Borwein steps and backtracking, then a constrained Newton
/// polish on (u, λ). Returns a nonnegative state.
SolverReport ground_state(const NlsProblem& prob, const std::optional<Eigen::VectorXd>& seed = std::nullopt,
                          const GroundStateOptions& opts = {});

/// Ground state whose Lagrange multiplier equals `lambda`: secant search over
/// the mass followed by Newton at fixed λ. The returned report's state has
/// whatever mass realises λ.
SolverReport ground_state_at_frequency(const NlsProblem& prob, double lambda, const GroundStateOptions& opts = {});

}  // namespace gratwave
