#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gratwave/discretization.hpp"
#include "gratwave/nls.hpp"

namespace gratwave {

/// Two-component field: φ on the free nodes, χ on element midpoints.
struct Spinor {
  Eigen::VectorXcd phi;
  Eigen::VectorXcd chi;
  double m = 0.0;
  double c = 0.0;

  Eigen::VectorXcd stacked() const;
};

/// Operator, grid and exponent of D ψ - χ_K |ψ|^{p-2} ψ = ω ψ.
struct NldeProblem {
  std::shared_ptr<const Grid> grid;
  std::shared_ptr<const DiracOperator> op;
  double p = 4.0;

  static NldeProblem create(const Grid& grid, double m, double c, double p);
  Spinor split(const Eigen::VectorXcd& psi) const;
};

/// ∫_K (|φ|² + |χ|²)^{p/2}, trapezoid per element with χ constant on it.
double power_integral(const NldeProblem& prob, const Spinor& psi);

/// L(ψ) = ½⟨ψ, Dψ⟩ - (ω/2)‖ψ‖² - (1/p) ∫_K |ψ|^p.
double action(const Spinor& psi, double omega, const NldeProblem& prob);

/// Weighted residual K ψ - g(ψ) - ω W ψ of the discrete equation.
Eigen::VectorXcd nlde_residual_vector(const Spinor& psi, double omega, const NldeProblem& prob);
/// Discrete L² norm of D ψ - χ_K|ψ|^{p-2}ψ - ω ψ.
double nlde_residual(const Spinor& psi, double omega, const NldeProblem& prob);

/// Jacobian of the residual in real coordinates [Re ψ; Im ψ] (symmetric).
SparseMatrix nlde_jacobian(const Spinor& psi, double omega, const NldeProblem& prob);

/// φ = u, χ = -(i c / (ω + m c²)) u' at element midpoints.
Spinor lift_from_nls(const NldeProblem& prob, const Eigen::VectorXd& u, double omega);

/// Absence of spectrum of the free operator in (-f·mc², f·mc²), checked by
/// Sylvester inertia of K ∓ f mc² W, together with the eigenvalue of smallest
/// modulus from shift-invert Lanczos at 0.
struct SpectralGapCertificate {
  double fraction = 0.99;
  long eigenvalues_in_gap = 0;
  bool certified = false;
  double min_abs_eigenvalue = 0.0;
  double ritz_residual = 0.0;
  int lanczos_steps = 0;
};

SpectralGapCertificate certify_spectral_gap(const DiracOperator& op, double fraction = 0.99, int max_lanczos = 120);

struct NldeOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double min_step = 1.0 / 1048576.0;  // 2⁻²⁰
  double collapse = 1e-8;            // ‖ψ‖ below this is the trivial solution
  bool certify_gap = true;
};

struct NldeReport {
  Spinor spinor;
  double omega = 0.0;
  double action = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton on the bordered real system that fixes the phase. The default
/// seed lifts the NLS ground state of -u'' - 2m χ_K|u|^{p-2}u = 2m(ω - mc²) u.
NldeReport bound_state(const NldeProblem& prob, double omega, const std::optional<Spinor>& seed = std::nullopt,
                       const NldeOptions& opts = {});

struct LimitRow {
  double c = 0.0;
  double omega = 0.0;
  double chi_l2 = 0.0;
  double phi_minus_u_h1 = 0.0;
  double nlse_residual = 0.0;
  double chi_phi_ratio = 0.0;  // ‖χ‖ / ‖φ‖
  int iterations = 0;
};

struct LimitTable {
  double lambda = 0.0;
  double m = 0.0;
  double p = 0.0;
  std::vector<LimitRow> rows;
  SolverReport target;  // NLS state with coupling 2m at frequency λ
  bool complete = false;
  std::string failure;  // set when a stage failed and the table is partial
  /// c·‖χ‖/‖φ‖ at the last row; reported, not asserted.
  double rate_constant() const;
};

/// Follows bound states along the schedule at ω_n = m c_n² + λ/(2m), warm
/// starting each stage from the previous one with χ rescaled to keep the lift
/// relation.
LimitTable nonrel_limit(const Grid& grid, double lambda, double m, double p, const std::vector<double>& schedule,
                        const NldeOptions& opts = {}, const GroundStateOptions& nls_opts = {});

/// CSV columns: c, omega, chi_l2, phi_minus_u_h1, nlse_residual.
void write_limit_csv(std::ostream& os, const LimitTable& table);

}  // namespace gratwave
