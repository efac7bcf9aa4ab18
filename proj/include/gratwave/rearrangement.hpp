#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "gratwave/discretization.hpp"

namespace gratwave {

/// A linear piece of a continuous piecewise-linear function: values at both
/// ends and the piece length.
struct LinearPiece {
  double a;
  double b;
  double length;
};

struct RearrangedProfile;

/// ρ(t) = |{x : u(x) > t}| of a nonnegative piecewise-linear function.
///
/// Exact for the P1 interpolant: ρ is linear between consecutive nodal values
/// and jumps at plateau values, where it is right-continuous.
class DistributionFunction {
 public:
  static DistributionFunction from_pieces(const std::vector<LinearPiece>& pieces);

  double operator()(double t) const;
  /// inf{t ≥ 0 : ρ(t) ≤ x}
  double inverse(double x) const;

  /// Length of the (truncated) domain; ρ(t) for t below every value.
  double total_length() const { return total_; }
  double sup() const { return levels_.empty() ? 0.0 : levels_.back(); }
  /// Breakpoints (sorted distinct nodal values, always including 0).
  const std::vector<double>& levels() const { return levels_; }

 private:
  std::vector<double> levels_;
  std::vector<double> right_;  // ρ(t_k)
  std::vector<double> left_;   // ρ(t_k⁻)
  double total_ = 0.0;
};

/// Throws InputError on negative values.
DistributionFunction distribution(const Grid& grid, const Eigen::VectorXd& u);
DistributionFunction distribution(const RearrangedProfile& profile);

/// Samples on a uniform grid; `values[i]` sits at origin + i·step.
struct RearrangedProfile {
  bool symmetric = false;
  double origin = 0.0;
  double step = 0.0;
  std::vector<double> values;

  double x(std::size_t i) const { return origin + static_cast<double>(i) * step; }
  double length() const { return step * static_cast<double>(values.size() - 1); }
};

/// u*(x) = inf{t ≥ 0 : ρ(t) ≤ x} on [0, |G|], with the step adjusted to divide
/// the total length and not exceed `h`.
RearrangedProfile decreasing_rearrangement(const DistributionFunction& rho, double h);
RearrangedProfile decreasing_rearrangement(const Grid& grid, const Eigen::VectorXd& u);
RearrangedProfile decreasing_rearrangement(const RearrangedProfile& profile);

/// û(x) = u*(2|x|) on [-|G|/2, |G|/2]; exactly even on its sample grid.
RearrangedProfile symmetric_rearrangement(const DistributionFunction& rho, double h);
RearrangedProfile symmetric_rearrangement(const Grid& grid, const Eigen::VectorXd& u);

/// ∫|v|^p of the P1 interpolant (Simpson per element, as on graphs).
double power_norm(const RearrangedProfile& v, double p);
/// ∫|v'|² of the P1 interpolant.
double kinetic_energy(const RearrangedProfile& v);

/// Smallest number of preimages u⁻¹(t) over levels t ∈ (0, max u), sampled
/// between consecutive distinct nodal values.
int min_preimages(const Grid& grid, const Eigen::VectorXd& u);

/// Two-column CSV "x,value".
void write_profile_csv(std::ostream& os, const RearrangedProfile& v);

}  // namespace gratwave
