#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gratwave/discretization.hpp"

namespace gratwave {

/// Which Gagliardo-Nirenberg quotient to maximize.
///  WholeGraph:     ‖u‖_p^p / (‖u'‖^{p/2-1} ‖u‖^{p/2+1})
///  CoreRestricted: same with the numerator integrated over the compact core only
///  SupNorm:        ‖u‖_∞ / (‖u'‖^{1/2} ‖u‖^{1/2})   (p is ignored)
enum class GnVariant { WholeGraph, CoreRestricted, SupNorm };

struct GnOptions {
  double h = 0.02;
  double truncation = 30.0;
  int levels = 1;  // number of grids, each a uniform refinement of the previous one
  int max_iter = 4000;
  double tol = 1e-11;  // relative stall tolerance of the ascent
};

struct GnEstimate {
  double value = 0.0;
  double p = 0.0;
  GnVariant variant = GnVariant::WholeGraph;
  std::shared_ptr<const Grid> grid;  // finest grid
  Eigen::VectorXd maximizer;         // on `grid`
  std::vector<std::pair<double, double>> history;  // (h, best value) per level, coarse to fine
};

/// The quotient itself, on the Kirchhoff (α = 0) form. Zero for u = 0.
double gn_quotient(const Grid& grid, const Eigen::VectorXd& u, double p, GnVariant variant);

/// Lower estimate of the optimal constant by multistart normalized ascent over
/// the discrete continuity space of the truncated graph. Seeds: one bump per
/// vertex, a bump at the middle of the longest bounded edge, and the
/// constant-on-core profile with exponential tails.
GnEstimate gn_constant(const MetricGraph& g, double p, GnVariant variant, const GnOptions& opts = {});

/// μ = sqrt(3 / C) for a p = 6 constant C (whole-graph or core-restricted).
double critical_mass(double constant);

inline constexpr double kPi = 3.14159265358979323846;
/// Critical mass of the real line, π√3/2.
inline const double kLineCriticalMass = kPi * 1.7320508075688772 / 2.0;
/// Critical mass of the half-line, half the line value.
inline const double kHalfLineCriticalMass = kLineCriticalMass / 2.0;

}  // namespace gratwave
