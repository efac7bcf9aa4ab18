#include "gratwave/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace gratwave {

namespace {

std::size_t level_index(const std::vector<double>& levels, double t) {
  return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), t) - levels.begin());
}

std::vector<double> sorted_levels(const std::vector<LinearPiece>& pieces) {
  std::vector<double> levels{0.0};
  for (const auto& p : pieces) {
    levels.push_back(p.a);
    levels.push_back(p.b);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

std::vector<LinearPiece> grid_pieces(const Grid& grid, const Eigen::VectorXd& u) {
  if (u.size() != static_cast<Eigen::Index>(grid.n_free())) throw InputError("field does not match the grid");
  if (u.size() > 0 && u.minCoeff() < 0.0) throw InputError("rearrangement needs a nonnegative field");
  std::vector<LinearPiece> pieces;
  pieces.reserve(grid.elements().size());
  for (const auto& el : grid.elements())
    pieces.push_back({dof_value(grid, u, el.a), dof_value(grid, u, el.b), el.length});
  return pieces;
}

std::size_t sample_count(double total, double h) {
  if (!(h > 0.0)) throw InputError("sampling step must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / h - 1e-9)));
}

}  // namespace

DistributionFunction DistributionFunction::from_pieces(const std::vector<LinearPiece>& pieces) {
  DistributionFunction rho;
  rho.levels_ = sorted_levels(pieces);
  const std::size_t k = rho.levels_.size();
  // Per level index: drop of the constant part, and the ramp terms α - β t
  // entering/leaving the active set.
  std::vector<double> drop(k, 0.0), d_alpha(k, 0.0), d_beta(k, 0.0);
  for (const auto& p : pieces) {
    if (p.a < 0.0 || p.b < 0.0) throw InputError("rearrangement needs a nonnegative field");
    rho.total_ += p.length;
    double lo = std::min(p.a, p.b), hi = std::max(p.a, p.b);
    std::size_t i = level_index(rho.levels_, lo);
    drop[i] += p.length;
    if (hi > lo) {
      double beta = p.length / (hi - lo);
      std::size_t j = level_index(rho.levels_, hi);
      d_alpha[i] += beta * hi;
      d_beta[i] += beta;
      d_alpha[j] -= beta * hi;
      d_beta[j] -= beta;
    }
  }
  rho.right_.resize(k);
  rho.left_.resize(k);
  double cst = rho.total_, alpha = 0.0, beta = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double t = rho.levels_[i];
    rho.left_[i] = std::max(0.0, cst + alpha - beta * t);
    cst -= drop[i];
    alpha += d_alpha[i];
    beta += d_beta[i];
    rho.right_[i] = std::max(0.0, cst + alpha - beta * t);
  }
  rho.right_.back() = 0.0;
  return rho;
}

double DistributionFunction::operator()(double t) const {
  if (levels_.empty() || t < levels_.front()) return total_;
  if (t >= levels_.back()) return 0.0;
  auto it = std::upper_bound(levels_.begin(), levels_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - levels_.begin()) - 1;
  double t0 = levels_[i], t1 = levels_[i + 1];
  double s = (t - t0) / (t1 - t0);
  return right_[i] + s * (left_[i + 1] - right_[i]);
}

double DistributionFunction::inverse(double x) const {
  if (levels_.empty()) return 0.0;
  // First level whose right value drops to x or below; right_ is nonincreasing.
  auto it = std::partition_point(right_.begin(), right_.end(), [x](double r) { return r > x; });
  std::size_t k = static_cast<std::size_t>(it - right_.begin());
  if (k == 0) return std::max(0.0, levels_[0]);
  double r0 = right_[k - 1], l1 = left_[k];
  if (x < l1) return levels_[k];
  double t0 = levels_[k - 1], t1 = levels_[k];
  return t0 + (r0 - x) / (r0 - l1) * (t1 - t0);
}

DistributionFunction distribution(const Grid& grid, const Eigen::VectorXd& u) {
  return DistributionFunction::from_pieces(grid_pieces(grid, u));
}

DistributionFunction distribution(const RearrangedProfile& profile) {
  std::vector<LinearPiece> pieces;
  for (std::size_t i = 0; i + 1 < profile.values.size(); ++i)
    pieces.push_back({profile.values[i], profile.values[i + 1], profile.step});
  return DistributionFunction::from_pieces(pieces);
}

RearrangedProfile decreasing_rearrangement(const DistributionFunction& rho, double h) {
  const double total = rho.total_length();
  const std::size_t n = sample_count(total, h);
  RearrangedProfile out;
  out.step = total / static_cast<double>(n);
  out.values.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.values[i] = rho.inverse(static_cast<double>(i) * out.step);
  return out;
}

RearrangedProfile decreasing_rearrangement(const Grid& grid, const Eigen::VectorXd& u) {
  return decreasing_rearrangement(distribution(grid, u), grid.h());
}

RearrangedProfile decreasing_rearrangement(const RearrangedProfile& profile) {
  return decreasing_rearrangement(distribution(profile), profile.symmetric ? 2.0 * profile.step : profile.step);
}

RearrangedProfile symmetric_rearrangement(const DistributionFunction& rho, double h) {
  RearrangedProfile star = decreasing_rearrangement(rho, h);
  const std::size_t n = star.values.size() - 1;
  RearrangedProfile out;
  out.symmetric = true;
  out.step = 0.5 * star.step;
  out.origin = -0.5 * rho.total_length();
  out.values.resize(2 * n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    out.values[n + i] = star.values[i];
    out.values[n - i] = star.values[i];
  }
  return out;
}

RearrangedProfile symmetric_rearrangement(const Grid& grid, const Eigen::VectorXd& u) {
  return symmetric_rearrangement(distribution(grid, u), grid.h());
}

double power_norm(const RearrangedProfile& v, double p) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < v.values.size(); ++i) {
    double a = std::abs(v.values[i]), b = std::abs(v.values[i + 1]);
    total += v.step / 6.0 * (std::pow(a, p) + 4.0 * std::pow(0.5 * (a + b), p) + std::pow(b, p));
  }
  return total;
}

double kinetic_energy(const RearrangedProfile& v) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < v.values.size(); ++i) {
    double d = v.values[i + 1] - v.values[i];
    total += d * d / v.step;
  }
  return total;
}

int min_preimages(const Grid& grid, const Eigen::VectorXd& u) {
  const auto pieces = grid_pieces(grid, u);
  const auto levels = sorted_levels(pieces);
  if (levels.size() < 2) return 0;
  std::vector<int> diff(levels.size(), 0);
  for (const auto& p : pieces) {
    if (p.a == p.b) continue;
    diff[level_index(levels, std::min(p.a, p.b))] += 1;
    diff[level_index(levels, std::max(p.a, p.b))] -= 1;
  }
  int count = 0, best = -1;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    count += diff[k];
    if (levels[k] < 0.0) continue;
    if (best < 0 || count < best) best = count;
  }
  return std::max(best, 0);
}

void write_profile_csv(std::ostream& os, const RearrangedProfile& v) {
  os << "x,value\n";
  char buf[64];
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.17g\n", v.x(i), v.values[i]);
    os << buf;
  }
}

}  // namespace gratwave
