#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "gratwave/nls.hpp"
#include "gratwave/rearrangement.hpp"
#include "oracles.hpp"

using namespace gratwave;
using fixtures::graph;
using Eigen::VectorXd;

namespace {

// Each graph carries one half-line on which the test fields vanish or decay.
const char* kPath = "vertex a\nvertex b\nvertex c\nedge e1 a b 2\nedge e2 b c 3\nhalfline h c\n";
const char* kSegment = "vertex a\nvertex b\nedge e a b 4\nhalfline h b\n";
const char* kSegmentA = "vertex a\nvertex b\nedge e a b 4\nhalfline h a\n";

double tent(double x, double center, double width, double height) {
  return std::max(0.0, height * (1.0 - std::abs(x - center) / width));
}

/// Two tents on the path: height 1 on e1, height 0.5 on e2.
VectorXd two_tents(const Grid& grid) {
  return interpolate(grid, [](std::size_t e, double x) {
    if (e == 0) return tent(x, 1.0, 0.8, 1.0);
    return e == 1 ? tent(x, 1.5, 1.2, 0.5) : 0.0;
  });
}

double kinetic(const Grid& grid, const VectorXd& u) {
  NlsProblem prob = NlsProblem::create(grid, 4.0, 1.0);
  return u.dot(prob.ops->stiffness * u);
}

VectorXd loop_bump(const Grid& grid) {
  return interpolate(grid, [&](std::size_t e, double x) {
    if (grid.edges()[e].half_line) return 0.0;
    return std::pow(std::sin(M_PI * x / 2.0), 2) * (1.0 + 0.3 * x);
  });
}

}  // namespace

TEST_CASE("constant edge") {
  // 1 on the edge, dropping to 0 across the first half-line element.
  Grid grid = Grid::build(graph(kSegment), 0.1, 1.0);
  VectorXd u = interpolate(grid, [&](std::size_t e, double x) { return grid.edges()[e].half_line && x > 0 ? 0.0 : 1.0; });
  const double s = grid.edges()[1].step;
  DistributionFunction rho = distribution(grid, u);
  CHECK(rho(0.0) == doctest::Approx(4.0 + s));
  CHECK(rho(0.5) == doctest::Approx(4.0 + s / 2));
  CHECK(rho(0.999) == doctest::Approx(4.0 + 0.001 * s));
  CHECK(rho(1.0) == 0.0);
  CHECK(rho.total_length() == doctest::Approx(5.0));
  RearrangedProfile star = decreasing_rearrangement(grid, u);
  CHECK(star.length() == doctest::Approx(5.0));
  CHECK(star.values.back() == 0.0);
  for (std::size_t i = 0; i < star.values.size(); ++i)
    if (star.x(i) <= 4.0) CHECK(star.values[i] == doctest::Approx(1.0));
}

TEST_CASE("distribution of two tents against brute-force level sets") {
  Grid grid = Grid::build(graph(kPath), 0.1, 1.0);
  DistributionFunction rho = distribution(grid, two_tents(grid));
  auto f1 = [](double x) { return tent(x, 1.0, 0.8, 1.0); };
  auto f2 = [](double x) { return tent(x, 1.5, 1.2, 0.5); };
  for (double t : {0.05, 0.2, 0.37, 0.49, 0.5, 0.51, 0.8, 0.99}) {
    double brute = oracle::level_measure(f1, 2.0, t, 200000) + oracle::level_measure(f2, 3.0, t, 200000);
    CHECK(rho(t) == doctest::Approx(brute).epsilon(1e-4));
  }
  CHECK(rho(1.0) == 0.0);
  CHECK(rho.sup() == doctest::Approx(1.0));
}

TEST_CASE("distribution and rearrangement are monotone") {
  Grid grid = Grid::build(graph(fixtures::cycle_with_pendant()), 0.05, 5.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd u(static_cast<Eigen::Index>(grid.n_free()));
  for (auto& x : u) x = unif(rng);
  DistributionFunction rho = distribution(grid, u);
  double prev = rho(0.0);
  for (int i = 1; i <= 500; ++i) {
    double r = rho(i / 500.0);
    CHECK(r <= prev);
    prev = r;
  }
  RearrangedProfile star = decreasing_rearrangement(grid, u);
  for (std::size_t i = 1; i < star.values.size(); ++i) CHECK(star.values[i] <= star.values[i - 1]);
}

TEST_CASE("monotone field is its own rearrangement") {
  // e^{-x} along the half-line path, once with the half-line at the low end of
  // the edge and once with the edge reversed.
  Grid ga = Grid::build(graph(kSegment), 0.05, 3.0);
  Grid gb = Grid::build(graph(kSegmentA), 0.05, 3.0);
  VectorXd dec = interpolate(ga, [&](std::size_t e, double x) { return std::exp(ga.edges()[e].half_line ? -4.0 - x : -x); });
  VectorXd inc = interpolate(gb, [&](std::size_t e, double x) { return std::exp(gb.edges()[e].half_line ? -4.0 - x : x - 4.0); });
  RearrangedProfile a = decreasing_rearrangement(ga, dec);
  RearrangedProfile b = decreasing_rearrangement(gb, inc);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.x(i) < 6.5) CHECK(a.values[i] == doctest::Approx(std::exp(-a.x(i))).epsilon(1e-12));
    CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-12));
  }
  CHECK(min_preimages(ga, dec) == 1);
  CHECK(min_preimages(gb, inc) == 1);
}

TEST_CASE("rearrangement preserves L^p norms to second order") {
  std::vector<double> err;
  for (double h : {0.04, 0.02}) {
    Grid grid = Grid::build(graph(kPath), h, 15.0);
    const double end = 0.3 + 0.2 * std::sin(6.0);
    VectorXd u = interpolate(grid, [&](std::size_t e, double x) {
      if (grid.edges()[e].half_line) return end * std::exp(-x);
      return e == 0 ? std::exp(-std::pow(x - 1.0, 2)) : 0.3 + 0.2 * std::sin(2 * x);
    });
    RearrangedProfile star = decreasing_rearrangement(grid, u);
    double worst = 0.0;
    for (double p : {2.0, 4.0, 6.0}) {
      double ref = power_integral(grid, u, p, Region::Whole);
      worst = std::max(worst, std::abs(power_norm(star, p) - ref) / ref);
    }
    err.push_back(worst);
  }
  CHECK(err[1] < 1e-3);
  CHECK(err[0] / err[1] > 3.0);
}

TEST_CASE("Polya-Szego for the decreasing rearrangement") {
  Grid grid = Grid::build(graph(fixtures::cycle_with_pendant()), 0.02, 5.0);
  VectorXd u = interpolate(grid, [&](std::size_t e, double x) {
    if (grid.edges()[e].half_line) return 0.4 * std::exp(-x);
    return 0.4 + 0.5 * std::sin(3 * x + static_cast<double>(e));
  });
  u = u.cwiseMax(0.0);
  RearrangedProfile star = decreasing_rearrangement(grid, u);
  CHECK(kinetic_energy(star) <= kinetic(grid, u) * (1 + 1e-9));
}

TEST_CASE("symmetric rearrangement") {
  Grid grid = Grid::build(graph(fixtures::tadpole(2.0)), 0.01, 3.0);
  VectorXd u = loop_bump(grid);
  CHECK(min_preimages(grid, u) >= 2);
  RearrangedProfile hat = symmetric_rearrangement(grid, u);
  CHECK(hat.symmetric);
  for (std::size_t i = 0; i < hat.values.size(); ++i) CHECK(hat.values[i] == hat.values[hat.values.size() - 1 - i]);
  CHECK(hat.x(0) == doctest::Approx(-hat.x(hat.values.size() - 1)));
  CHECK(hat.values[hat.values.size() / 2] == doctest::Approx(u.maxCoeff()).epsilon(1e-12));
  CHECK(kinetic_energy(hat) <= kinetic(grid, u) * (1 + 1e-9));
  CHECK(kinetic_energy(hat) == doctest::Approx(4.0 * kinetic_energy(decreasing_rearrangement(grid, u))).epsilon(1e-6));
  CHECK(power_norm(hat, 4.0) == doctest::Approx(power_integral(grid, u, 4.0, Region::Whole)).epsilon(1e-3));
}

TEST_CASE("equimeasurability and idempotence") {
  Grid grid = Grid::build(graph(kPath), 0.02, 1.0);
  VectorXd u = two_tents(grid);
  DistributionFunction rho = distribution(grid, u);
  RearrangedProfile star = decreasing_rearrangement(grid, u);
  DistributionFunction rho_star = distribution(star);
  for (int i = 0; i < 50; ++i) {
    double t = 0.013 + i * 0.0199;
    CHECK(std::abs(rho_star(t) - rho(t)) < 2 * star.step);
  }
  RearrangedProfile again = decreasing_rearrangement(star);
  REQUIRE(again.values.size() == star.values.size());
  for (std::size_t i = 0; i < star.values.size(); ++i)
    CHECK(again.values[i] == doctest::Approx(star.values[i]).epsilon(1e-12));

  RearrangedProfile hat = symmetric_rearrangement(grid, u);
  RearrangedProfile from_hat = decreasing_rearrangement(hat);
  REQUIRE(from_hat.values.size() == star.values.size());
  for (std::size_t i = 0; i < star.values.size(); ++i)
    CHECK(from_hat.values[i] == doctest::Approx(star.values[i]).epsilon(1e-12));
}

TEST_CASE("negative fields are rejected") {
  Grid grid = Grid::build(graph(kSegment), 0.1, 1.0);
  VectorXd u = VectorXd::Ones(static_cast<Eigen::Index>(grid.n_free()));
  u[3] = -0.1;
  CHECK_THROWS_AS(distribution(grid, u), InputError);
}

TEST_CASE("profile CSV") {
  RearrangedProfile v;
  v.origin = -1.0;
  v.step = 0.5;
  v.values = {0.0, 1.0, 2.0, 1.0, 0.0};
  std::ostringstream os;
  write_profile_csv(os, v);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,value");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}
