#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gratwave/existence.hpp"
#include "gratwave/nls.hpp"

using namespace gratwave;
using fixtures::graph;

namespace {

/// Competitor energy written out directly, for the threshold oracle.
double competitor(double core, double n, double mu, double p, double kappa) {
  double a2 = mu / (core + n / (2 * kappa));
  return n * a2 * kappa / 4 - core * std::pow(a2, p / 2) / p;
}

double min_competitor(double core, double n, double mu, double p) {
  double best = INFINITY;
  for (int i = 0; i <= 4000; ++i) best = std::min(best, competitor(core, n, mu, p, std::pow(10.0, -6 + 10.0 * i / 4000)));
  return best;
}

/// Smallest mass for which some competitor has negative energy.
double negative_energy_threshold(double core, double n, double p) {
  double lo = 1e-6, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    double mid = std::sqrt(lo * hi);
    (min_competitor(core, n, mid, p) < 0 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

TEST_CASE("threshold constant") {
  CHECK(threshold_constant(4.0) == 0.5);
  CHECK(threshold_constant(5.0) == doctest::Approx(2.636719).epsilon(1e-6));
  CHECK_THROWS_AS(threshold_constant(6.0), InputError);
  CHECK_THROWS_AS(threshold_constant(3.0), InputError);
}

TEST_CASE("threshold constant marks where the competitor turns negative") {
  for (double p : {4.0, 4.5, 5.0, 5.5}) {
    for (double n : {1.0, 3.0}) {
      const double core = 2.0;
      double mu = negative_energy_threshold(core, n, p);
      double lhs = std::pow(mu, (p - 2) / (6 - p)) * core;
      CHECK(lhs == doctest::Approx(std::pow(n, 4 / (6 - p)) * threshold_constant(p)).epsilon(1e-3));
    }
  }
}

TEST_CASE("competitor energy closed form against quadrature") {
  MetricGraph g = graph(fixtures::fat_line(3.0));
  Grid grid = Grid::build(g, 0.005, 40.0);
  for (double p : {4.0, 5.0}) {
    for (double kappa : {0.5, 2.0}) {
      const double mu = 1.0;
      const double a = std::sqrt(mu / (3.0 + 2.0 / (2 * kappa)));
      Eigen::VectorXd u = interpolate(grid, [&](std::size_t e, double x) {
        return grid.edges()[e].half_line ? a * std::exp(-kappa * x) : a;
      });
      NlsProblem prob = NlsProblem::create(grid, p, mu);
      CHECK(field_mass(u, prob) == doctest::Approx(mu).epsilon(1e-4));
      CHECK(competitor_energy(g, mu, p, kappa) == doctest::Approx(energy(u, prob)).epsilon(1e-4));
    }
  }
}

TEST_CASE("sign of the best competitor") {
  MetricGraph g = graph(fixtures::fat_line(3.0));
  Competitor c = best_competitor(g, 1.0, 4.0);
  CHECK(c.energy < 0.0);
  CHECK(c.energy == doctest::Approx(min_competitor(3.0, 2.0, 1.0, 4.0)).epsilon(1e-4));
  // κ < μ/N - N/(2|K|) is the negative range at p = 4; the minimizer lies inside it.
  CHECK(c.kappa < 1.0 / 2.0 - 2.0 / 6.0);
  CHECK(best_competitor(g, 0.01, 4.0).energy >= 0.0);
  for (double kappa : {1e-4, 1e-2, 1.0, 100.0}) CHECK(competitor_energy(g, 0.01, 4.0, kappa) > 0.0);
}

TEST_CASE("subcritical verdicts") {
  GnConstants line{1.0 / std::sqrt(3.0), 1.0};
  SUBCASE("long core exists") {
    auto v = classify_subcritical(graph(fixtures::fat_line(3.0)), 2.0, 4.0, line);
    CHECK(v.verdict == Verdict::ExistsByTheorem);
    CHECK(v.certificate.at("existence_threshold") == 2.0);
    CHECK(v.certificate.at("scaled_core_length") == 6.0);
  }
  SUBCASE("tiny core does not") {
    auto v = classify_subcritical(graph(fixtures::fat_line(0.1)), 0.5, 4.0, line);
    CHECK(v.verdict == Verdict::NotExistsByTheorem);
  }
  SUBCASE("borderline is inconclusive") {
    auto v = classify_subcritical(graph(fixtures::fat_line(2.0)), 1.0, 4.0, {0.3, 1.0});
    CHECK(v.verdict == Verdict::Inconclusive);
    CHECK(v.certificate.at("nonexistence_threshold") == doctest::Approx(2.0));
  }
  SUBCASE("certificate names") {
    auto v = classify_subcritical(graph(fixtures::tadpole()), 1.0, 5.0, line);
    for (const char* name : {"p", "mu", "N", "core_length", "c_p", "C_G_p", "C_G_inf", "scaled_core_length",
                             "existence_threshold", "nonexistence_threshold"})
      CHECK_NOTHROW(v.certificate.at(name));
    CHECK_THROWS(v.certificate.at("missing"));
  }
  CHECK(std::string(to_string(Verdict::ExistsByTheorem)) == "ExistsByThm");
  CHECK(std::string(to_string(Verdict::NotExistsByTheorem)) == "NotExistsByThm");
  CHECK(std::string(to_string(Verdict::Inconclusive)) == "Inconclusive");
}

TEST_CASE("critical archetypes") {
  CHECK(classify_critical(graph(fixtures::terminal_segment(1.0)), 1.4).tag == CriticalCase::TerminalEdge);
  CHECK(classify_critical(graph(fixtures::star_with_pendant()), 1.4).tag == CriticalCase::TerminalEdge);
  CHECK(classify_critical(graph(fixtures::cycle_with_pendant()), 1.4).tag == CriticalCase::TerminalEdge);
  CHECK(classify_critical(graph(fixtures::fat_line(1.0)), 2.7).tag == CriticalCase::CycleCovering);
  auto tad = classify_critical(graph(fixtures::tadpole()), 1.66);
  CHECK(tad.tag == CriticalCase::SingleHalfLine);
  CHECK(tad.ground_states);
  CHECK(tad.window_lo == 1.66);
  CHECK(tad.window_hi == doctest::Approx(kLineCriticalMass));
  auto sign = classify_critical(graph(fixtures::signpost(3.0)), 2.2);
  CHECK(sign.tag == CriticalCase::SeveralHalfLines);
  CHECK(sign.ground_states);
  CHECK_FALSE(classify_critical(graph(fixtures::fat_line(1.0)), 2.7).ground_states);
  CHECK(std::string(to_string(CriticalCase::SeveralHalfLines)) == "(iv)");
}

TEST_CASE("tadpole reduced critical mass sits in its window") {
  GnOptions o;
  o.h = 0.05;
  o.truncation = 15.0;
  auto c = classify_critical(graph(fixtures::tadpole()), o);
  CHECK(c.tag == CriticalCase::SingleHalfLine);
  CHECK(c.mu_k > kHalfLineCriticalMass);
  CHECK(c.mu_k < std::sqrt(3.0));
}

TEST_CASE("nonexistence flags") {
  GnConstants line{1.0 / std::sqrt(3.0), 1.0};
  auto star = nonexistence_check(graph(fixtures::star_with_pendant(2.0)), 3.0, 4.0, line);
  CHECK(star.no_nonnegative_lambda);
  CHECK_FALSE(star.no_nonpositive_lambda);
  auto loop = nonexistence_check(graph(fixtures::tadpole()), 3.0, 4.0, line);
  CHECK_FALSE(loop.no_nonnegative_lambda);
  auto small = nonexistence_check(graph(fixtures::tadpole(0.1)), 0.1, 4.0, line);
  CHECK(small.no_nonpositive_lambda);
  CHECK(small.certificate.at("metric_threshold") == doctest::Approx(1.0));
  CHECK_THROWS_AS(nonexistence_check(graph(fixtures::tadpole()), 0.0, 4.0, line), InputError);
}
