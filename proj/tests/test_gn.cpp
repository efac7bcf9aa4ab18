#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gratwave/gn.hpp"

using namespace gratwave;
using fixtures::graph;

namespace {

GnOptions coarse() {
  GnOptions o;
  o.h = 0.05;
  o.truncation = 15.0;
  return o;
}

}  // namespace

TEST_CASE("quotient of the line soliton at p = 4") {
  // u = sech: ∫u⁴ = 4/3, ∫u'² = 2/3, ∫u² = 2.
  const double exact = (4.0 / 3.0) / (std::sqrt(2.0 / 3.0) * std::pow(2.0, 1.5));
  CHECK(exact == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

  Grid grid = Grid::build(graph(fixtures::fat_line(30.0)), 0.01, 20.0);
  Eigen::VectorXd u = interpolate(grid, [&](std::size_t e, double x) {
    const auto& eg = grid.edges()[e];
    if (eg.half_line) return 1.0 / std::cosh(15.0 + x);
    return 1.0 / std::cosh(x - 15.0);
  });
  CHECK(gn_quotient(grid, u, 4.0, GnVariant::WholeGraph) == doctest::Approx(exact).epsilon(1e-4));
  CHECK(gn_quotient(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n_free())), 4.0,
                    GnVariant::WholeGraph) == 0.0);
}

TEST_CASE("quotient is scale and homothety invariant") {
  Grid grid = Grid::build(graph(fixtures::tadpole()), 0.05, 10.0);
  Eigen::VectorXd u = interpolate(grid, [](std::size_t, double x) { return std::exp(-0.3 * x) + 0.1; });
  for (auto variant : {GnVariant::WholeGraph, GnVariant::CoreRestricted, GnVariant::SupNorm}) {
    double q = gn_quotient(grid, u, 4.5, variant);
    CHECK(gn_quotient(grid, 3.7 * u, 4.5, variant) == doctest::Approx(q).epsilon(1e-12));
    CHECK(gn_quotient(grid, -u, 4.5, variant) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("line and half-line critical masses") {
  GnEstimate line = gn_constant(graph(fixtures::fat_line(20.0)), 6.0, GnVariant::WholeGraph, coarse());
  CHECK(critical_mass(line.value) == doctest::Approx(kLineCriticalMass).epsilon(0.02));
  CHECK(gn_quotient(*line.grid, line.maximizer, 6.0, GnVariant::WholeGraph) ==
        doctest::Approx(line.value).epsilon(1e-10));

  GnEstimate half = gn_constant(graph(fixtures::terminal_segment(20.0)), 6.0, GnVariant::WholeGraph, coarse());
  CHECK(critical_mass(half.value) == doctest::Approx(kHalfLineCriticalMass).epsilon(0.02));
}

TEST_CASE("line constants at p = 4 and for the sup norm") {
  GnOptions o = coarse();
  GnEstimate c4 = gn_constant(graph(fixtures::fat_line(3.0)), 4.0, GnVariant::WholeGraph, o);
  CHECK(c4.value == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(0.01));
  CHECK(c4.value <= 1.0 / std::sqrt(3.0) * (1 + 1e-3));
  GnEstimate sup = gn_constant(graph(fixtures::fat_line(3.0)), 4.0, GnVariant::SupNorm, o);
  CHECK(sup.value == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sup.value <= 1.0 + 1e-3);
}

TEST_CASE("core-restricted constant does not exceed the whole-graph one") {
  MetricGraph g = graph(fixtures::tadpole());
  GnEstimate core = gn_constant(g, 6.0, GnVariant::CoreRestricted, coarse());
  GnEstimate whole = gn_constant(g, 6.0, GnVariant::WholeGraph, coarse());
  CHECK(core.value <= whole.value * (1 + 1e-9));
  CHECK(core.value > 0.0);
}

TEST_CASE("refinement history") {
  GnOptions o = coarse();
  o.h = 0.1;
  o.levels = 2;
  GnEstimate est = gn_constant(graph(fixtures::tadpole()), 6.0, GnVariant::CoreRestricted, o);
  REQUIRE(est.history.size() == 2);
  CHECK(est.history[0].first == doctest::Approx(0.1));
  CHECK(est.history[1].first == doctest::Approx(0.05));
  CHECK(est.value == est.history.back().second);
  CHECK(std::abs(est.history[1].second - est.history[0].second) < 0.01 * est.value);
}

TEST_CASE("critical mass conversion") {
  CHECK(critical_mass(3.0) == 1.0);
  CHECK(critical_mass(0.75) == 2.0);
  CHECK(kHalfLineCriticalMass == doctest::Approx(1.3603495231756633));
}
