#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "gratwave/existence.hpp"
#include "gratwave/graph.hpp"
#include "oracles.hpp"

using namespace gratwave;
using fixtures::graph;

namespace {

GraphErrorKind error_kind(const std::string& text) {
  try {
    parse_graph(text);
  } catch (const GraphError& e) {
    return e.kind();
  }
  FAIL("document was accepted");
  return GraphErrorKind::Syntax;
}

std::string error_message(const std::string& text) {
  try {
    parse_graph(text);
  } catch (const GraphError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("tadpole parses into one loop and one half-line") {
  MetricGraph g = graph(fixtures::tadpole(2.0));
  REQUIRE(g.vertices().size() == 1);
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].v1 == g.edges()[0].v2);
  CHECK(g.degree(0) == 3);
  CHECK(g.core_length() == doctest::Approx(2.0));
}

TEST_CASE("parse diagnostics are distinct") {
  CHECK(error_kind("vertex c\nhalfline a c\nhalfline b c\nhalfline d c\n") == GraphErrorKind::EmptyCore);
  CHECK(error_message("vertex c\nhalfline a c\nhalfline b c\nhalfline d c\n").find("empty compact core") !=
        std::string::npos);
  const std::string two_parts =
      "vertex a\nvertex b\nvertex c\nvertex d\nedge e a b 1\nedge f c d 1\nhalfline h a\nhalfline k c\n";
  CHECK(error_kind(two_parts) == GraphErrorKind::Disconnected);
  CHECK(error_message(two_parts).find("disconnected") != std::string::npos);
  CHECK(error_kind("vertex a\nvertex b\nedge e a b 1\n") == GraphErrorKind::NoHalfLine);
  CHECK(error_message("vertex a\nvertex b\nedge e a b 1\n").find("zero half-lines") != std::string::npos);
  CHECK(error_kind("vertex a\nedge e a a 0\nhalfline h a\n") == GraphErrorKind::NonpositiveLength);
  CHECK(error_kind("vertex a\nedge e a a -1\nhalfline h a\n") == GraphErrorKind::NonpositiveLength);
  CHECK(error_kind("vertex a\nedge e a b 1\nhalfline h a\n") == GraphErrorKind::UnknownVertex);
  CHECK(error_kind("vertex a\nvertex a\nedge e a a 1\nhalfline h a\n") == GraphErrorKind::DuplicateName);
  CHECK(error_kind("vertex a\nedge e a a 1\nhalfline e a\n") == GraphErrorKind::DuplicateName);
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_graph("vertex a\n# comment\n  edge e a a x1\nhalfline h a\n");
    FAIL("accepted");
  } catch (const GraphError& e) {
    CHECK(e.kind() == GraphErrorKind::Syntax);
    CHECK(e.line() == 3);
    CHECK(e.column() == 14);
  }
  try {
    parse_graph("vertex a\nbogus a\n");
    FAIL("accepted");
  } catch (const GraphError& e) {
    CHECK(e.kind() == GraphErrorKind::Syntax);
    CHECK(e.line() == 2);
    CHECK(e.column() == 1);
  }
}

TEST_CASE("comments and blank lines are ignored") {
  MetricGraph g = graph("# tadpole\n\nvertex a   # the only vertex\nedge loop a a 2\n\nhalfline h a\n");
  CHECK(g.edges().size() == 1);
}

TEST_CASE("serialize is normalized and round-trips") {
  MetricGraph g = graph("halfline z w\nedge stem v w 1\nvertex w\nedge loop w w 2.5\nvertex v\nhalfline y v\n");
  std::string doc = serialize(g);
  CHECK(doc == "vertex v\nvertex w\nedge loop w w 2.5\nedge stem v w 1\nhalfline y v\nhalfline z w\n");
  MetricGraph again = graph(doc);
  CHECK(serialize(again) == doc);
  CHECK(graph_hash(again) == graph_hash(g));
  CHECK(graph_hash(g).size() == 16);
  CHECK(graph_hash(graph(fixtures::tadpole(2.0))) != graph_hash(graph(fixtures::tadpole(2.5))));
}

TEST_CASE("lengths survive serialization exactly") {
  MetricGraph g = graph(fixtures::tadpole(0.1 + 0.2));
  CHECK(graph(serialize(g)).edges()[0].length == g.edges()[0].length);
}

TEST_CASE("terminal edges") {
  CHECK_FALSE(has_terminal_edge(graph(fixtures::tadpole())));
  CHECK(has_terminal_edge(graph(fixtures::terminal_segment(1.0))));
  CHECK(has_terminal_edge(graph(fixtures::cycle_with_pendant())));
  CHECK_FALSE(has_terminal_edge(graph(fixtures::signpost())));
}

TEST_CASE("cycle covering through the vertex at infinity") {
  CycleCovering tad = admits_cycle_covering(graph(fixtures::tadpole()));
  CHECK_FALSE(tad.covered);
  REQUIRE(tad.bridge.has_value());
  CHECK(*tad.bridge == "h");

  CycleCovering line = admits_cycle_covering(graph(fixtures::fat_line(1.0)));
  CHECK(line.covered);
  CHECK_FALSE(line.bridge.has_value());
  for (int tag : line.cycle_tag) CHECK(tag >= 0);

  CHECK_FALSE(admits_cycle_covering(graph(fixtures::star_with_pendant())).covered);
  CycleCovering sign = admits_cycle_covering(graph(fixtures::signpost()));
  CHECK_FALSE(sign.covered);
  CHECK(*sign.bridge == "stem");
}

TEST_CASE("bridges agree with deletion oracle on random multigraphs") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + rng() % 7;
    std::size_t m = rng() % 10;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < m; ++i) edges.emplace_back(rng() % n, rng() % n);
    CHECK(find_bridges(n, edges) == oracle::bridges_by_deletion(n, edges));
  }
}

TEST_CASE("topology reports of the reference graphs") {
  TopologyReport tad = classify_topology(graph(fixtures::tadpole()));
  CHECK(tad.n_halflines == 1);
  CHECK_FALSE(tad.has_terminal_edge);
  CHECK_FALSE(tad.admits_cycle_covering);
  CHECK_FALSE(tad.is_tree);
  CHECK(tad.n_pendants == 0);

  TopologyReport star = classify_topology(graph(fixtures::star_with_pendant()));
  CHECK(star.n_halflines == 3);
  CHECK(star.has_terminal_edge);
  CHECK(star.is_tree);
  CHECK(star.n_pendants == 1);
  CHECK(star.cut_edges == std::vector<std::string>{"pend"});

  TopologyReport sign = classify_topology(graph(fixtures::signpost()));
  CHECK(sign.cut_edges == std::vector<std::string>{"stem"});
  CHECK_FALSE(sign.is_tree);
}

TEST_CASE("report invariants on assorted graphs") {
  const std::vector<std::string> docs = {
      fixtures::tadpole(),          fixtures::fat_line(3.0),       fixtures::terminal_segment(2.0),
      fixtures::cycle_with_pendant(), fixtures::signpost(),        fixtures::star_with_pendant(),
      "vertex a\nvertex b\nvertex c\nedge x a b 1\nedge y b c 1\nhalfline h a\n",
      "vertex a\nvertex b\nedge x a b 1\nedge y a b 2\nhalfline h a\nhalfline k b\n",
  };
  for (const auto& d : docs) {
    MetricGraph g = graph(d);
    TopologyReport r = classify_topology(g);
    if (r.is_tree) CHECK(r.cut_edges.size() == g.edges().size());
    // A tree is covered only through paths between distinct half-lines.
    if (r.is_tree && r.n_halflines <= 1) CHECK_FALSE(r.admits_cycle_covering);
    if (r.has_terminal_edge) {
      CHECK(r.n_pendants >= 1);
      CHECK_FALSE(r.admits_cycle_covering);
    }
  }
}

TEST_CASE("critical archetypes fall into cases (i) to (iv)") {
  CHECK(classify_critical(graph(fixtures::cycle_with_pendant()), 1.5).tag == CriticalCase::TerminalEdge);
  CHECK(classify_critical(graph(fixtures::fat_line(2.0)), 1.5).tag == CriticalCase::CycleCovering);
  CHECK(classify_critical(graph(fixtures::tadpole()), 1.5).tag == CriticalCase::SingleHalfLine);
  CHECK(classify_critical(graph(fixtures::signpost()), 1.5).tag == CriticalCase::SeveralHalfLines);
}
