#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gratwave/error.hpp"

namespace gratwave {

struct BoundedEdge {
  std::string name;
  std::string v1;  // endpoint at x = 0
  std::string v2;  // endpoint at x = length
  double length = 0.0;
};

struct HalfLine {
  std::string name;
  std::string vertex;  // attachment vertex, x = 0
};

/// Raw, unvalidated content of a graph document.
struct GraphDescription {
  std::vector<std::string> vertices;
  std::vector<BoundedEdge> edges;
  std::vector<HalfLine> half_lines;
};

/// Why a graph description was rejected.
enum class GraphErrorKind {
  Syntax,
  UnknownVertex,
  DuplicateName,
  NonpositiveLength,
  Disconnected,
  NoHalfLine,
  EmptyCore,
};

class GraphError : public InputError {
 public:
  GraphError(GraphErrorKind kind, const std::string& what, int line = 0, int column = 0);
  GraphErrorKind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  GraphErrorKind kind_;
  int line_;
  int column_;
};

/// A connected metric multigraph with finitely many bounded edges and half-lines.
///
/// Vertices, bounded edges and half-lines are stored sorted by name; all
/// indices used by the rest of the library refer to these sorted orders.
/// Loops (v1 == v2) and parallel edges are allowed. Immutable once built.
class MetricGraph {
 public:
  struct Edge {
    std::string name;
    std::size_t v1;
    std::size_t v2;
    double length;
  };
  struct Ray {
    std::string name;
    std::size_t vertex;
  };

  /// Validates connectivity, positive lengths, at least one half-line and a
  /// non-empty compact core.
  static MetricGraph build(GraphDescription desc);

  /// Same checks without the noncompactness requirement: zero half-lines are
  /// accepted. Used for verification on compact test domains.
  static MetricGraph build_compact(GraphDescription desc);

  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Ray>& half_lines() const { return rays_; }

  std::size_t vertex_index(std::string_view name) const;
  /// Total degree: bounded edge ends plus half-lines; a loop counts twice.
  int degree(std::size_t vertex) const { return degree_[vertex]; }
  double core_length() const;

 private:
  static MetricGraph make(GraphDescription desc, bool require_half_line);

  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  std::vector<Ray> rays_;
  std::vector<int> degree_;
};

/// Parses the line-oriented graph document format:
///   vertex <name>
///   edge <name> <v1> <v2> <length>
///   halfline <name> <v>
/// '#' starts a comment; blank lines are ignored.
MetricGraph parse_graph(std::string_view text);
GraphDescription parse_graph_description(std::string_view text);

/// Emits the normalized document: vertices, edges, half-lines, each sorted by name.
std::string serialize(const MetricGraph& g);

/// FNV-1a 64-bit hash of the normalized document, as 16 hex digits.
std::string graph_hash(const MetricGraph& g);

/// Bridges of an undirected multigraph given as an edge list over `n_vertices`
/// vertices. Parallel edges and loops are handled (neither is ever a bridge of
/// itself); returns a flag per edge.
std::vector<bool> find_bridges(std::size_t n_vertices,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges);

bool has_terminal_edge(const MetricGraph& g);

struct CycleCovering {
  bool covered = false;
  /// For every edge (bounded edges first, then half-lines, in sorted order) the
  /// 2-edge-connected component of the auxiliary graph it lies in, or -1 for bridges.
  std::vector<int> cycle_tag;
  /// Name of one blocking bridge when not covered.
  std::optional<std::string> bridge;
};

/// Decides whether every edge lies on a loop or on an unbounded path joining two
/// distinct half-lines. Half-line ends are identified in one vertex at infinity,
/// and an edge qualifies iff it is not a bridge of that auxiliary multigraph.
CycleCovering admits_cycle_covering(const MetricGraph& g);

struct TopologyReport {
  int n_halflines = 0;
  double core_length = 0.0;
  bool has_terminal_edge = false;
  bool admits_cycle_covering = false;
  bool is_tree = false;
  int n_pendants = 0;
  std::vector<std::string> cut_edges;  // bridges of the compact core, sorted by name
};

TopologyReport classify_topology(const MetricGraph& g);

}  // namespace gratwave
