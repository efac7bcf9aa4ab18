#include "gratwave/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace gratwave {

namespace {

std::string kind_label(GraphErrorKind kind) {
  switch (kind) {
    case GraphErrorKind::Syntax: return "syntax error";
    case GraphErrorKind::UnknownVertex: return "unknown vertex";
    case GraphErrorKind::DuplicateName: return "duplicate name";
    case GraphErrorKind::NonpositiveLength: return "nonpositive length";
    case GraphErrorKind::Disconnected: return "disconnected";
    case GraphErrorKind::NoHalfLine: return "zero half-lines";
    case GraphErrorKind::EmptyCore: return "empty compact core";
  }
  return "graph error";
}

std::string located(GraphErrorKind kind, const std::string& what, int line, int column) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ", column " << column << ": ";
  os << kind_label(kind);
  if (!what.empty()) os << ": " << what;
  return os.str();
}

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

/// Connected components over the non-bridge edges; returns a component id per vertex.
std::vector<int> two_edge_components(std::size_t n_vertices,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                     const std::vector<bool>& bridge) {
  UnionFind uf(n_vertices);
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (!bridge[e]) uf.unite(edges[e].first, edges[e].second);
  std::map<std::size_t, int> ids;
  std::vector<int> comp(n_vertices);
  for (std::size_t v = 0; v < n_vertices; ++v) {
    auto [it, inserted] = ids.emplace(uf.find(v), static_cast<int>(ids.size()));
    comp[v] = it->second;
  }
  return comp;
}

}  // namespace

GraphError::GraphError(GraphErrorKind kind, const std::string& what, int line, int column)
    : InputError(located(kind, what, line, column)), kind_(kind), line_(line), column_(column) {}

MetricGraph MetricGraph::build(GraphDescription desc) { return make(std::move(desc), true); }

MetricGraph MetricGraph::build_compact(GraphDescription desc) { return make(std::move(desc), false); }

MetricGraph MetricGraph::make(GraphDescription desc, bool require_half_line) {
  MetricGraph g;
  g.vertices_ = desc.vertices;
  std::sort(g.vertices_.begin(), g.vertices_.end());
  if (auto dup = std::adjacent_find(g.vertices_.begin(), g.vertices_.end()); dup != g.vertices_.end())
    throw GraphError(GraphErrorKind::DuplicateName, "vertex '" + *dup + "'");

  std::set<std::string> edge_names;
  auto claim = [&](const std::string& name) {
    if (!edge_names.insert(name).second)
      throw GraphError(GraphErrorKind::DuplicateName, "edge '" + name + "'");
  };
  auto lookup = [&](const std::string& v) {
    auto it = std::lower_bound(g.vertices_.begin(), g.vertices_.end(), v);
    if (it == g.vertices_.end() || *it != v) throw GraphError(GraphErrorKind::UnknownVertex, "'" + v + "'");
    return static_cast<std::size_t>(it - g.vertices_.begin());
  };

  std::sort(desc.edges.begin(), desc.edges.end(),
            [](const BoundedEdge& a, const BoundedEdge& b) { return a.name < b.name; });
  for (const auto& e : desc.edges) {
    claim(e.name);
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw GraphError(GraphErrorKind::NonpositiveLength, "edge '" + e.name + "'");
    g.edges_.push_back({e.name, lookup(e.v1), lookup(e.v2), e.length});
  }
  std::sort(desc.half_lines.begin(), desc.half_lines.end(),
            [](const HalfLine& a, const HalfLine& b) { return a.name < b.name; });
  for (const auto& r : desc.half_lines) {
    claim(r.name);
    g.rays_.push_back({r.name, lookup(r.vertex)});
  }

  if (g.edges_.empty()) throw GraphError(GraphErrorKind::EmptyCore, "no bounded edges");
  if (require_half_line && g.rays_.empty()) throw GraphError(GraphErrorKind::NoHalfLine, "graph is compact");

  UnionFind uf(g.vertices_.size());
  for (const auto& e : g.edges_) uf.unite(e.v1, e.v2);
  for (std::size_t v = 1; v < g.vertices_.size(); ++v)
    if (uf.find(v) != uf.find(0))
      throw GraphError(GraphErrorKind::Disconnected,
                       "vertex '" + g.vertices_[v] + "' is not reachable from '" + g.vertices_[0] + "'");

  g.degree_.assign(g.vertices_.size(), 0);
  for (const auto& e : g.edges_) {
    ++g.degree_[e.v1];
    ++g.degree_[e.v2];
  }
  for (const auto& r : g.rays_) ++g.degree_[r.vertex];
  return g;
}

std::size_t MetricGraph::vertex_index(std::string_view name) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), name);
  if (it == vertices_.end() || *it != name) throw InputError("unknown vertex '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - vertices_.begin());
}

double MetricGraph::core_length() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.length;
  return total;
}

GraphDescription parse_graph_description(std::string_view text) {
  GraphDescription desc;
  struct Reference {
    std::string vertex;
    int line;
    int column;
  };
  std::vector<Reference> refs;
  std::set<std::string> declared;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = tokenize(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }

    const auto& key = tokens[0];
    auto expect = [&](std::size_t n, const char* usage) {
      if (tokens.size() != n) {
        int col = tokens.size() > n ? tokens[n].column : static_cast<int>(line.size()) + 1;
        throw GraphError(GraphErrorKind::Syntax, std::string("expected '") + usage + "'", line_no, col);
      }
    };
    if (key.text == "vertex") {
      expect(2, "vertex <name>");
      std::string name(tokens[1].text);
      if (!declared.insert(name).second)
        throw GraphError(GraphErrorKind::DuplicateName, "vertex '" + name + "'", line_no, tokens[1].column);
      desc.vertices.push_back(name);
    } else if (key.text == "edge") {
      expect(5, "edge <name> <v1> <v2> <length>");
      const auto& len_tok = tokens[4];
      double length = 0.0;
      auto [ptr, ec] = std::from_chars(len_tok.text.data(), len_tok.text.data() + len_tok.text.size(), length);
      if (ec != std::errc() || ptr != len_tok.text.data() + len_tok.text.size())
        throw GraphError(GraphErrorKind::Syntax, "invalid length '" + std::string(len_tok.text) + "'", line_no,
                         len_tok.column);
      if (!(length > 0.0) || !std::isfinite(length))
        throw GraphError(GraphErrorKind::NonpositiveLength, "edge '" + std::string(tokens[1].text) + "'", line_no,
                         len_tok.column);
      desc.edges.push_back({std::string(tokens[1].text), std::string(tokens[2].text), std::string(tokens[3].text),
                            length});
      refs.push_back({std::string(tokens[2].text), line_no, tokens[2].column});
      refs.push_back({std::string(tokens[3].text), line_no, tokens[3].column});
    } else if (key.text == "halfline") {
      expect(3, "halfline <name> <v>");
      desc.half_lines.push_back({std::string(tokens[1].text), std::string(tokens[2].text)});
      refs.push_back({std::string(tokens[2].text), line_no, tokens[2].column});
    } else {
      throw GraphError(GraphErrorKind::Syntax, "unknown keyword '" + std::string(key.text) + "'", line_no,
                       key.column);
    }
    if (end == text.size()) break;
  }

  for (const auto& r : refs)
    if (!declared.count(r.vertex))
      throw GraphError(GraphErrorKind::UnknownVertex, "'" + r.vertex + "'", r.line, r.column);
  return desc;
}

MetricGraph parse_graph(std::string_view text) { return MetricGraph::build(parse_graph_description(text)); }

std::string serialize(const MetricGraph& g) {
  std::ostringstream os;
  char buf[64];
  for (const auto& v : g.vertices()) os << "vertex " << v << '\n';
  for (const auto& e : g.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.length);
    os << "edge " << e.name << ' ' << g.vertices()[e.v1] << ' ' << g.vertices()[e.v2] << ' ' << buf << '\n';
  }
  for (const auto& r : g.half_lines()) os << "halfline " << r.name << ' ' << g.vertices()[r.vertex] << '\n';
  return os.str();
}

std::string graph_hash(const MetricGraph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(g)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<bool> find_bridges(std::size_t n_vertices,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n_vertices);  // (neighbor, edge id)
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [a, b] = edges[e];
    adj[a].push_back({b, e});
    if (a != b) adj[b].push_back({a, e});
  }

  std::vector<bool> bridge(edges.size(), false);
  std::vector<int> disc(n_vertices, -1), low(n_vertices, 0);
  int timer = 0;
  struct Frame {
    std::size_t vertex;
    std::size_t parent_edge;
    std::size_t next;
  };
  constexpr std::size_t none = static_cast<std::size_t>(-1);

  // Iterative DFS; skipping the parent edge by id (not by vertex) keeps parallel edges correct.
  for (std::size_t root = 0; root < n_vertices; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, none, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.vertex].size()) {
        auto [to, id] = adj[f.vertex][f.next++];
        if (id == f.parent_edge) continue;
        if (disc[to] >= 0) {
          low[f.vertex] = std::min(low[f.vertex], disc[to]);
        } else {
          disc[to] = low[to] = timer++;
          stack.push_back({to, id, 0});
        }
      } else {
        Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          std::size_t parent = stack.back().vertex;
          low[parent] = std::min(low[parent], low[done.vertex]);
          if (low[done.vertex] > disc[parent]) bridge[done.parent_edge] = true;
        }
      }
    }
  }
  return bridge;
}

bool has_terminal_edge(const MetricGraph& g) {
  return std::any_of(g.edges().begin(), g.edges().end(),
                     [&](const auto& e) { return g.degree(e.v1) == 1 || g.degree(e.v2) == 1; });
}

CycleCovering admits_cycle_covering(const MetricGraph& g) {
  const std::size_t infinity = g.vertices().size();
  std::vector<std::pair<std::size_t, std::size_t>> aux;
  for (const auto& e : g.edges()) aux.push_back({e.v1, e.v2});
  for (const auto& r : g.half_lines()) aux.push_back({r.vertex, infinity});

  auto bridge = find_bridges(infinity + 1, aux);
  auto comp = two_edge_components(infinity + 1, aux, bridge);

  CycleCovering out;
  out.covered = true;
  out.cycle_tag.resize(aux.size());
  for (std::size_t e = 0; e < aux.size(); ++e) {
    if (bridge[e]) {
      out.cycle_tag[e] = -1;
      if (out.covered) {
        out.covered = false;
        out.bridge = e < g.edges().size() ? g.edges()[e].name : g.half_lines()[e - g.edges().size()].name;
      }
    } else {
      out.cycle_tag[e] = comp[aux[e].first];
    }
  }
  return out;
}

TopologyReport classify_topology(const MetricGraph& g) {
  TopologyReport rep;
  rep.n_halflines = static_cast<int>(g.half_lines().size());
  rep.core_length = g.core_length();
  for (const auto& e : g.edges())
    if (g.degree(e.v1) == 1 || g.degree(e.v2) == 1) ++rep.n_pendants;
  rep.has_terminal_edge = rep.n_pendants > 0;
  rep.admits_cycle_covering = admits_cycle_covering(g).covered;
  rep.is_tree = g.edges().size() + 1 == g.vertices().size();

  std::vector<std::pair<std::size_t, std::size_t>> core;
  for (const auto& e : g.edges()) core.push_back({e.v1, e.v2});
  auto bridge = find_bridges(g.vertices().size(), core);
  for (std::size_t e = 0; e < core.size(); ++e)
    if (bridge[e]) rep.cut_edges.push_back(g.edges()[e].name);
  return rep;
}

}  // namespace gratwave
