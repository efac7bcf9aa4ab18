#pragma once

#include <cstdio>
#include <string>

#include "gratwave/graph.hpp"

namespace fixtures {

inline gratwave::MetricGraph graph(const std::string& text) { return gratwave::parse_graph(text); }

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Loop of length `loop` with one half-line at its vertex.
inline std::string tadpole(double loop = 2.0) {
  return "vertex a\nedge loop a a " + num(loop) + "\nhalfline h a\n";
}

/// Segment of length `core` with a half-line at each end.
inline std::string fat_line(double core) {
  return "vertex a\nvertex b\nedge core a b " + num(core) + "\nhalfline left a\nhalfline right b\n";
}

/// Segment of length `core` with one half-line at b; a is a free end.
inline std::string terminal_segment(double core) {
  return "vertex a\nvertex b\nedge core a b " + num(core) + "\nhalfline right b\n";
}

/// Cycle of two parallel edges, a pendant, two half-lines.
inline std::string cycle_with_pendant() {
  return "vertex a\nvertex b\nvertex t\n"
         "edge e1 a b 1\nedge e2 b a 1.5\nedge pend b t 1\n"
         "halfline h1 a\nhalfline h2 a\n";
}

/// Two half-lines at v, stem v-w, loop at w.
inline std::string signpost(double stem = 1.0, double loop = 2.0) {
  return "vertex v\nvertex w\nedge stem v w " + num(stem) + "\nedge loop w w " + num(loop) +
         "\nhalfline h1 v\nhalfline h2 v\n";
}

/// Three half-lines at c plus one bounded pendant edge c-t.
inline std::string star_with_pendant(double pendant = 1.0) {
  return "vertex c\nvertex t\nedge pend c t " + num(pendant) + "\nhalfline h1 c\nhalfline h2 c\nhalfline h3 c\n";
}

}  // namespace fixtures
