#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gratwave/gn.hpp"
#include "gratwave/graph.hpp"

namespace gratwave {

/// Named numbers behind a verdict, in the order they were used.
struct Certificate {
  std::vector<std::pair<std::string, double>> numbers;
  std::vector<std::string> notes;

  void add(std::string name, double value) { numbers.emplace_back(std::move(name), value); }
  double at(const std::string& name) const;
};

/// Energy of the mass-μ field equal to A on the compact core and A e^{-κx} on
/// every half-line (closed form).
double competitor_energy(const MetricGraph& g, double mu, double p, double kappa);

struct Competitor {
  double kappa = 0.0;
  double energy = 0.0;
};

/// Minimizes competitor_energy over κ (log-spaced scan, then golden section).
Competitor best_competitor(const MetricGraph& g, double mu, double p);

/// Threshold constant c_p of the existence condition for p ∈ [4, 6). At p = 4
/// the 0⁰ factor is taken as 1, which gives c₄ = 1/2.
double threshold_constant(double p);

enum class Verdict { ExistsByTheorem, NotExistsByTheorem, Inconclusive };
const char* to_string(Verdict v);

/// Optimal-constant estimates consumed by the subcritical criteria.
struct GnConstants {
  double whole_p = 0.0;  // C(G, p)
  double sup = 0.0;      // C(G, ∞)
};

GnConstants estimate_gn_constants(const MetricGraph& g, double p, const GnOptions& opts = {});

struct SubcriticalVerdict {
  Verdict verdict = Verdict::Inconclusive;
  Certificate certificate;
};

/// Ground-state existence for p ∈ [4, 6):
///   exists       if μ^{(p-2)/(6-p)} |K| > N^{4/(6-p)} c_p
///   not exists   if μ^{(p-2)/(6-p)} |K| < (p/2)^{2/(6-p)} C(G,p)^{(4-p)/(6-p)} / C(G,∞)^p
/// Inconclusive when neither strict inequality holds.
SubcriticalVerdict classify_subcritical(const MetricGraph& g, double mu, double p, const GnConstants& constants);

enum class CriticalCase { TerminalEdge, CycleCovering, SingleHalfLine, SeveralHalfLines };
const char* to_string(CriticalCase c);  // "(i)" .. "(iv)"

struct CriticalClassification {
  CriticalCase tag = CriticalCase::TerminalEdge;
  double mu_k = 0.0;  // reduced critical mass estimate
  /// Ground states exist exactly for μ in [window_lo, window_hi]; empty when
  /// `ground_states` is false.
  bool ground_states = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::string summary;
};

/// Topological case of the critical (p = 6) problem and its predicted mass window.
CriticalClassification classify_critical(const MetricGraph& g, double mu_k);
/// Estimates μ_K from the core-restricted constant first.
CriticalClassification classify_critical(const MetricGraph& g, const GnOptions& opts = {});

struct NonexistenceFlags {
  bool no_nonpositive_lambda = false;  // metric criterion
  bool no_nonnegative_lambda = false;  // tree with at most one pendant
  Certificate certificate;
};

NonexistenceFlags nonexistence_check(const MetricGraph& g, double mu, double p, const GnConstants& constants);

}  // namespace gratwave
