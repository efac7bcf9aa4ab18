#include "gratwave/existence.hpp"

#include <cmath>
#include <sstream>

namespace gratwave {

namespace {

void check_subcritical_exponent(double p) {
  if (!(p >= 4.0) || !(p < 6.0)) throw InputError("criterion needs p in [4, 6)");
}

}  // namespace

double Certificate::at(const std::string& name) const {
  for (const auto& [k, v] : numbers)
    if (k == name) return v;
  throw InputError("certificate has no entry '" + name + "'");
}

double competitor_energy(const MetricGraph& g, double mu, double p, double kappa) {
  if (!(kappa > 0.0)) throw InputError("competitor decay rate must be positive");
  const double core = g.core_length();
  const auto n = static_cast<double>(g.half_lines().size());
  // Mass: A²(|K| + N/(2κ)); kinetic ½ N A² κ/2; core term |K| A^p / p.
  const double amp2 = mu / (core + n / (2.0 * kappa));
  return n * amp2 * kappa / 4.0 - core * std::pow(amp2, p / 2.0) / p;
}

Competitor best_competitor(const MetricGraph& g, double mu, double p) {
  auto f = [&](double log_kappa) { return competitor_energy(g, mu, p, std::exp(log_kappa)); };
  const double lo = std::log(1e-8), hi = std::log(1e4);
  const int samples = 400;
  double best_x = lo, best_f = f(lo);
  for (int i = 1; i < samples; ++i) {
    double x = lo + (hi - lo) * i / (samples - 1);
    double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  double step = (hi - lo) / (samples - 1);
  double a = best_x - step, b = best_x + step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < 80; ++k) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  double x = f1 < f2 ? x1 : x2;
  if (std::min(f1, f2) > best_f) x = best_x;
  return {std::exp(x), f(x)};
}

double threshold_constant(double p) {
  check_subcritical_exponent(p);
  const double base = p * (p - 4.0) / 16.0;
  const double first = std::pow(base, 2.0 / (p - 2.0));
  // (4-p)/(p-2) is 0 at p = 4; the limit convention 0⁰ = 1 applies.
  const double second_exp = (4.0 - p) / (p - 2.0);
  const double second = (second_exp == 0.0) ? p / 8.0 : p / 8.0 * std::pow(base, second_exp);
  return std::pow(first + second, (p - 2.0) / (6.0 - p));
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ExistsByTheorem: return "ExistsByThm";
    case Verdict::NotExistsByTheorem: return "NotExistsByThm";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

GnConstants estimate_gn_constants(const MetricGraph& g, double p, const GnOptions& opts) {
  GnConstants c;
  c.whole_p = gn_constant(g, p, GnVariant::WholeGraph, opts).value;
  c.sup = gn_constant(g, p, GnVariant::SupNorm, opts).value;
  return c;
}

SubcriticalVerdict classify_subcritical(const MetricGraph& g, double mu, double p, const GnConstants& constants) {
  check_subcritical_exponent(p);
  if (!(mu > 0.0)) throw InputError("mass must be positive");
  const double n = static_cast<double>(g.half_lines().size());
  const double core = g.core_length();
  const double lhs = std::pow(mu, (p - 2.0) / (6.0 - p)) * core;
  const double cp = threshold_constant(p);
  const double exists_rhs = std::pow(n, 4.0 / (6.0 - p)) * cp;
  const double absent_rhs = std::pow(p / 2.0, 2.0 / (6.0 - p)) *
                            std::pow(constants.whole_p, (4.0 - p) / (6.0 - p)) / std::pow(constants.sup, p);

  SubcriticalVerdict out;
  auto& cert = out.certificate;
  cert.add("p", p);
  cert.add("mu", mu);
  cert.add("N", n);
  cert.add("core_length", core);
  cert.add("c_p", cp);
  cert.add("C_G_p", constants.whole_p);
  cert.add("C_G_inf", constants.sup);
  cert.add("scaled_core_length", lhs);
  cert.add("existence_threshold", exists_rhs);
  cert.add("nonexistence_threshold", absent_rhs);
  if (p == 4.0) cert.notes.push_back("c_4 = 1/2 from the 0^0 -> 1 limit convention");
  cert.notes.push_back("C(G,p) and C(G,inf) are lower estimates from the truncated discrete problem");

  const bool exists = lhs > exists_rhs;
  const bool absent = lhs < absent_rhs;
  if (exists && absent) {
    cert.notes.push_back("both criteria fire; the estimates are inconsistent");
    out.verdict = Verdict::Inconclusive;
  } else if (exists) {
    out.verdict = Verdict::ExistsByTheorem;
  } else if (absent) {
    out.verdict = Verdict::NotExistsByTheorem;
  }
  return out;
}

const char* to_string(CriticalCase c) {
  switch (c) {
    case CriticalCase::TerminalEdge: return "(i)";
    case CriticalCase::CycleCovering: return "(ii)";
    case CriticalCase::SingleHalfLine: return "(iii)";
    case CriticalCase::SeveralHalfLines: return "(iv)";
  }
  return "?";
}

CriticalClassification classify_critical(const MetricGraph& g, double mu_k) {
  const TopologyReport topo = classify_topology(g);
  CriticalClassification out;
  out.mu_k = mu_k;
  std::ostringstream os;
  if (topo.has_terminal_edge) {
    out.tag = CriticalCase::TerminalEdge;
    os << "terminal edge: mu_K = mu_R+, no ground state for any mass";
  } else if (topo.admits_cycle_covering) {
    out.tag = CriticalCase::CycleCovering;
    os << "cycle covering: mu_K = mu_R, no ground state for any mass";
  } else if (topo.n_halflines == 1) {
    out.tag = CriticalCase::SingleHalfLine;
    out.ground_states = true;
    os << "one half-line, no terminal edge: mu_R+ < mu_K < sqrt(3), ground states iff mass in [mu_K, mu_R]";
  } else {
    out.tag = CriticalCase::SeveralHalfLines;
    out.ground_states = std::abs(mu_k - kLineCriticalMass) > 1e-3 * kLineCriticalMass;
    os << "several half-lines, no terminal edge, no cycle covering: mu_R+ < mu_K <= mu_R";
    os << (out.ground_states ? ", ground states iff mass in [mu_K, mu_R]"
                             : ", mu_K indistinguishable from mu_R so the window is undecided");
  }
  if (out.ground_states) {
    out.window_lo = mu_k;
    out.window_hi = kLineCriticalMass;
  }
  out.summary = os.str();
  return out;
}

CriticalClassification classify_critical(const MetricGraph& g, const GnOptions& opts) {
  return classify_critical(g, critical_mass(gn_constant(g, 6.0, GnVariant::CoreRestricted, opts).value));
}

NonexistenceFlags nonexistence_check(const MetricGraph& g, double mu, double p, const GnConstants& constants) {
  check_subcritical_exponent(p);
  if (!(mu > 0.0)) throw InputError("mass must be positive");
  const TopologyReport topo = classify_topology(g);
  const double lhs = std::pow(mu, (p - 2.0) / (6.0 - p)) * topo.core_length;
  const double rhs = std::pow(constants.whole_p, (4.0 - p) / (6.0 - p)) / std::pow(constants.sup, p);

  NonexistenceFlags out;
  out.no_nonpositive_lambda = lhs < rhs;
  out.no_nonnegative_lambda = topo.is_tree && topo.n_pendants <= 1;
  out.certificate.add("p", p);
  out.certificate.add("mu", mu);
  out.certificate.add("scaled_core_length", lhs);
  out.certificate.add("metric_threshold", rhs);
  out.certificate.add("C_G_p", constants.whole_p);
  out.certificate.add("C_G_inf", constants.sup);
  out.certificate.add("is_tree", topo.is_tree ? 1.0 : 0.0);
  out.certificate.add("pendants", topo.n_pendants);
  return out;
}

}  // namespace gratwave
