#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "parabctl/certificates.hpp"
#include "parabctl/controllers.hpp"
#include "parabctl/diffusion.hpp"
#include "parabctl/error.hpp"
#include "parabctl/grid.hpp"
#include "parabctl/problem.hpp"
#include "parabctl/solver.hpp"

namespace parabctl {

/// A run description loaded from a sectioned key = value file:
///
///   # comment
///   [problem]
///   epsilon = constant
///   eps_value = 1
///   gamma = 0, 0.5
///   [gains]
///   controller = neumann_cubic_both
///   m0 = 0.1
///
/// Sections: problem, gains, solver, outputs, sweep, invert. Unknown
/// sections and keys are rejected.
struct Scenario {
  // [problem]
  std::string epsilon = "constant";  // constant | quadratic | table
  double eps_value = 1.0;            // constant value, or quadratic base
  double eps_a = 0.0;                // quadratic coefficient
  std::vector<double> eps_table_u;
  std::vector<double> eps_table_values;
  std::string eps_envelope = "auto";  // auto | zero | constant:<c> | linear:<c>
  std::vector<double> gamma;
  double p = 2.0;
  std::string u0 = "zero";  // zero | constant | sine | bump | table
  double u0_amplitude = 0.0;
  std::vector<double> u0_table;
  std::optional<double> u0_kappa_fraction;  // choose amplitude so kappa0 = fraction sqrt(2 Omega)

  // [gains]
  LawKind controller = LawKind::neumann_cubic_both;
  FreeGains free;

  // [solver]
  SolverConfig solver;
  std::optional<double> t_end_sigma;  // t_end = value / sigma

  // [outputs]
  std::string trajectory_file = "trajectory.csv";
  std::string snapshots_file = "snapshots.csv";
  std::string summary_file = "summary.json";
  std::string certificate_file = "certificate.json";
  std::string sweep_file = "sweep.csv";
  std::string invert_file = "invert.csv";

  // [sweep]
  std::string sweep_axis = "eps_lower";  // eps_lower | M | m_sum | gamma_scale
  std::vector<double> sweep_values;

  // [invert]
  double y_min = -10.0;
  double y_max = 10.0;
  int y_count = 21;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_real(const std::string& v, const std::string& where) {
  double out = 0.0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  if (!v.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc{} || ptr != e || v.empty()) throw ConfigError(where + ": expected a number, got '" + v + "'");
  return out;
}

inline std::vector<double> parse_list(const std::string& v, const std::string& where) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), where));
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + ": expected true/false, got '" + v + "'");
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::string section;
  std::string line;
  int line_no = 0;
  std::set<std::string> seen;

  using Setter = void (*)(Scenario&, const std::string&, const std::string&);
  static const std::map<std::string, Setter> setters = {
      {"problem.epsilon", [](Scenario& s, const std::string& v, const std::string&) { s.epsilon = v; }},
      {"problem.eps_value", [](Scenario& s, const std::string& v, const std::string& w) { s.eps_value = detail::parse_real(v, w); }},
      {"problem.eps_a", [](Scenario& s, const std::string& v, const std::string& w) { s.eps_a = detail::parse_real(v, w); }},
      {"problem.eps_table_u", [](Scenario& s, const std::string& v, const std::string& w) { s.eps_table_u = detail::parse_list(v, w); }},
      {"problem.eps_table_values", [](Scenario& s, const std::string& v, const std::string& w) { s.eps_table_values = detail::parse_list(v, w); }},
      {"problem.eps_envelope", [](Scenario& s, const std::string& v, const std::string&) { s.eps_envelope = v; }},
      {"problem.gamma", [](Scenario& s, const std::string& v, const std::string& w) { s.gamma = detail::parse_list(v, w); }},
      {"problem.p", [](Scenario& s, const std::string& v, const std::string& w) { s.p = detail::parse_real(v, w); }},
      {"problem.u0", [](Scenario& s, const std::string& v, const std::string&) { s.u0 = v; }},
      {"problem.u0_amplitude", [](Scenario& s, const std::string& v, const std::string& w) { s.u0_amplitude = detail::parse_real(v, w); }},
      {"problem.u0_table", [](Scenario& s, const std::string& v, const std::string& w) { s.u0_table = detail::parse_list(v, w); }},
      {"problem.u0_kappa_fraction", [](Scenario& s, const std::string& v, const std::string& w) { s.u0_kappa_fraction = detail::parse_real(v, w); }},
      {"gains.controller", [](Scenario& s, const std::string& v, const std::string& w) {
         try {
           s.controller = law_kind_from_string(v);
         } catch (const InvalidParameter& e) {
           throw ConfigError(w + ": " + e.what());
         }
       }},
      {"gains.m0", [](Scenario& s, const std::string& v, const std::string& w) { s.free.m0 = detail::parse_real(v, w); }},
      {"gains.m1", [](Scenario& s, const std::string& v, const std::string& w) { s.free.m1 = detail::parse_real(v, w); }},
      {"gains.k0", [](Scenario& s, const std::string& v, const std::string& w) { s.free.k0 = detail::parse_real(v, w); }},
      {"gains.k1", [](Scenario& s, const std::string& v, const std::string& w) { s.free.k1 = detail::parse_real(v, w); }},
      {"gains.M", [](Scenario& s, const std::string& v, const std::string& w) { s.free.M = detail::parse_real(v, w); }},
      {"gains.m_tilde", [](Scenario& s, const std::string& v, const std::string& w) { s.free.m_tilde = detail::parse_real(v, w); }},
      {"solver.nodes", [](Scenario& s, const std::string& v, const std::string& w) {
         const double n = detail::parse_real(v, w);
         if (n < 3 || n != std::floor(n)) throw ConfigError(w + ": nodes must be a positive integer");
         s.solver.n_nodes = static_cast<std::size_t>(n);
       }},
      {"solver.t_end", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.t_end = detail::parse_real(v, w); }},
      {"solver.t_end_sigma", [](Scenario& s, const std::string& v, const std::string& w) { s.t_end_sigma = detail::parse_real(v, w); }},
      {"solver.cfl_safety", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.cfl_safety = detail::parse_real(v, w); }},
      {"solver.record_every", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.record_every = detail::parse_real(v, w); }},
      {"solver.snapshot_every", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.snapshot_every = detail::parse_real(v, w); }},
      {"solver.blowup_max", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.blowup_max = detail::parse_real(v, w); }},
      {"solver.dt_min", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.dt_min = detail::parse_real(v, w); }},
      {"solver.dt_max", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.dt_max = detail::parse_real(v, w); }},
      {"solver.integrator", [](Scenario& s, const std::string& v, const std::string& w) {
         try {
           s.solver.integrator = integrator_from_string(v);
         } catch (const InvalidParameter& e) {
           throw ConfigError(w + ": " + e.what());
         }
       }},
      {"solver.compatibilize", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.compatibilize = detail::parse_bool(v, w); }},
      {"outputs.trajectory", [](Scenario& s, const std::string& v, const std::string&) { s.trajectory_file = v; }},
      {"outputs.snapshots", [](Scenario& s, const std::string& v, const std::string&) { s.snapshots_file = v; }},
      {"outputs.summary", [](Scenario& s, const std::string& v, const std::string&) { s.summary_file = v; }},
      {"outputs.certificate", [](Scenario& s, const std::string& v, const std::string&) { s.certificate_file = v; }},
      {"outputs.sweep", [](Scenario& s, const std::string& v, const std::string&) { s.sweep_file = v; }},
      {"outputs.invert", [](Scenario& s, const std::string& v, const std::string&) { s.invert_file = v; }},
      // record_every may also be set next to the output paths
      {"outputs.record_every", [](Scenario& s, const std::string& v, const std::string& w) { s.solver.record_every = detail::parse_real(v, w); }},
      {"sweep.axis", [](Scenario& s, const std::string& v, const std::string& w) {
         if (v != "eps_lower" && v != "M" && v != "m_sum" && v != "gamma_scale") {
           throw ConfigError(w + ": axis must be one of eps_lower, M, m_sum, gamma_scale");
         }
         s.sweep_axis = v;
       }},
      {"sweep.values", [](Scenario& s, const std::string& v, const std::string& w) { s.sweep_values = detail::parse_list(v, w); }},
      {"invert.y_min", [](Scenario& s, const std::string& v, const std::string& w) { s.y_min = detail::parse_real(v, w); }},
      {"invert.y_max", [](Scenario& s, const std::string& v, const std::string& w) { s.y_max = detail::parse_real(v, w); }},
      {"invert.count", [](Scenario& s, const std::string& v, const std::string& w) {
         const double n = detail::parse_real(v, w);
         if (n < 1 || n != std::floor(n)) throw ConfigError(w + ": count must be a positive integer");
         s.y_count = static_cast<int>(n);
       }},
  };
  static const std::set<std::string> sections = {"problem", "gains", "solver", "outputs", "sweep", "invert"};

  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    const auto hash = line.find('#');
    const std::string content = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError(where + ": malformed section header");
      section = detail::trim(std::string_view(content).substr(1, content.size() - 2));
      if (!sections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of any section");
    const std::string key = section + "." + detail::trim(std::string_view(content).substr(0, eq));
    const std::string value = detail::trim(std::string_view(content).substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    it->second(sc, value, where + " (" + key + ")");
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

/// Diffusion model with its envelope, validated by sampling over |u| <= state_range.
inline DiffusionModel build_diffusion(const Scenario& sc, double state_range = 1.0) {
  try {
    DiffusionModel model = [&] {
      if (sc.epsilon == "constant") return DiffusionModel::constant(sc.eps_value);
      if (sc.epsilon == "quadratic") return DiffusionModel::quadratic(sc.eps_value, sc.eps_a);
      if (sc.epsilon == "table") return DiffusionModel::table(sc.eps_table_u, sc.eps_table_values);
      throw ConfigError("problem.epsilon must be constant, quadratic or table");
    }();

    const std::string& env = sc.eps_envelope;
    if (env == "zero") {
      model = model.with_envelope([](double) { return 0.0; });
    } else if (env.rfind("constant:", 0) == 0) {
      const double c = detail::parse_real(env.substr(9), "problem.eps_envelope");
      model = model.with_envelope([c](double) { return c; });
    } else if (env.rfind("linear:", 0) == 0) {
      const double c = detail::parse_real(env.substr(7), "problem.eps_envelope");
      model = model.with_envelope([c](double s) { return c * s; });
    } else if (env != "auto") {
      throw ConfigError("problem.eps_envelope must be auto, zero, constant:<c> or linear:<c>");
    }

    const auto v = model.validate(state_range);
    if (!v.ok()) {
      throw ConfigError("diffusion model fails validation on |u| <= " + std::to_string(state_range) +
                        (v.lower_bound_ok ? "" : " (eps below eps_lower)") +
                        (v.envelope_bounds_derivative ? "" : " (envelope below |eps'|)") +
                        (v.envelope_nondecreasing ? "" : " (envelope decreasing)"));
    }
    return model;
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

/// Shape of the initial condition with unit amplitude (tables are used as given).
inline GridFunction initial_shape(const Scenario& sc, std::size_t n_nodes, double amplitude) {
  constexpr double pi = std::numbers::pi;
  if (sc.u0 == "zero") return GridFunction::zeros(n_nodes);
  if (sc.u0 == "constant") return GridFunction::sample(n_nodes, [amplitude](double) { return amplitude; });
  if (sc.u0 == "sine") {
    return GridFunction::sample(n_nodes, [amplitude](double x) { return amplitude * std::sin(pi * x); });
  }
  if (sc.u0 == "bump") {
    return GridFunction::sample(n_nodes,
                                [amplitude](double x) { return amplitude * 0.5 * (1.0 - std::cos(2.0 * pi * x)); });
  }
  if (sc.u0 == "table") {
    const auto& tab = sc.u0_table;
    if (tab.size() < 2) throw ConfigError("problem.u0_table needs at least 2 values");
    // Piecewise-linear over equally spaced abscissae on [0, 1].
    return GridFunction::sample(n_nodes, [&tab, amplitude](double x) {
      const double pos = x * static_cast<double>(tab.size() - 1);
      const std::size_t k = std::min(static_cast<std::size_t>(pos), tab.size() - 2);
      const double w = pos - static_cast<double>(k);
      const double scale = amplitude == 0.0 ? 1.0 : amplitude;
      return scale * ((1.0 - w) * tab[k] + w * tab[k + 1]);
    });
  }
  throw ConfigError("problem.u0 must be zero, constant, sine, bump or table");
}

/// Problem, gains and law assembled from a scenario.
struct Assembled {
  PdeProblem problem;
  GainSet gains;
  BoundaryLaw law;
  SolverConfig solver;
};

inline Assembled assemble(const Scenario& sc, std::optional<std::size_t> nodes_override = std::nullopt) {
  SolverConfig solver = sc.solver;
  if (nodes_override) solver.n_nodes = *nodes_override;
  if (solver.n_nodes < 3 || solver.n_nodes % 2 == 0) throw ConfigError("solver.nodes must be odd and >= 3");

  double amplitude = sc.u0 == "table" ? 1.0 : sc.u0_amplitude;
  GridFunction u0 = initial_shape(sc, solver.n_nodes, amplitude);
  const double range = std::max(1.0, 2.0 * norm_max(u0));
  DiffusionModel eps = build_diffusion(sc, range);

  try {
    PdeProblem problem(eps, sc.gamma, sc.p, u0);
    GainSet gains = derive_gains(sc.free, eps.eps_lower(), problem.gamma);
    BoundaryLaw law = sc.controller == LawKind::open_loop
                          ? BoundaryLaw::open_loop()
                          : BoundaryLaw::make(sc.controller, gains, problem.gamma, eps.eps_lower());

    if (sc.u0_kappa_fraction) {
      const double fraction = *sc.u0_kappa_fraction;
      if (!(fraction > 0.0)) throw ConfigError("problem.u0_kappa_fraction must be > 0");
      if (sc.u0 == "zero") throw ConfigError("problem.u0_kappa_fraction needs a nonzero u0 shape");
      const double omega_star = omega_sup(problem, sc.free);
      if (!(omega_star > 0.0)) throw ConfigError("problem.u0_kappa_fraction needs Omega_sup > 0");
      const double target = fraction * std::sqrt(2.0 * omega_star);
      // kappa0 is increasing in the amplitude: bracket and bisect.
      auto kappa_at = [&](double a) { return kappa0(initial_shape(sc, solver.n_nodes, a), gains); };
      double lo = 0.0, hi = 1e-3;
      while (kappa_at(hi) < target && hi < 1e6) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (kappa_at(mid) < target ? lo : hi) = mid;
      }
      amplitude = lo;
      problem.initial = initial_shape(sc, solver.n_nodes, amplitude);
    }
    return Assembled{std::move(problem), gains, law, solver};
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace parabctl
