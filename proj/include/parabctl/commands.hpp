#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "parabctl/certificates.hpp"
#include "parabctl/controllers.hpp"
#include "parabctl/diagnostics.hpp"
#include "parabctl/error.hpp"
#include "parabctl/io.hpp"
#include "parabctl/scenario.hpp"
#include "parabctl/solver.hpp"

namespace parabctl {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int blowup = 2;
inline constexpr int certificate_fail = 3;
inline constexpr int config_error = 64;
}  // namespace exit_code

struct CommandOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::size_t> nodes;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

/// Certificate checks that do not apply to the selected law are kept but
/// marked advisory: the decay envelopes are stated for the two-sided
/// cubic law (and its Dirichlet form); the one-sided laws keep only the
/// L2 envelope.
inline void mark_inapplicable(std::vector<CheckReport>& checks, LawKind kind) {
  const bool two_sided = kind == LawKind::neumann_cubic_both || kind == LawKind::dirichlet_equivalent;
  const bool one_sided = kind == LawKind::neumann_cubic_right_only || kind == LawKind::neumann_cubic_left_only;
  static const std::vector<std::string> certificate_checks = {
      "l2_decay", "max_decay", "h1_decay", "energy_dissipation", "e_monotone", "higher_order_tail", "kappa_freeze"};
  if (two_sided) return;
  for (auto& c : checks) {
    if (std::find(certificate_checks.begin(), certificate_checks.end(), c.name) == certificate_checks.end()) continue;
    if (one_sided && c.name == "l2_decay") continue;
    if (!c.advisory) {
      c.advisory = true;
      c.note = "not covered by the certificate for controller " + std::string(to_string(kind));
    }
  }
}

inline std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PARABCTL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<std::size_t>(v);
  }
  return n;
}

}  // namespace detail

/// Certificate for the scenario's initial condition. The report goes to
/// stdout and to the certificate file; exit 0 iff admissible and in region.
inline int cmd_certify(const Scenario& sc, const CommandOptions& opt, std::ostream& out) {
  const Assembled a = assemble(sc, opt.nodes);
  const CertificateReport r = certify(a.problem, a.gains);
  const nlohmann::json j = to_json(r);
  detail::write_json(opt.out_dir / sc.certificate_file, j);
  const int code = r.certified() ? exit_code::ok : exit_code::certificate_fail;
  nlohmann::json summary;
  summary["command"] = "certify";
  summary["exit_code"] = code;
  summary["certificate"] = j;
  summary["checks"] = nlohmann::json::array();
  detail::write_json(opt.out_dir / sc.summary_file, summary);
  out << j.dump(2) << '\n';
  return code;
}

struct SimulationResult {
  Trajectory trajectory;
  CertificateReport certificate;
  std::vector<CheckReport> checks;
  int exit_code = exit_code::ok;
};

/// Simulation plus diagnostics without touching the filesystem.
inline SimulationResult run_simulation(const Assembled& a, const Scenario& sc) {
  SimulationResult res;
  res.certificate = certify(a.problem, a.gains);
  SolverConfig cfg = a.solver;
  if (sc.t_end_sigma) {
    if (!(res.certificate.sigma > 0.0)) throw ConfigError("solver.t_end_sigma needs sigma > 0");
    cfg.t_end = *sc.t_end_sigma / res.certificate.sigma;
  }
  try {
    res.trajectory = simulate(a.problem, a.law, cfg);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  res.checks = run_all_checks(res.trajectory, a.problem, res.certificate);
  detail::mark_inapplicable(res.checks, a.law.kind());

  if (res.trajectory.outcome.kind != OutcomeKind::completed) {
    res.exit_code = exit_code::blowup;
  } else {
    const bool covered = a.law.has_gains() && a.law.kind() != LawKind::linear_robin;
    bool ok = covered && res.certificate.certified();
    for (const auto& c : res.checks) ok = ok && (c.pass || c.advisory || c.skipped);
    res.exit_code = ok ? exit_code::ok : exit_code::certificate_fail;
  }
  return res;
}

inline int cmd_simulate(const Scenario& sc, const CommandOptions& opt, std::ostream& out) {
  const Assembled a = assemble(sc, opt.nodes);
  const SimulationResult res = run_simulation(a, sc);
  const Trajectory& traj = res.trajectory;
  {
    auto os = detail::open_output(opt.out_dir / sc.trajectory_file);
    write_trajectory_csv(os, traj);
  }
  {
    auto os = detail::open_output(opt.out_dir / sc.snapshots_file);
    write_snapshots_csv(os, traj);
  }
  nlohmann::json summary;
  summary["command"] = "simulate";
  summary["exit_code"] = res.exit_code;
  summary["controller"] = std::string(to_string(a.law.kind()));
  summary["outcome"] = std::string(to_string(traj.outcome.kind));
  summary["outcome_time"] = traj.outcome.time;
  summary["t_end"] = traj.config.t_end;
  summary["nodes"] = traj.config.n_nodes;
  summary["steps"] = traj.steps;
  summary["integrator"] = std::string(to_string(traj.config.integrator));
  summary["compatibility"] = {{"residual0", traj.compatibility.residual0},
                              {"residual1", traj.compatibility.residual1},
                              {"tolerance", traj.compatibility.tolerance},
                              {"pass", traj.compatibility.pass},
                              {"compatibilized", traj.compatibilized}};
  summary["certificate"] = to_json(res.certificate);
  summary["checks"] = to_json(res.checks);
  detail::write_json(opt.out_dir / sc.summary_file, summary);

  out << "outcome " << to_string(traj.outcome.kind) << " at t=" << format_double(traj.outcome.time) << '\n';
  for (const auto& c : res.checks) {
    out << (c.skipped ? "SKIP" : c.pass ? "PASS" : "FAIL") << (c.advisory ? " (advisory) " : " ") << c.name
        << " worst_margin=" << format_double(c.worst_margin) << " t=" << format_double(c.worst_time) << '\n';
  }
  return res.exit_code;
}

struct SweepRow {
  double value = 0.0;
  CertificateReport report;
};

/// Scenario with one sweep parameter replaced.
inline Scenario apply_sweep_value(Scenario sc, const std::string& axis, double value) {
  if (axis == "M") {
    sc.free.M = value;
  } else if (axis == "m_sum") {
    sc.free.m0 = sc.free.m1 = 0.5 * value;
  } else if (axis == "gamma_scale") {
    if (sc.gamma.empty()) sc.gamma = {1.0};
    for (double& g : sc.gamma) g *= value;
  } else if (axis != "eps_lower") {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  return sc;
}

/// One certificate per grid point, computed concurrently and returned in
/// input order.
inline std::vector<SweepRow> run_sweep(const Scenario& sc, std::optional<std::size_t> nodes, std::size_t threads) {
  const std::size_t count = sc.sweep_values.size();
  std::vector<SweepRow> rows(count);
  std::vector<std::string> errors(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        const double v = sc.sweep_values[k];
        const Scenario point = apply_sweep_value(sc, sc.sweep_axis, v);
        Assembled a = assemble(point, nodes);
        if (sc.sweep_axis == "eps_lower") {
          if (!(v > 0.0)) throw ConfigError("eps_lower sweep values must be > 0");
          a.problem.diffusion = a.problem.diffusion.with_lower(v);
          a.gains = derive_gains(point.free, v, a.problem.gamma);
        }
        rows[k] = SweepRow{v, certify(a.problem, a.gains)};
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t k = 0; k < count; ++k) {
    if (!errors[k].empty()) throw ConfigError("sweep point " + std::to_string(k) + ": " + errors[k]);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::string& axis, const std::vector<SweepRow>& rows) {
  os << axis << ",Omega_sup,sigma,damkohler,peclet,admissible\n";
  for (const auto& r : rows) {
    os << format_double(r.value) << ',' << format_double(r.report.Omega_sup) << ',' << format_double(r.report.sigma)
       << ',' << format_double(r.report.damkohler) << ',' << format_double(r.report.peclet) << ','
       << (r.report.admissible ? 1 : 0) << '\n';
  }
}

inline int cmd_sweep(const Scenario& sc, const CommandOptions& opt, std::ostream& out) {
  if (sc.sweep_values.empty()) throw ConfigError("sweep.values is empty");
  const auto rows = run_sweep(sc, opt.nodes, detail::thread_cap());
  {
    auto os = detail::open_output(opt.out_dir / sc.sweep_file);
    write_sweep_csv(os, sc.sweep_axis, rows);
  }
  nlohmann::json summary;
  summary["command"] = "sweep";
  summary["exit_code"] = exit_code::ok;
  summary["axis"] = sc.sweep_axis;
  summary["points"] = nlohmann::json::array();
  for (const auto& r : rows) summary["points"].push_back(to_json(r.report));
  summary["checks"] = nlohmann::json::array();
  detail::write_json(opt.out_dir / sc.summary_file, summary);
  write_sweep_csv(out, sc.sweep_axis, rows);
  return exit_code::ok;
}

struct InvertRow {
  double y, d0, d1, roundtrip0, roundtrip1;
};

/// d_l(y) on an evenly spaced grid, with |v_l(d_l(y)) - y|.
inline std::vector<InvertRow> invert_table(const GainSet& g, double y_min, double y_max, int count) {
  std::vector<InvertRow> rows;
  for (int k = 0; k < count; ++k) {
    const double y = count == 1 ? y_min : y_min + (y_max - y_min) * k / (count - 1);
    const double d0 = dirichlet_inverse(g, Endpoint::left, y);
    const double d1 = dirichlet_inverse(g, Endpoint::right, y);
    rows.push_back({y, d0, d1, std::abs(flux_left(g, d0) - y), std::abs(flux_right(g, d1) - y)});
  }
  return rows;
}

inline int cmd_invert(const Scenario& sc, const CommandOptions& opt, std::ostream& out) {
  const Assembled a = assemble(sc, opt.nodes);
  const auto rows = invert_table(a.gains, sc.y_min, sc.y_max, sc.y_count);
  auto write = [&](std::ostream& os) {
    os << "y,d0,d1,roundtrip0,roundtrip1\n";
    for (const auto& r : rows) {
      os << format_double(r.y) << ',' << format_double(r.d0) << ',' << format_double(r.d1) << ','
         << format_double(r.roundtrip0) << ',' << format_double(r.roundtrip1) << '\n';
    }
  };
  {
    auto os = detail::open_output(opt.out_dir / sc.invert_file);
    write(os);
  }
  nlohmann::json summary;
  summary["command"] = "invert";
  summary["exit_code"] = exit_code::ok;
  summary["lambda0"] = a.gains.lambda0;
  summary["lambda1"] = a.gains.lambda1;
  summary["mu"] = a.gains.mu;
  summary["checks"] = nlohmann::json::array();
  detail::write_json(opt.out_dir / sc.summary_file, summary);
  write(out);
  return exit_code::ok;
}

/// Loads the scenario and dispatches. Config errors map to exit 64 and
/// still leave a summary file behind when the output directory is writable.
inline int run_command(const std::string& command, const std::string& scenario_path, const CommandOptions& opt,
                       std::ostream& out, std::ostream& err) {
  std::string summary_file = "summary.json";
  try {
    const Scenario sc = load_scenario(scenario_path);
    summary_file = sc.summary_file;
    if (command == "certify") return cmd_certify(sc, opt, out);
    if (command == "simulate") return cmd_simulate(sc, opt, out);
    if (command == "sweep") return cmd_sweep(sc, opt, out);
    if (command == "invert") return cmd_invert(sc, opt, out);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    try {
      detail::write_json(opt.out_dir / summary_file, {{"command", command},
                                                       {"exit_code", exit_code::config_error},
                                                       {"error", e.what()},
                                                       {"checks", nlohmann::json::array()}});
    } catch (const std::exception&) {
    }
    return exit_code::config_error;
  }
}

}  // namespace parabctl
