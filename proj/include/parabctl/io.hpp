#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "parabctl/certificates.hpp"
#include "parabctl/diagnostics.hpp"
#include "parabctl/solver.hpp"

namespace parabctl {

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, end);
}

inline constexpr const char* kTrajectoryHeader = "t,L2,H1,H2,max,C1,V,H,E,u0,u1,ux0,ux1";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kTrajectoryHeader << '\n';
  for (const auto& r : traj.series) {
    const double row[] = {r.t, r.L2, r.H1, r.H2, r.max, r.C1, r.V, r.H, r.E, r.u0, r.u1, r.ux0, r.ux1};
    for (std::size_t k = 0; k < std::size(row); ++k) os << (k ? "," : "") << format_double(row[k]);
    os << '\n';
  }
}

/// One row per snapshot: t followed by the N node values.
inline void write_snapshots_csv(std::ostream& os, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    os << format_double(traj.snapshot_times[k]);
    for (double v : traj.snapshots[k].values()) os << ',' << format_double(v);
    os << '\n';
  }
}

namespace detail {

inline nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

/// Flat JSON object. Non-finite values (vacuous margins, missing zeta_bar)
/// are written as null.
inline nlohmann::json to_json(const CertificateReport& r) {
  nlohmann::json j;
  j["kappa0"] = r.kappa0;
  j["omega"] = r.omega;
  j["admissible"] = r.admissible;
  j["Omega_sup"] = r.Omega_sup;
  j["sigma"] = r.sigma;
  j["zeta"] = r.zeta;
  j["zeta_bar"] = r.zeta_bar ? detail::finite_or_null(*r.zeta_bar) : nlohmann::json(nullptr);
  j["damkohler"] = r.damkohler;
  j["peclet"] = r.peclet;
  j["in_region"] = r.in_region;
  j["margin_reaction"] = detail::finite_or_null(r.margins.reaction);
  j["margin_diffusion"] = detail::finite_or_null(r.margins.diffusion);
  j["margin_convection"] = detail::finite_or_null(r.margins.convection);
  j["u0_l2"] = r.u0_l2;
  j["lambda0"] = r.gains.lambda0;
  j["lambda1"] = r.gains.lambda1;
  j["mu"] = r.gains.mu;
  return j;
}

inline nlohmann::json to_json(const CheckReport& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["worst_margin"] = detail::finite_or_null(c.worst_margin);
  j["worst_time"] = c.worst_time;
  j["tolerance"] = c.tolerance;
  j["skipped"] = c.skipped;
  j["advisory"] = c.advisory;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline nlohmann::json to_json(const std::vector<CheckReport>& checks) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : checks) a.push_back(to_json(c));
  return a;
}

}  // namespace parabctl
