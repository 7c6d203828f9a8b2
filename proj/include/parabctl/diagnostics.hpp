#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "parabctl/certificates.hpp"
#include "parabctl/controllers.hpp"
#include "parabctl/error.hpp"
#include "parabctl/grid.hpp"
#include "parabctl/problem.hpp"
#include "parabctl/solver.hpp"

namespace parabctl {

/// V = |u|^2 / 2.
inline double lyapunov_v(const GridFunction& u) {
  const double l2 = norm_l2(u);
  return 0.5 * l2 * l2;
}

/// H = |u_x|^2/2 + lambda1/2 u(1)^2 + mu/4 u(1)^4 + lambda0/2 u(0)^2 + mu/4 u(0)^4.
inline double lyapunov_h(const GridFunction& u, const GainSet& g) {
  const double a = u.front(), b = u.back();
  return 0.5 * dx_l2_squared(u) + 0.5 * g.lambda1 * b * b + 0.25 * g.mu * b * b * b * b + 0.5 * g.lambda0 * a * a +
         0.25 * g.mu * a * a * a * a;
}

inline double lyapunov_e(const GridFunction& u, const GainSet& g) { return lyapunov_v(u) + lyapunov_h(u, g); }

/// Result of checking one claim along a trajectory.
///
/// worst_margin and tolerance are taken at the time where margin +
/// tolerance is smallest, so pass <=> worst_margin >= -tolerance.
/// advisory marks checks run outside the certified region (negative
/// controls); skipped marks checks whose precondition did not hold.
struct CheckReport {
  std::string name;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  double tolerance = 0.0;
  bool skipped = false;
  bool advisory = false;
  std::string note;
};

namespace detail {

class WorstCase {
 public:
  explicit WorstCase(std::string name) { report_.name = std::move(name); }

  void add(double t, double margin, double tolerance) {
    double slack = margin + tolerance;
    if (std::isnan(slack)) slack = -std::numeric_limits<double>::infinity();  // NaN is a failure
    if (first_ || slack < best_slack_) {
      best_slack_ = slack;
      report_.worst_margin = margin;
      report_.worst_time = t;
      report_.tolerance = tolerance;
      first_ = false;
    }
  }

  CheckReport finish() {
    report_.pass = first_ || best_slack_ >= 0.0;
    if (first_) report_.worst_margin = 0.0;
    return report_;
  }

 private:
  CheckReport report_;
  double best_slack_ = std::numeric_limits<double>::infinity();
  bool first_ = true;
};

inline CheckReport skipped(std::string name, std::string note) {
  CheckReport r;
  r.name = std::move(name);
  r.skipped = true;
  r.pass = true;
  r.worst_margin = 0.0;
  r.note = std::move(note);
  return r;
}

inline void require_admissible(const CertificateReport& report, const char* check) {
  if (!report.admissible || !report.zeta_bar) {
    throw CertificatePrecondition(std::string(check) + " requires an admissible certificate");
  }
}

template <typename Bound, typename Value>
CheckReport envelope_check(std::string name, const Trajectory& traj, const CertificateReport& report, Bound bound,
                           Value value) {
  require_admissible(report, name.c_str());
  const double h = traj.h();
  WorstCase w(std::move(name));
  for (const auto& rec : traj.series) {
    const Envelopes e = detail::envelope_values(report, rec.t);
    const double b = bound(e);
    w.add(rec.t, b - value(rec), 0.05 * b + 10.0 * h * h);
  }
  CheckReport r = w.finish();
  if (!report.in_region) {
    r.advisory = true;
    r.note = "kappa0 > sqrt(2 omega): outside the certified region, result is advisory";
  }
  return r;
}

}  // namespace detail

/// |u|^2 <= |u0|^2 exp(-sigma t).
inline CheckReport check_l2_decay(const Trajectory& traj, const CertificateReport& report) {
  return detail::envelope_check(
      "l2_decay", traj, report, [](const Envelopes& e) { return e.l2_bound; },
      [](const SeriesRecord& r) { return r.L2 * r.L2; });
}

/// |u|_inf^2 <= 2 kappa0 |u0| exp(-sigma t/2) + |u0|^2 exp(-sigma t).
inline CheckReport check_max_decay(const Trajectory& traj, const CertificateReport& report) {
  return detail::envelope_check(
      "max_decay", traj, report, [](const Envelopes& e) { return e.max_bound; },
      [](const SeriesRecord& r) { return r.max * r.max; });
}

/// |u_x|^2 + lambda1 u(1)^2 + lambda0 u(0)^2 + mu/2 (u(1)^4 + u(0)^4) <= zeta_bar exp(-sigma t/3).
inline CheckReport check_h1_decay(const Trajectory& traj, const CertificateReport& report) {
  const GainSet g = report.gains;
  return detail::envelope_check(
      "h1_decay", traj, report, [](const Envelopes& e) { return e.h1_bound; },
      [g](const SeriesRecord& r) {
        const double a = r.u0, b = r.u1;
        return r.ux_l2_sq + g.lambda1 * b * b + g.lambda0 * a * a + 0.5 * g.mu * (b * b * b * b + a * a * a * a);
      });
}

/// dE/dt <= -alpha(E) V - Lambda(E) |u_x|^2 - eps(u(1)) Gamma(E) u(1)^4 - eps(u(0)) Gamma(E) u(0)^4,
/// with dE/dt from centered differences of the recorded series.
inline CheckReport check_energy_dissipation(const Trajectory& traj, const PdeProblem& problem, const GainSet& g) {
  const auto& s = traj.series;
  const double re = traj.config.record_every;
  if (s.size() < 3) return detail::skipped("energy_dissipation", "fewer than three records");
  detail::WorstCase w("energy_dissipation");
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double dedt = (s[k + 1].E - s[k - 1].E) / (s[k + 1].t - s[k - 1].t);
    const EnergyRates rates = energy_rates(s[k].E, problem, g.free);
    const double a = s[k].u0, b = s[k].u1;
    const double rhs = -rates.alpha * s[k].V - rates.Lambda * s[k].ux_l2_sq -
                       problem.diffusion(b) * rates.Gamma * b * b * b * b -
                       problem.diffusion(a) * rates.Gamma * a * a * a * a;
    w.add(s[k].t, rhs - dedt, 0.05 * std::abs(rhs) + 10.0 * re * re);
  }
  return w.finish();
}

/// E(t) nonincreasing between consecutive records.
inline CheckReport check_e_monotone(const Trajectory& traj) {
  const auto& s = traj.series;
  const double re = traj.config.record_every;
  detail::WorstCase w("e_monotone");
  for (std::size_t k = 0; k + 1 < s.size(); ++k) w.add(s[k + 1].t, s[k].E - s[k + 1].E, 10.0 * re * re);
  return w.finish();
}

/// Finite-horizon proxy for exp(sigma t/4) max{|u_xx|^2, |u_t|^2, |u_x|_inf^2} -> 0:
/// over the second half of the run the weighted quantity must be
/// nonincreasing up to 5% relative slack. Skipped when sigma <= 0 or the
/// horizon is shorter than 10/sigma.
inline CheckReport check_higher_order(const Trajectory& traj, const CertificateReport& report) {
  const char* name = "higher_order_tail";
  const double sigma = report.sigma;
  if (!(sigma > 0.0)) return detail::skipped(name, "sigma <= 0");
  if (traj.outcome.kind != OutcomeKind::completed) return detail::skipped(name, "run did not complete");
  const double horizon = traj.times.empty() ? 0.0 : traj.times.back();
  if (horizon * sigma < 10.0) return detail::skipped(name, "horizon too short (t_end < 10/sigma)");

  auto weighted = [sigma](const SeriesRecord& r) {
    const double q = std::max({r.uxx_l2_sq, r.ut_l2_sq, r.ux_max * r.ux_max});
    return std::exp(0.25 * sigma * r.t) * q;
  };
  detail::WorstCase w(name);
  const auto& s = traj.series;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k].t < 0.5 * horizon) continue;
    const double prev = weighted(s[k]);
    const double next = weighted(s[k + 1]);
    const double scale = std::max(prev, std::numeric_limits<double>::min());
    w.add(s[k + 1].t, (prev - next) / scale, 0.05);
  }
  CheckReport r = w.finish();
  r.note = "tail-monotonicity proxy for a limit statement";
  return r;
}

/// min over nodes and recorded times >= -10 h^2, for nonnegative initial data.
inline CheckReport check_positivity(const Trajectory& traj, const GridFunction& initial) {
  const char* name = "positivity";
  const double min0 = *std::min_element(initial.values().begin(), initial.values().end());
  if (min0 < 0.0) return detail::skipped(name, "initial condition takes negative values");
  const double h = traj.h();
  detail::WorstCase w(name);
  for (const auto& rec : traj.series) w.add(rec.t, rec.min_u, 10.0 * h * h);
  return w.finish();
}

/// |u|_inf^2 <= 2 sqrt(2 V |u_x|^2) + 2 V at every record.
inline CheckReport check_agmon_chain(const Trajectory& traj) {
  const double h = traj.h();
  detail::WorstCase w("agmon_chain");
  for (const auto& r : traj.series) {
    const double bound = 2.0 * std::sqrt(2.0 * r.V * r.ux_l2_sq) + 2.0 * r.V;
    w.add(r.t, bound - r.max * r.max, 10.0 * h * h);
  }
  return w.finish();
}

/// |u|_inf^2 <= 6 E at every record.
inline CheckReport check_max_by_energy(const Trajectory& traj) {
  const double h = traj.h();
  detail::WorstCase w("max_le_6E");
  for (const auto& r : traj.series) w.add(r.t, 6.0 * r.E - r.max * r.max, 10.0 * h * h);
  return w.finish();
}

/// sqrt(2 E(0)) equals kappa0 of the initial condition.
inline CheckReport check_kappa_freeze(const Trajectory& traj, const CertificateReport& report) {
  if (traj.series.empty()) return detail::skipped("kappa_freeze", "empty trajectory");
  if (traj.compatibilized) return detail::skipped("kappa_freeze", "initial condition was blended");
  detail::WorstCase w("kappa_freeze");
  w.add(0.0, -std::abs(std::sqrt(2.0 * traj.series.front().E) - report.kappa0), 1e-10);
  return w.finish();
}

/// Every check that applies to the run. Envelope and dissipation checks
/// need an admissible certificate; outside the certified region they are
/// still evaluated and flagged advisory.
inline std::vector<CheckReport> run_all_checks(const Trajectory& traj, const PdeProblem& problem,
                                               const CertificateReport& report) {
  std::vector<CheckReport> out;
  if (report.admissible && report.zeta_bar) {
    out.push_back(check_l2_decay(traj, report));
    out.push_back(check_max_decay(traj, report));
    out.push_back(check_h1_decay(traj, report));
    auto dissipation = check_energy_dissipation(traj, problem, report.gains);
    auto monotone = check_e_monotone(traj);
    auto tail = check_higher_order(traj, report);
    auto freeze = check_kappa_freeze(traj, report);
    for (auto* c : {&dissipation, &monotone, &tail, &freeze}) {
      if (!report.in_region) c->advisory = true;
      out.push_back(*c);
    }
  }
  out.push_back(check_positivity(traj, problem.initial));
  out.push_back(check_agmon_chain(traj));
  out.push_back(check_max_by_energy(traj));
  return out;
}

}  // namespace parabctl
