#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

#include "parabctl/controllers.hpp"
#include "parabctl/error.hpp"
#include "parabctl/grid.hpp"
#include "parabctl/problem.hpp"

namespace parabctl {

/// kappa0 = [ |u0|_H1^2 + lambda1 u0(1)^2 + mu/2 u0(1)^4 + lambda0 u0(0)^2 + mu/2 u0(0)^4 ]^(1/2)
inline double kappa0(const GridFunction& u0, const GainSet& g) {
  const double a = u0.front();
  const double b = u0.back();
  const double h1 = norm_h1(u0);
  const double sq = h1 * h1 + g.lambda1 * b * b + 0.5 * g.mu * b * b * b * b + g.lambda0 * a * a +
                    0.5 * g.mu * a * a * a * a;
  return std::sqrt(sq);
}

/// LHS - RHS of the three conditions on omega. The convection margin is
/// +inf when the condition is vacuous.
struct AdmissibilityMargins {
  double reaction = 0.0;    // m1 + m0 > 2 (6w)^((p-1)/2) + (6w)^(p-1) / eps_lower
  double diffusion = 0.0;   // eps_lower - 2 (m1 + m0) > sqrt(6w) envelope(sqrt(6w)) + n/(2 eps_lower) sum gamma_i^2 (6w)^i
  double convection = std::numeric_limits<double>::infinity();  // sum_{i>=2} |gamma_i|/(i+2) (M^(i-2) - (6w)^((i-2)/2))
  bool convection_vacuous = true;

  bool pass() const { return reaction > 0.0 && diffusion > 0.0 && convection > 0.0; }
};

namespace detail {

// The i = 2 term of the convection condition is M^0 - (6w)^0 = 0 for every
// omega, so only i >= 3 can make the condition binding.
inline bool convection_condition_active(const PdeProblem& pb) {
  for (std::size_t i = 3; i <= pb.n(); ++i) {
    if (pb.gamma_at(i) != 0.0) return true;
  }
  return false;
}

inline double convection_sum(const PdeProblem& pb, double M, double six_w) {
  double s = 0.0;
  for (std::size_t i = 2; i <= pb.n(); ++i) {
    const double gi = std::abs(pb.gamma_at(i));
    if (gi == 0.0) continue;
    const double e = static_cast<double>(i) - 2.0;
    s += gi / static_cast<double>(i + 2) * (std::pow(M, e) - std::pow(six_w, e / 2.0));
  }
  return s;
}

inline double reaction_margin(double m_sum, double p, double eps_lower, double six_w) {
  return m_sum - 2.0 * std::pow(six_w, (p - 1.0) / 2.0) - std::pow(six_w, p - 1.0) / eps_lower;
}

inline double diffusion_margin(const PdeProblem& pb, double m_sum, double six_w) {
  const double eps_lower = pb.diffusion.eps_lower();
  const double root = std::sqrt(six_w);
  double conv = 0.0;
  for (std::size_t i = 1; i <= pb.n(); ++i) {
    const double gi = pb.gamma_at(i);
    conv += gi * gi * std::pow(six_w, static_cast<double>(i));
  }
  return eps_lower - 2.0 * m_sum - root * pb.diffusion.envelope(root) -
         static_cast<double>(pb.n()) / (2.0 * eps_lower) * conv;
}

}  // namespace detail

inline AdmissibilityMargins admissible_omega(const PdeProblem& pb, const FreeGains& free, double omega) {
  if (!(omega > 0.0)) throw InvalidParameter("omega must be > 0");
  const double six_w = 6.0 * omega;
  AdmissibilityMargins m;
  m.reaction = detail::reaction_margin(free.m_sum(), pb.p, pb.diffusion.eps_lower(), six_w);
  m.diffusion = detail::diffusion_margin(pb, free.m_sum(), six_w);
  m.convection_vacuous = !detail::convection_condition_active(pb);
  if (!m.convection_vacuous) m.convection = detail::convection_sum(pb, free.M, six_w);
  return m;
}

/// Omega = sup{omega : all conditions hold}, by bisection to 1e-10 absolute.
/// Returns 0 when the conditions fail as omega -> 0+.
inline double omega_sup(const PdeProblem& pb, const FreeGains& free, double tolerance = 1e-10) {
  // Limit omega -> 0+: every (6w)^positive term vanishes.
  const bool at_zero = free.m_sum() > 0.0 && pb.diffusion.eps_lower() - 2.0 * free.m_sum() > 0.0 &&
                       (!detail::convection_condition_active(pb) || detail::convection_sum(pb, free.M, 0.0) > 0.0);
  if (!at_zero) return 0.0;

  auto ok = [&](double w) { return admissible_omega(pb, free, w).pass(); };
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 200 && ok(hi); ++k) {
    lo = hi;
    hi *= 2.0;
  }
  if (ok(hi)) return hi;  // unbounded within double range
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// sigma = m1 + m0 - 2 (sqrt(3) kappa0)^(p-1).
inline double decay_rate_sigma(double kappa, double m0, double m1, double p) {
  return m1 + m0 - 2.0 * std::pow(std::sqrt(3.0) * kappa, p - 1.0);
}

/// zeta = eps_lower - sqrt(3) kappa0 envelope(sqrt(3) kappa0) - 2 (m0 + m1).
/// Diagnostic companion of zeta_bar.
inline double zeta(double kappa, const PdeProblem& pb, const FreeGains& free) {
  const double s = std::sqrt(3.0) * kappa;
  return pb.diffusion.eps_lower() - s * pb.diffusion.envelope(s) - 2.0 * free.m_sum();
}

/// Coefficient of the H1 decay envelope, evaluated term by term.
inline double zeta_bar(double kappa, double u0_l2, const PdeProblem& pb, const GainSet& g, double omega) {
  const double eps_lower = pb.diffusion.eps_lower();
  const double m_sum = g.free.m_sum();
  const double p = pb.p;
  const double six_w = 6.0 * omega;
  const double reaction_den = m_sum - 2.0 * std::pow(six_w, (p - 1.0) / 2.0);
  const double diffusion_den = eps_lower - std::sqrt(six_w) * pb.diffusion.envelope(std::sqrt(six_w)) - 2.0 * m_sum;
  if (!(omega > 0.0) || !(reaction_den > 0.0) || !(diffusion_den > 0.0)) {
    throw CertificatePrecondition("zeta_bar requires an admissible omega (positive denominators)");
  }

  const double lam = g.lambda0 + g.lambda1;
  const double mu = g.mu;
  const double k2 = kappa * kappa;
  const double u2 = u0_l2 * u0_l2;

  double conv = 0.0;
  for (std::size_t i = 1; i <= pb.n(); ++i) {
    const double gi = pb.gamma_at(i);
    const double di = static_cast<double>(i);
    conv += static_cast<double>(pb.n()) * std::pow(3.0, di) * gi * gi * std::pow(kappa, 2.0 * di) / eps_lower;
  }

  double z = k2;
  z += 4.0 * lam * kappa * u0_l2;
  z += mu / 5.0 * u2 * u2;
  z += 8.0 * mu * kappa / 7.0 * u2 * u0_l2;
  z += ((lam + 4.0 * mu * k2) / 2.0 +
        std::pow(3.0, p) * std::pow(kappa, 2.0 * p - 2.0) / (2.0 * eps_lower * reaction_den)) *
       u2;
  z += 0.75 * (conv + m_sum / 3.0) / diffusion_den * u2;
  return z;
}

/// alpha(E), Lambda(E), Gamma(E): the rates in the energy dissipation
/// inequality dE/dt <= -alpha V - Lambda |u_x|^2 - eps(u(l)) Gamma u(l)^4.
struct EnergyRates {
  double alpha = 0.0;
  double Lambda = 0.0;
  double Gamma = 0.0;
};

inline EnergyRates energy_rates(double energy, const PdeProblem& pb, const FreeGains& free) {
  if (energy < 0.0) throw InvalidParameter("energy must be >= 0");
  const double six_e = 6.0 * energy;
  EnergyRates r;
  r.alpha = detail::reaction_margin(free.m_sum(), pb.p, pb.diffusion.eps_lower(), six_e);
  r.Lambda = detail::diffusion_margin(pb, free.m_sum(), six_e);
  r.Gamma = detail::convection_sum(pb, free.M, six_e);
  return r;
}

/// D_a = omega^(p-1) / eps_lower^2.
inline double damkohler(double omega, double p, double eps_lower) {
  return std::pow(omega, p - 1.0) / (eps_lower * eps_lower);
}

/// P_e = sum_i (gamma_i (6 omega)^(i/2) / eps_lower)^2.
inline double peclet(double omega, const PdeProblem& pb) {
  double s = 0.0;
  for (std::size_t i = 1; i <= pb.n(); ++i) {
    const double t = pb.gamma_at(i) * std::pow(6.0 * omega, static_cast<double>(i) / 2.0) / pb.diffusion.eps_lower();
    s += t * t;
  }
  return s;
}

struct CertificateReport {
  double kappa0 = 0.0;
  double omega = 0.0;
  bool admissible = false;
  double Omega_sup = 0.0;
  double sigma = 0.0;
  double zeta = 0.0;
  std::optional<double> zeta_bar;  // absent when omega is not admissible
  double damkohler = 0.0;
  double peclet = 0.0;
  bool in_region = false;  // kappa0 <= sqrt(2 omega)

  AdmissibilityMargins margins;
  double u0_l2 = 0.0;
  GainSet gains;

  bool certified() const { return admissible && in_region; }
};

/// Relative backoff from Omega so that the evaluated omega satisfies the
/// strict inequalities.
inline constexpr double kOmegaBackoff = 1e-6;

/// Full certificate at omega = Omega (1 - 1e-6), or at a caller-supplied omega.
inline CertificateReport certify(const PdeProblem& pb, const GainSet& g,
                                 std::optional<double> omega_override = std::nullopt) {
  CertificateReport r;
  r.gains = g;
  r.kappa0 = kappa0(pb.initial, g);
  r.u0_l2 = norm_l2(pb.initial);
  r.Omega_sup = omega_sup(pb, g.free);
  r.omega = omega_override ? *omega_override : r.Omega_sup * (1.0 - kOmegaBackoff);
  r.sigma = decay_rate_sigma(r.kappa0, g.free.m0, g.free.m1, pb.p);
  r.zeta = zeta(r.kappa0, pb, g.free);
  if (r.omega > 0.0) {
    r.margins = admissible_omega(pb, g.free, r.omega);
    r.admissible = r.margins.pass();
    r.damkohler = damkohler(r.omega, pb.p, pb.diffusion.eps_lower());
    r.peclet = peclet(r.omega, pb);
    r.in_region = r.kappa0 <= std::sqrt(2.0 * r.omega);
    if (r.admissible) r.zeta_bar = zeta_bar(r.kappa0, r.u0_l2, pb, g, r.omega);
  } else {
    r.margins.reaction = detail::reaction_margin(g.free.m_sum(), pb.p, pb.diffusion.eps_lower(), 0.0);
    r.margins.diffusion = detail::diffusion_margin(pb, g.free.m_sum(), 0.0);
    r.in_region = r.kappa0 <= 0.0;
  }
  return r;
}

struct Envelopes {
  double l2_bound = 0.0;   // bound on |u|_L2^2
  double max_bound = 0.0;  // bound on |u|_inf^2
  double h1_bound = 0.0;   // bound on |u_x|^2 + boundary terms
};

namespace detail {

inline Envelopes envelope_values(const CertificateReport& r, double t) {
  const double u2 = r.u0_l2 * r.u0_l2;
  Envelopes e;
  e.l2_bound = u2 * std::exp(-r.sigma * t);
  e.max_bound = 2.0 * r.kappa0 * r.u0_l2 * std::exp(-0.5 * r.sigma * t) + u2 * std::exp(-r.sigma * t);
  e.h1_bound = r.zeta_bar.value_or(std::numeric_limits<double>::quiet_NaN()) * std::exp(-r.sigma * t / 3.0);
  return e;
}

}  // namespace detail

/// Predicted decay envelopes at time t. Only defined inside the certified region.
inline Envelopes envelopes(const CertificateReport& r, double t) {
  if (!r.certified() || !r.zeta_bar) {
    throw CertificatePrecondition("envelopes require an admissible omega and kappa0 <= sqrt(2 omega)");
  }
  return detail::envelope_values(r, t);
}

}  // namespace parabctl
