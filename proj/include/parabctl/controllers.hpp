#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "parabctl/error.hpp"
#include "parabctl/grid.hpp"

namespace parabctl {

/// Free design parameters of the cubic feedback. m_tilde is only read by the
/// linear comparison controller.
struct FreeGains {
  double m0 = 0.1;
  double m1 = 0.1;
  double k0 = 0.0;
  double k1 = 0.0;
  double M = 1.0;
  double m_tilde = 0.0;

  double m_sum() const { return m0 + m1; }
};

/// Free parameters together with the derived gains
///   lambda_l = (2 (m_l + k_l) + |gamma_1|) / (2 eps_lower)
///   mu       = (|gamma_1| / 2 + sum_{i>=2} |gamma_i| M^(i-2) / (i+2)) / eps_lower
struct GainSet {
  FreeGains free;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double mu = 0.0;

  double lambda(Endpoint l) const { return l == Endpoint::left ? lambda0 : lambda1; }
};

inline GainSet derive_gains(const FreeGains& free, double eps_lower, std::span<const double> gamma) {
  if (!(free.m0 > 0.0) || !(free.m1 > 0.0)) throw InvalidParameter("m0 and m1 must be > 0");
  if (!(free.M > 0.0)) throw InvalidParameter("M must be > 0");
  if (free.k0 < 0.0 || free.k1 < 0.0) throw InvalidParameter("k0 and k1 must be >= 0");
  if (free.m_tilde < 0.0) throw InvalidParameter("m_tilde must be >= 0");
  if (!(eps_lower > 0.0)) throw InvalidParameter("eps_lower must be > 0");

  const double g1 = gamma.empty() ? 0.0 : std::abs(gamma[0]);
  GainSet g;
  g.free = free;
  g.lambda0 = (2.0 * (free.m0 + free.k0) + g1) / (2.0 * eps_lower);
  g.lambda1 = (2.0 * (free.m1 + free.k1) + g1) / (2.0 * eps_lower);
  double cubic = g1 / 2.0;
  for (std::size_t i = 2; i <= gamma.size(); ++i) {
    cubic += std::abs(gamma[i - 1]) * std::pow(free.M, static_cast<double>(i) - 2.0) / static_cast<double>(i + 2);
  }
  g.mu = cubic / eps_lower;
  return g;
}

/// v0(s) = lambda0 s + mu s^3.
inline double flux_left(const GainSet& g, double s) { return g.lambda0 * s + g.mu * s * s * s; }

/// v1(s) = -lambda1 s - mu s^3.
inline double flux_right(const GainSet& g, double s) { return -g.lambda1 * s - g.mu * s * s * s; }

inline double flux(const GainSet& g, Endpoint l, double s) {
  return l == Endpoint::left ? flux_left(g, s) : flux_right(g, s);
}

/// Unique real s with v_l(s) = y (Dirichlet form of the feedback).
///
/// v_l(s) = y is the depressed cubic s^3 + (lambda/mu) s - (-1)^l y/mu = 0
/// whose discriminant is always positive, so Cardano gives the single real
/// root. The second cube root is taken from the product identity
/// t1 t2 = -lambda/(3 mu), which avoids subtracting two nearly equal
/// radicands when |y| is large.
inline double dirichlet_inverse(const GainSet& g, Endpoint l, double y) {
  const double lam = g.lambda(l);
  if (!(lam > 0.0)) throw InvalidParameter("dirichlet_inverse needs lambda_l > 0");
  const double signed_y = l == Endpoint::left ? y : -y;
  if (g.mu == 0.0) return signed_y / lam;

  const double mu = g.mu;
  const double a = signed_y / (2.0 * mu);
  const double q = lam / (3.0 * mu);
  const double r = std::sqrt(a * a + q * q * q);
  // a + sign(a) r never cancels; a == 0 gives t1 = cbrt(r), t2 = -cbrt(r).
  const double t1 = std::cbrt(a >= 0.0 ? a + r : a - r);
  const double t2 = -q / t1;
  double s = t1 + t2;

  // Radicands a + r and a - r nearly opposite: t1 + t2 cancels. Polish with
  // one Newton step on lambda s + mu s^3 - signed_y.
  if (std::abs(a) < 1e-8 * r) {
    const double f = lam * s + mu * s * s * s - signed_y;
    s -= f / (lam + 3.0 * mu * s * s);
  }
  return s;
}

/// Sign pattern under which one boundary may be left uncontrolled: every
/// odd-index gamma is zero and every even-index gamma is >= 0 (control at the
/// right end only) or <= 0 (control at the left end only).
inline bool one_sided_applicable(std::span<const double> gamma, Endpoint controlled_side) {
  for (std::size_t i = 1; i <= gamma.size(); ++i) {
    const double gi = gamma[i - 1];
    if (i % 2 == 1) {
      if (gi != 0.0) return false;
    } else if (controlled_side == Endpoint::right ? gi < 0.0 : gi > 0.0) {
      return false;
    }
  }
  return true;
}

enum class LawKind {
  open_loop,
  neumann_cubic_both,
  neumann_cubic_right_only,
  neumann_cubic_left_only,
  dirichlet_equivalent,
  linear_robin,
};

inline std::string_view to_string(LawKind k) {
  switch (k) {
    case LawKind::open_loop: return "open_loop";
    case LawKind::neumann_cubic_both: return "neumann_cubic_both";
    case LawKind::neumann_cubic_right_only: return "neumann_cubic_right_only";
    case LawKind::neumann_cubic_left_only: return "neumann_cubic_left_only";
    case LawKind::dirichlet_equivalent: return "dirichlet_equivalent";
    case LawKind::linear_robin: return "linear_robin";
  }
  return "?";
}

inline LawKind law_kind_from_string(std::string_view s) {
  for (LawKind k : {LawKind::open_loop, LawKind::neumann_cubic_both, LawKind::neumann_cubic_right_only,
                    LawKind::neumann_cubic_left_only, LawKind::dirichlet_equivalent, LawKind::linear_robin}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidParameter("unknown controller kind '" + std::string(s) + "'");
}

/// The boundary pair (v0, v1) selected for a run.
class BoundaryLaw {
 public:
  static BoundaryLaw open_loop() { return BoundaryLaw(LawKind::open_loop, GainSet{}, 0.0); }

  /// gamma and eps_lower are needed to validate the one-sided sign pattern
  /// and to build the linear comparison gains.
  static BoundaryLaw make(LawKind kind, const GainSet& gains, std::span<const double> gamma, double eps_lower) {
    if (kind == LawKind::open_loop) return open_loop();
    if (kind == LawKind::neumann_cubic_right_only && !one_sided_applicable(gamma, Endpoint::right)) {
      throw InvalidParameter("right-only feedback requires odd gammas = 0 and even gammas >= 0");
    }
    if (kind == LawKind::neumann_cubic_left_only && !one_sided_applicable(gamma, Endpoint::left)) {
      throw InvalidParameter("left-only feedback requires odd gammas = 0 and even gammas <= 0");
    }
    double linear_boost = 0.0;
    if (kind == LawKind::linear_robin) {
      const double g1 = gamma.empty() ? 0.0 : std::abs(gamma[0]);
      linear_boost = g1 * gains.free.m_tilde * gains.free.m_tilde / (2.0 * eps_lower);
    }
    return BoundaryLaw(kind, gains, linear_boost);
  }

  LawKind kind() const { return kind_; }
  const GainSet& gains() const { return gains_; }
  bool has_gains() const { return kind_ != LawKind::open_loop; }

  /// Gains entering the energy functional H for this law: zero for open
  /// loop, (lambda~, mu = 0) for the linear comparison law, the cubic
  /// gains otherwise.
  GainSet energy_gains() const {
    if (kind_ == LawKind::open_loop) return GainSet{};
    if (kind_ == LawKind::linear_robin) {
      GainSet g = gains_;
      g.lambda0 += linear_boost_;
      g.lambda1 += linear_boost_;
      g.mu = 0.0;
      return g;
    }
    return gains_;
  }

  /// Prescribed slope u_x(0) given u(0) (Neumann form).
  double slope_left(double u0) const {
    switch (kind_) {
      case LawKind::open_loop:
      case LawKind::neumann_cubic_right_only: return 0.0;
      case LawKind::linear_robin: return (gains_.lambda0 + linear_boost_) * u0;
      default: return flux_left(gains_, u0);
    }
  }

  /// Prescribed slope u_x(1) given u(1) (Neumann form).
  double slope_right(double u1) const {
    switch (kind_) {
      case LawKind::open_loop:
      case LawKind::neumann_cubic_left_only: return 0.0;
      case LawKind::linear_robin: return -(gains_.lambda1 + linear_boost_) * u1;
      default: return flux_right(gains_, u1);
    }
  }

  double slope(Endpoint l, double u) const { return l == Endpoint::left ? slope_left(u) : slope_right(u); }

 private:
  BoundaryLaw(LawKind kind, GainSet gains, double boost) : kind_(kind), gains_(gains), linear_boost_(boost) {}

  LawKind kind_;
  GainSet gains_;
  double linear_boost_;
};

}  // namespace parabctl
