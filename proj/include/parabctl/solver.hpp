#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parabctl/controllers.hpp"
#include "parabctl/error.hpp"
#include "parabctl/grid.hpp"
#include "parabctl/problem.hpp"

namespace parabctl {

enum class Integrator {
  rk4,  // classical RK4, dt = cfl_safety h^2 / (2 max eps)
  rkc,  // second-order Runge-Kutta-Chebyshev, stage count from the spectral radius
};

inline std::string_view to_string(Integrator i) { return i == Integrator::rk4 ? "rk4" : "rkc"; }

inline Integrator integrator_from_string(std::string_view s) {
  if (s == "rk4") return Integrator::rk4;
  if (s == "rkc") return Integrator::rkc;
  throw InvalidParameter("unknown integrator '" + std::string(s) + "'");
}

/// Test-only hooks for manufactured solutions: the reaction can be switched
/// off and an additive forcing f(x, t) supplied. Off for physical runs.
struct VerificationMode {
  bool reaction = true;
  std::function<double(double, double)> forcing;
};

struct SolverConfig {
  std::size_t n_nodes = 201;
  double t_end = 1.0;
  double cfl_safety = 0.4;
  double record_every = 0.01;
  double snapshot_every = 0.0;  // 0: snapshot at every record
  double blowup_max = 1e8;
  double dt_min = 1e-14;
  Integrator integrator = Integrator::rk4;
  double dt_max = 5e-3;  // rkc only
  bool compatibilize = false;
  VerificationMode verification;

  void validate() const {
    if (n_nodes < 11 || n_nodes % 2 == 0) throw InvalidParameter("n_nodes must be odd and >= 11");
    if (!(t_end > 0.0)) throw InvalidParameter("t_end must be > 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw InvalidParameter("cfl_safety must lie in (0, 1]");
    if (!(record_every > 0.0)) throw InvalidParameter("record_every must be > 0");
    if (snapshot_every < 0.0) throw InvalidParameter("snapshot_every must be >= 0");
    if (!(blowup_max > 0.0)) throw InvalidParameter("blowup_max must be > 0");
    if (!(dt_min > 0.0)) throw InvalidParameter("dt_min must be > 0");
    if (!(dt_max > 0.0)) throw InvalidParameter("dt_max must be > 0");
  }
};

/// Quantities recorded at each output time.
struct SeriesRecord {
  double t = 0.0;
  double L2 = 0.0, H1 = 0.0, H2 = 0.0, max = 0.0, C1 = 0.0;
  double V = 0.0, H = 0.0, E = 0.0;
  double u0 = 0.0, u1 = 0.0, ux0 = 0.0, ux1 = 0.0;
  // Not part of the CSV; used by the diagnostics.
  double ux_l2_sq = 0.0;
  double uxx_l2_sq = 0.0;
  double ut_l2_sq = 0.0;
  double ux_max = 0.0;
  double min_u = 0.0;
  double mass = 0.0;
};

enum class OutcomeKind { completed, blowup, dt_underflow };

inline std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::completed: return "completed";
    case OutcomeKind::blowup: return "blowup";
    case OutcomeKind::dt_underflow: return "dt_underflow";
  }
  return "?";
}

struct Outcome {
  OutcomeKind kind = OutcomeKind::completed;
  double time = 0.0;  // detection time for blowup / dt_underflow, t_end otherwise
};

struct CompatibilityReport {
  double residual0 = 0.0;
  double residual1 = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct Trajectory {
  SolverConfig config;
  std::vector<double> times;
  std::vector<SeriesRecord> series;
  std::vector<double> snapshot_times;
  std::vector<GridFunction> snapshots;
  Outcome outcome;
  CompatibilityReport compatibility;
  bool compatibilized = false;
  std::size_t steps = 0;

  double h() const { return 1.0 / static_cast<double>(config.n_nodes - 1); }
};

/// Blow-up flag raised by detect_blowup.
struct BlowupFlag {
  enum class Reason { non_finite, threshold } reason;
  double max_abs = 0.0;
};

inline std::optional<BlowupFlag> detect_blowup(std::span<const double> u, const SolverConfig& config) {
  double m = 0.0;
  for (double v : u) {
    if (!std::isfinite(v)) return BlowupFlag{BlowupFlag::Reason::non_finite, std::numeric_limits<double>::infinity()};
    m = std::max(m, std::abs(v));
  }
  if (m > config.blowup_max) return BlowupFlag{BlowupFlag::Reason::threshold, m};
  return std::nullopt;
}

/// Boundary slope u_x(l) enforced by the law. For the Dirichlet form the
/// actuator imposes u(l) = d_l(u_x(l)); the slope consistent with the
/// current boundary value is the root of d_l(s) = u(l), found by a
/// bracketed Newton iteration that only evaluates d_l.
inline double dirichlet_slope(const GainSet& g, Endpoint l, double boundary_value) {
  if (boundary_value == 0.0) return 0.0;
  const double sign = l == Endpoint::left ? 1.0 : -1.0;  // d_l increasing (left) / decreasing (right)
  auto f = [&](double s) { return dirichlet_inverse(g, l, s) - boundary_value; };
  auto df = [&](double s) {
    const double d = dirichlet_inverse(g, l, s);
    return sign / (g.lambda(l) + 3.0 * g.mu * d * d);
  };

  double a = 0.0;
  double fa = -boundary_value;
  double b = sign * g.lambda(l) * boundary_value;
  if (b == 0.0) b = sign * boundary_value;
  double fb = f(b);
  for (int k = 0; k < 2000 && (fa < 0.0) == (fb < 0.0); ++k) {
    a = b;
    fa = fb;
    b *= 2.0;
    fb = f(b);
  }
  double s = b;
  for (int it = 0; it < 200; ++it) {
    const double fs = f(s);
    if (fs == 0.0) return s;
    if ((fs < 0.0) == (fa < 0.0)) {
      a = s;
      fa = fs;
    } else {
      b = s;
    }
    double next = s - fs / df(s);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (!(next > lo && next < hi)) next = 0.5 * (a + b);
    if (std::abs(next - s) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(next)) return next;
    s = next;
  }
  return s;
}

/// Method-of-lines right-hand side with ghost-node Neumann closure.
class Semidiscretization {
 public:
  Semidiscretization(const PdeProblem& problem, const BoundaryLaw& law, std::size_t n_nodes,
                     VerificationMode verification = {})
      : problem_(problem),
        law_(law),
        n_(n_nodes),
        h_(1.0 / static_cast<double>(n_nodes - 1)),
        verification_(std::move(verification)) {
    convective_ = std::any_of(problem_.gamma.begin(), problem_.gamma.end(), [](double g) { return g != 0.0; });
  }

  std::size_t size() const { return n_; }
  double h() const { return h_; }
  double reaction_power() const { return verification_.reaction ? problem_.p : 1.0; }

  double boundary_slope(Endpoint l, double value) const {
    if (law_.kind() == LawKind::dirichlet_equivalent) return dirichlet_slope(law_.gains(), l, value);
    return law_.slope(l, value);
  }

  /// u_t = eps(u) D2 u + D1 F(u) + u^p (+ forcing), ghost values
  /// u_{-1} = u_1 - 2h v0(u_0), u_N = u_{N-2} + 2h v1(u_{N-1}).
  void operator()(double t, std::span<const double> u, std::span<double> out) const {
    const std::size_t n = n_;
    const double inv_h2 = 1.0 / (h_ * h_);
    const double inv_2h = 0.5 / h_;
    const double ghost_left = u[1] - 2.0 * h_ * boundary_slope(Endpoint::left, u[0]);
    const double ghost_right = u[n - 2] + 2.0 * h_ * boundary_slope(Endpoint::right, u[n - 1]);
    const auto& eps = problem_.diffusion;
    const std::span<const double> gamma = problem_.gamma;
    for (std::size_t j = 0; j < n; ++j) {
      const double um = j == 0 ? ghost_left : u[j - 1];
      const double up = j == n - 1 ? ghost_right : u[j + 1];
      double r = eps(u[j]) * (up - 2.0 * u[j] + um) * inv_h2;
      if (convective_) r += (convection_flux(gamma, up) - convection_flux(gamma, um)) * inv_2h;
      if (verification_.reaction) r += reaction_term(u[j], problem_.p);
      if (verification_.forcing) r += verification_.forcing(static_cast<double>(j) * h_, t);
      out[j] = r;
    }
  }

  /// Upper estimate of the spectral radius of the Jacobian at u.
  double spectral_radius(std::span<const double> u) const {
    double eps_max = 0.0, speed = 0.0, umax = 0.0;
    for (double v : u) {
      eps_max = std::max(eps_max, problem_.diffusion(v));
      speed = std::max(speed, std::abs(convection_speed(problem_.gamma, v)));
      umax = std::max(umax, std::abs(v));
    }
    double slope_gain = 0.0;
    if (law_.has_gains()) {
      const GainSet g = law_.energy_gains();
      for (double b : {u.front(), u.back()}) {
        slope_gain = std::max(slope_gain, std::max(g.lambda0, g.lambda1) + 3.0 * law_.gains().mu * b * b);
      }
    }
    const double react = problem_.p * std::pow(umax, problem_.p - 1.0);
    return 1.2 * (4.0 * eps_max / (h_ * h_) + 2.0 * eps_max * slope_gain / h_ + 2.0 * speed / h_ + react);
  }

  double max_diffusivity(std::span<const double> u) const {
    double m = 0.0;
    for (double v : u) m = std::max(m, problem_.diffusion(v));
    return m;
  }

 private:
  const PdeProblem& problem_;
  const BoundaryLaw& law_;
  std::size_t n_;
  double h_;
  VerificationMode verification_;
  bool convective_ = false;
};

/// Semi-discrete right-hand side of the PDE at t = 0.
inline GridFunction rhs(const GridFunction& u, const PdeProblem& problem, const BoundaryLaw& law,
                        const VerificationMode& verification = {}) {
  Semidiscretization semi(problem, law, u.size(), verification);
  std::vector<double> out(u.size());
  semi(0.0, u.values(), out);
  return GridFunction(std::move(out));
}

/// Mismatch between the initial slopes and the feedback law (0th-order
/// compatibility), using the one-sided second-order end derivatives.
inline CompatibilityReport check_compatibility(const GridFunction& u0, const BoundaryLaw& law) {
  const auto d = first_derivative(u0);
  CompatibilityReport r;
  r.residual0 = std::abs(d.front() - law.slope_left(u0.front()));
  r.residual1 = std::abs(d.back() - law.slope_right(u0.back()));
  r.tolerance = 10.0 * u0.h();
  r.pass = r.residual0 <= r.tolerance && r.residual1 <= r.tolerance;
  return r;
}

/// Cubic-Hermite blend over a boundary layer of width 5h that makes the
/// discrete end slopes match the law while keeping the boundary values.
inline GridFunction compatibilize(const GridFunction& u0, const BoundaryLaw& law) {
  const std::size_t n = u0.size();
  const double h = u0.h();
  const double width = 5.0 * h;
  std::vector<double> v(u0.values().begin(), u0.values().end());
  // Bump b(x) = x (1 - x/w)^2 on [0, w]: b(0) = 0, b(w) = b'(w) = 0.
  auto bump = [width](double x) {
    if (x >= width) return 0.0;
    const double s = 1.0 - x / width;
    return x * s * s;
  };
  // Discrete one-sided slope of the sampled bump, so the correction
  // zeroes the discrete residual exactly.
  const double bump_slope = (-3.0 * bump(0.0) + 4.0 * bump(h) - bump(2.0 * h)) / (2.0 * h);
  const auto d = first_derivative(u0);
  const double c0 = (law.slope_left(u0.front()) - d.front()) / bump_slope;
  const double c1 = (law.slope_right(u0.back()) - d.back()) / bump_slope;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) * h;
    v[j] += c0 * bump(x) - c1 * bump(1.0 - x);
  }
  return GridFunction(std::move(v));
}

namespace detail {

// Coefficients of the s-stage RKC2 scheme with damping 2/13.
struct RkcCoefficients {
  std::vector<double> mu, nu, mu_tilde, gamma_tilde, c;
};

inline RkcCoefficients rkc_coefficients(int s) {
  const double damping = 2.0 / 13.0;
  const double w0 = 1.0 + damping / (static_cast<double>(s) * static_cast<double>(s));
  std::vector<double> T(s + 1), dT(s + 1), ddT(s + 1);
  T[0] = 1.0;
  T[1] = w0;
  dT[0] = 0.0;
  dT[1] = 1.0;
  ddT[0] = 0.0;
  ddT[1] = 0.0;
  for (int j = 2; j <= s; ++j) {
    T[j] = 2.0 * w0 * T[j - 1] - T[j - 2];
    dT[j] = 2.0 * T[j - 1] + 2.0 * w0 * dT[j - 1] - dT[j - 2];
    ddT[j] = 4.0 * dT[j - 1] + 2.0 * w0 * ddT[j - 1] - ddT[j - 2];
  }
  const double w1 = dT[s] / ddT[s];
  std::vector<double> b(s + 1);
  for (int j = 2; j <= s; ++j) b[j] = ddT[j] / (dT[j] * dT[j]);
  b[0] = b[1] = b[2];

  RkcCoefficients k;
  k.mu.assign(s + 1, 0.0);
  k.nu.assign(s + 1, 0.0);
  k.mu_tilde.assign(s + 1, 0.0);
  k.gamma_tilde.assign(s + 1, 0.0);
  k.c.assign(s + 1, 0.0);
  k.mu_tilde[1] = b[1] * w1;
  k.c[1] = k.mu_tilde[1];
  for (int j = 2; j <= s; ++j) {
    k.mu[j] = 2.0 * w0 * b[j] / b[j - 1];
    k.nu[j] = -b[j] / b[j - 2];
    k.mu_tilde[j] = 2.0 * w1 * b[j] / b[j - 1];
    k.gamma_tilde[j] = -(1.0 - b[j - 1] * T[j - 1]) * k.mu_tilde[j];
    k.c[j] = k.mu[j] * k.c[j - 1] + k.nu[j] * k.c[j - 2] + k.mu_tilde[j] + k.gamma_tilde[j];
  }
  return k;
}

class Stepper {
 public:
  Stepper(const Semidiscretization& semi, const SolverConfig& config) : semi_(semi), config_(config) {
    const std::size_t n = semi.size();
    for (auto& w : work_) w.assign(n, 0.0);
  }

  /// Step size the integrator would like from state u.
  double preferred_dt(std::span<const double> u) const {
    const double h = semi_.h();
    if (config_.integrator == Integrator::rk4) {
      return config_.cfl_safety * h * h / (2.0 * semi_.max_diffusivity(u));
    }
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    double dt = config_.dt_max;
    // Resolve reaction growth so that escape is followed, not stepped over.
    const double p = semi_.reaction_power();
    if (umax > 0.0 && p > 1.0) dt = std::min(dt, 0.1 / (p * std::pow(umax, p - 1.0)));
    return dt;
  }

  void step(double t, double dt, std::vector<double>& u) {
    if (config_.integrator == Integrator::rk4) {
      rk4(t, dt, u);
    } else {
      rkc(t, dt, u);
    }
  }

 private:
  void rk4(double t, double dt, std::vector<double>& u) {
    auto& k1 = work_[0];
    auto& k2 = work_[1];
    auto& k3 = work_[2];
    auto& k4 = work_[3];
    auto& tmp = work_[4];
    const std::size_t n = u.size();
    semi_(t, u, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt * k1[j];
    semi_(t + 0.5 * dt, tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt * k2[j];
    semi_(t + 0.5 * dt, tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = u[j] + dt * k3[j];
    semi_(t + dt, tmp, k4);
    for (std::size_t j = 0; j < n; ++j) u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }

  void rkc(double t, double dt, std::vector<double>& u) {
    const double rho = semi_.spectral_radius(u);
    const int s = std::max(2, 1 + static_cast<int>(std::sqrt(1.0 + 1.54 * dt * rho)));
    if (static_cast<int>(coefficients_.mu.size()) != s + 1) coefficients_ = rkc_coefficients(s);
    const auto& k = coefficients_;

    const std::size_t n = u.size();
    auto& f0 = work_[0];
    auto& y_prev2 = work_[1];
    auto& y_prev = work_[2];
    auto& y_next = work_[3];
    auto& f = work_[4];
    semi_(t, u, f0);
    y_prev2 = u;
    for (std::size_t j = 0; j < n; ++j) y_prev[j] = u[j] + k.mu_tilde[1] * dt * f0[j];
    for (int stage = 2; stage <= s; ++stage) {
      semi_(t + k.c[stage - 1] * dt, y_prev, f);
      const double mu = k.mu[stage], nu = k.nu[stage];
      const double a = 1.0 - mu - nu;
      const double mt = k.mu_tilde[stage] * dt, gt = k.gamma_tilde[stage] * dt;
      for (std::size_t j = 0; j < n; ++j) {
        y_next[j] = a * u[j] + mu * y_prev[j] + nu * y_prev2[j] + mt * f[j] + gt * f0[j];
      }
      std::swap(y_prev2, y_prev);
      std::swap(y_prev, y_next);
    }
    u.swap(y_prev);
  }

  const Semidiscretization& semi_;
  const SolverConfig& config_;
  std::array<std::vector<double>, 5> work_;
  RkcCoefficients coefficients_;
};

inline SeriesRecord make_record(double t, const GridFunction& u, const GainSet& energy_gains,
                                std::span<const double> ut) {
  SeriesRecord r;
  r.t = t;
  const auto d1 = first_derivative(u);
  const double h = u.h();
  const double l2_sq = simpson_of_squares(u.values(), h);
  r.ux_l2_sq = simpson_of_squares(d1, h);
  r.uxx_l2_sq = dxx_l2_squared(u);
  r.ut_l2_sq = simpson_of_squares(ut, h);
  r.L2 = std::sqrt(l2_sq);
  r.H1 = std::sqrt(l2_sq + r.ux_l2_sq);
  r.H2 = std::sqrt(l2_sq + r.ux_l2_sq + r.uxx_l2_sq);
  r.max = norm_max(u);
  double dmax = 0.0;
  for (double v : d1) dmax = std::max(dmax, std::abs(v));
  r.ux_max = dmax;
  r.C1 = r.max + dmax;
  r.u0 = u.front();
  r.u1 = u.back();
  r.ux0 = d1.front();
  r.ux1 = d1.back();
  const auto& g = energy_gains;
  const double a = r.u0, b = r.u1;
  r.V = 0.5 * l2_sq;
  r.H = 0.5 * r.ux_l2_sq + 0.5 * g.lambda1 * b * b + 0.25 * g.mu * b * b * b * b + 0.5 * g.lambda0 * a * a +
        0.25 * g.mu * a * a * a * a;
  r.E = r.V + r.H;
  r.min_u = *std::min_element(u.values().begin(), u.values().end());
  r.mass = simpson(u.values(), h);
  return r;
}

}  // namespace detail

/// Integrate the closed-loop (or open-loop) system and record the series.
/// Failures are encoded in the outcome, never thrown.
inline Trajectory simulate(const PdeProblem& problem, const BoundaryLaw& law, const SolverConfig& config) {
  config.validate();
  if (problem.initial.size() != config.n_nodes) {
    throw InvalidParameter("initial condition has " + std::to_string(problem.initial.size()) +
                           " nodes, solver expects " + std::to_string(config.n_nodes));
  }

  Trajectory traj;
  traj.config = config;
  traj.compatibility = check_compatibility(problem.initial, law);
  GridFunction start = problem.initial;
  if (config.compatibilize) {
    start = compatibilize(problem.initial, law);
    traj.compatibilized = true;
  }

  const Semidiscretization semi(problem, law, config.n_nodes, config.verification);
  detail::Stepper stepper(semi, config);
  const GainSet energy_gains = law.energy_gains();

  std::vector<double> u(start.values().begin(), start.values().end());
  std::vector<double> ut(u.size());
  const std::size_t snapshot_stride =
      config.snapshot_every > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.snapshot_every / config.record_every)))
          : 1;

  std::size_t record_index = 0;
  auto record = [&](double t, bool force_snapshot) {
    semi(t, u, ut);
    GridFunction g(u);
    traj.times.push_back(t);
    traj.series.push_back(detail::make_record(t, g, energy_gains, ut));
    if (force_snapshot || record_index % snapshot_stride == 0) {
      traj.snapshot_times.push_back(t);
      traj.snapshots.push_back(std::move(g));
    }
    ++record_index;
  };

  double t = 0.0;
  record(t, true);
  std::size_t next_k = 1;
  const double eps_t = 1e-12 * std::max(1.0, config.t_end);
  traj.outcome = {OutcomeKind::completed, config.t_end};

  if (auto flag = detect_blowup(u, config)) {
    traj.outcome = {OutcomeKind::blowup, 0.0};
    return traj;
  }

  while (t < config.t_end - eps_t) {
    const double next_record = std::min(config.t_end, static_cast<double>(next_k) * config.record_every);
    const double dt_pref = stepper.preferred_dt(u);
    if (!(dt_pref >= config.dt_min)) {
      traj.outcome = {OutcomeKind::dt_underflow, t};
      break;
    }
    double dt = std::min(dt_pref, next_record - t);
    const bool hits_record = dt >= next_record - t - eps_t;
    std::vector<double> previous = u;
    stepper.step(t, dt, u);
    ++traj.steps;
    t = hits_record ? next_record : t + dt;

    if (auto flag = detect_blowup(u, config)) {
      traj.outcome = {OutcomeKind::blowup, t};
      u.swap(previous);
      break;
    }
    if (hits_record) {
      const bool last = t >= config.t_end - eps_t;
      record(t, last);
      ++next_k;
    }
  }
  return traj;
}

}  // namespace parabctl
