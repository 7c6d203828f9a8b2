#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "parabctl/error.hpp"

namespace parabctl {

/// State-dependent diffusivity eps(u) with its lower bound and a
/// user-supplied nondecreasing envelope bounding |eps'(u)| on [-s, s].
///
/// The envelope is never derived from eps' numerically; presets carry their
/// closed-form envelope and custom models must supply one. validate() checks
/// all three properties by dense sampling.
class DiffusionModel {
 public:
  using Scalar = std::function<double(double)>;

  DiffusionModel(std::string name, Scalar eval, Scalar deriv, double eps_lower, Scalar envelope)
      : name_(std::move(name)),
        eval_(std::move(eval)),
        deriv_(std::move(deriv)),
        envelope_(std::move(envelope)),
        eps_lower_(eps_lower) {
    if (!(eps_lower_ > 0.0)) throw InvalidParameter("eps_lower must be > 0");
  }

  /// eps(u) = value, envelope 0.
  static DiffusionModel constant(double value) {
    if (!(value > 0.0)) throw InvalidParameter("constant diffusivity must be > 0");
    return DiffusionModel(
        "constant", [value](double) { return value; }, [](double) { return 0.0; }, value,
        [](double) { return 0.0; });
  }

  /// eps(u) = base + a u^2 with a >= 0; eps' = 2 a u, envelope 2 a s.
  static DiffusionModel quadratic(double base, double a) {
    if (!(base > 0.0)) throw InvalidParameter("quadratic diffusivity base must be > 0");
    if (a < 0.0) throw InvalidParameter("quadratic diffusivity coefficient must be >= 0");
    return DiffusionModel(
        "quadratic", [base, a](double u) { return base + a * u * u; },
        [a](double u) { return 2.0 * a * u; }, base, [a](double s) { return 2.0 * a * s; });
  }

  /// Piecewise-linear eps through (u_k, eps_k), held constant outside the
  /// table. The envelope is the running max of segment slopes reached
  /// from the origin, which is nondecreasing by construction.
  static DiffusionModel table(std::vector<double> u, std::vector<double> eps) {
    if (u.size() != eps.size() || u.size() < 2) throw InvalidParameter("diffusivity table needs >= 2 matching points");
    if (!std::is_sorted(u.begin(), u.end()) || std::adjacent_find(u.begin(), u.end()) != u.end()) {
      throw InvalidParameter("diffusivity table abscissae must be strictly increasing");
    }
    const double lower = *std::min_element(eps.begin(), eps.end());
    if (!(lower > 0.0)) throw InvalidParameter("diffusivity table values must be > 0");

    auto locate = [u](double x) {
      auto it = std::upper_bound(u.begin(), u.end(), x);
      return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - u.begin() - 1, 0,
                                                                 static_cast<std::ptrdiff_t>(u.size()) - 2));
    };
    auto eval = [u, eps, locate](double x) {
      if (x <= u.front()) return eps.front();
      if (x >= u.back()) return eps.back();
      const std::size_t k = locate(x);
      const double w = (x - u[k]) / (u[k + 1] - u[k]);
      return (1.0 - w) * eps[k] + w * eps[k + 1];
    };
    auto deriv = [u, eps, locate](double x) {
      if (x < u.front() || x > u.back()) return 0.0;
      const std::size_t k = locate(x);
      return (eps[k + 1] - eps[k]) / (u[k + 1] - u[k]);
    };
    auto envelope = [u, eps](double s) {
      double m = 0.0;
      for (std::size_t k = 0; k + 1 < u.size(); ++k) {
        const bool reached = u[k + 1] >= -s && u[k] <= s;
        if (reached) m = std::max(m, std::abs((eps[k + 1] - eps[k]) / (u[k + 1] - u[k])));
      }
      return m;
    };
    return DiffusionModel("table", eval, deriv, lower, envelope);
  }

  double operator()(double u) const { return eval_(u); }
  double derivative(double u) const { return deriv_(u); }
  double envelope(double s) const { return envelope_(s); }
  double eps_lower() const { return eps_lower_; }
  const std::string& name() const { return name_; }

  /// Same model shifted by a constant so that the lower bound becomes
  /// new_lower; eps' and the envelope are unchanged.
  DiffusionModel with_lower(double new_lower) const {
    const double shift = new_lower - eps_lower_;
    auto base = eval_;
    return DiffusionModel(name_, [base, shift](double u) { return base(u) + shift; }, deriv_, new_lower, envelope_);
  }

  /// Replace the envelope, e.g. with a looser user-supplied bound.
  DiffusionModel with_envelope(Scalar envelope) const {
    return DiffusionModel(name_, eval_, deriv_, eps_lower_, std::move(envelope));
  }

  struct Validation {
    bool lower_bound_ok = true;
    bool envelope_bounds_derivative = true;
    bool envelope_nondecreasing = true;
    double worst_lower_gap = 0.0;     // min eps(u) - eps_lower
    double worst_envelope_gap = 0.0;  // min envelope(|u|) - |eps'(u)|
    bool ok() const { return lower_bound_ok && envelope_bounds_derivative && envelope_nondecreasing; }
  };

  /// Dense sampling over |u| <= state_range. Checking |eps'(u)| against
  /// envelope(|u|) covers every s >= |u| because the envelope is checked
  /// to be nondecreasing on the same samples.
  Validation validate(double state_range, int samples = 4001) const {
    Validation v;
    v.worst_lower_gap = std::numeric_limits<double>::infinity();
    v.worst_envelope_gap = std::numeric_limits<double>::infinity();
    double prev_env = -std::numeric_limits<double>::infinity();
    const double tol = 1e-12;
    for (int k = 0; k < samples; ++k) {
      const double s = state_range * static_cast<double>(k) / static_cast<double>(samples - 1);
      const double env = envelope_(s);
      if (env < prev_env - tol * std::max(1.0, std::abs(prev_env))) v.envelope_nondecreasing = false;
      prev_env = env;
      for (double u : {s, -s}) {
        const double lower_gap = eval_(u) - eps_lower_;
        const double env_gap = env - std::abs(deriv_(u));
        v.worst_lower_gap = std::min(v.worst_lower_gap, lower_gap);
        v.worst_envelope_gap = std::min(v.worst_envelope_gap, env_gap);
        if (lower_gap < -tol * eps_lower_) v.lower_bound_ok = false;
        if (env_gap < -tol * std::max(1.0, env)) v.envelope_bounds_derivative = false;
      }
    }
    return v;
  }

 private:
  std::string name_;
  Scalar eval_;
  Scalar deriv_;
  Scalar envelope_;
  double eps_lower_;
};

}  // namespace parabctl
