#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parabctl/error.hpp"

namespace parabctl {

/// Field sampled on the uniform grid x_j = j*h, h = 1/(N-1), over [0,1].
/// N is odd and at least 3 so that composite Simpson applies.
class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 3 || values_.size() % 2 == 0) {
      throw InvalidParameter("GridFunction needs an odd node count >= 3, got " +
                             std::to_string(values_.size()));
    }
  }

  template <typename F>
  static GridFunction sample(std::size_t n_nodes, F&& f) {
    std::vector<double> v(n_nodes);
    const double h = n_nodes > 1 ? 1.0 / static_cast<double>(n_nodes - 1) : 0.0;
    for (std::size_t j = 0; j < n_nodes; ++j) v[j] = f(static_cast<double>(j) * h);
    return GridFunction(std::move(v));
  }

  static GridFunction zeros(std::size_t n_nodes) { return GridFunction(std::vector<double>(n_nodes, 0.0)); }

  std::size_t size() const { return values_.size(); }
  double h() const { return 1.0 / static_cast<double>(values_.size() - 1); }
  double x(std::size_t j) const { return static_cast<double>(j) * h(); }

  double operator[](std::size_t j) const { return values_[j]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  std::span<const double> values() const { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  std::vector<double> values_;
};

namespace detail {

// Composite Simpson on a uniform grid with an odd number of nodes.
inline double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  double odd = 0.0, even = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) (j % 2 ? odd : even) += f[j];
  return h / 3.0 * (f.front() + f.back() + 4.0 * odd + 2.0 * even);
}

inline double simpson_of_squares(std::span<const double> f, double h) {
  std::vector<double> sq(f.size());
  std::transform(f.begin(), f.end(), sq.begin(), [](double v) { return v * v; });
  return simpson(sq, h);
}

}  // namespace detail

/// First derivative: central in the interior, one-sided second order at the ends.
inline std::vector<double> first_derivative(const GridFunction& f) {
  const std::size_t n = f.size();
  const double h = f.h();
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
  return d;
}

/// Second derivative: central in the interior, one-sided second order at the
/// ends when N >= 5 (the 3-node grid falls back to the single central value).
inline std::vector<double> second_derivative(const GridFunction& f) {
  const std::size_t n = f.size();
  const double h2 = f.h() * f.h();
  std::vector<double> d(n);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / h2;
  if (n >= 5) {
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  } else {
    d[0] = d[1];
    d[n - 1] = d[n - 2];
  }
  return d;
}

inline double norm_l2(const GridFunction& f) { return std::sqrt(detail::simpson_of_squares(f.values(), f.h())); }

/// |f_x|^2 in L2, the piece shared by the H1 norm and the energy H.
inline double dx_l2_squared(const GridFunction& f) { return detail::simpson_of_squares(first_derivative(f), f.h()); }

inline double dxx_l2_squared(const GridFunction& f) { return detail::simpson_of_squares(second_derivative(f), f.h()); }

inline double norm_max(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double norm_h1(const GridFunction& f) {
  const double l2 = norm_l2(f);
  return std::sqrt(l2 * l2 + dx_l2_squared(f));
}

inline double norm_h2(const GridFunction& f) {
  const double h1 = norm_h1(f);
  return std::sqrt(h1 * h1 + dxx_l2_squared(f));
}

inline double norm_c1(const GridFunction& f) {
  double dmax = 0.0;
  for (double v : first_derivative(f)) dmax = std::max(dmax, std::abs(v));
  return norm_max(f) + dmax;
}

/// Outcome of a grid check of a continuum inequality lhs <= rhs.
struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = true;

  double violation() const { return std::max(0.0, lhs - rhs); }
};

/// Discretization slack for the inequality checks.
inline double discretization_tolerance(const GridFunction& f) { return 10.0 * f.h() * f.h(); }

/// Agmon: |f|_inf^2 <= |f|^2 + 2 |f| |f_x|.
inline InequalityReport check_agmon(const GridFunction& f) {
  const double l2 = norm_l2(f);
  const double dx = std::sqrt(dx_l2_squared(f));
  const double mx = norm_max(f);
  InequalityReport r;
  r.lhs = mx * mx;
  r.rhs = l2 * l2 + 2.0 * l2 * dx;
  r.tolerance = discretization_tolerance(f);
  r.pass = r.lhs <= r.rhs + r.tolerance;
  return r;
}

enum class Endpoint { left = 0, right = 1 };

/// Poincare: -2 f(l)^2 <= -|f|^2 + 4 |f_x|^2.
inline InequalityReport check_poincare(const GridFunction& f, Endpoint l) {
  const double fl = l == Endpoint::left ? f.front() : f.back();
  const double l2 = norm_l2(f);
  InequalityReport r;
  r.lhs = -2.0 * fl * fl;
  r.rhs = -l2 * l2 + 4.0 * dx_l2_squared(f);
  r.tolerance = discretization_tolerance(f);
  r.pass = r.lhs <= r.rhs + r.tolerance;
  return r;
}

}  // namespace parabctl
