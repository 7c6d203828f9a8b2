#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "parabctl/diffusion.hpp"
#include "parabctl/error.hpp"
#include "parabctl/grid.hpp"

namespace parabctl {

/// u_t = eps(u) u_xx + sum_i gamma_i u^i u_x + u^p on [0,1] with u(.,0) = initial.
struct PdeProblem {
  DiffusionModel diffusion;
  std::vector<double> gamma;  // gamma_1 .. gamma_n
  double p = 2.0;
  GridFunction initial;

  PdeProblem(DiffusionModel eps, std::vector<double> convection, double reaction_power, GridFunction u0)
      : diffusion(std::move(eps)), gamma(std::move(convection)), p(reaction_power), initial(std::move(u0)) {
    if (gamma.empty()) gamma.push_back(0.0);
    if (!(p > 1.0)) throw InvalidParameter("reaction exponent p must be > 1");
    if (initial.size() < 3 || initial.size() % 2 == 0) throw InvalidParameter("initial condition needs odd N >= 3");
    for (double g : gamma) {
      if (!std::isfinite(g)) throw InvalidParameter("convection coefficients must be finite");
    }
  }

  /// n, the number of convection coefficients (at least 1).
  std::size_t n() const { return gamma.size(); }

  /// gamma_i with the 1-based index used throughout; 0 beyond n.
  double gamma_at(std::size_t i) const { return i >= 1 && i <= gamma.size() ? gamma[i - 1] : 0.0; }
};

/// u^p for integer p (sign kept), odd extension |u|^(p-1) u otherwise.
inline double reaction_term(double u, double p) {
  const double rounded = std::round(p);
  if (rounded == p && std::abs(p) < 64.0) {
    const int k = static_cast<int>(rounded);
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= u;
    return r;
  }
  return std::copysign(std::pow(std::abs(u), p), u);
}

/// Flux F(u) = sum_i gamma_i u^(i+1)/(i+1), so that F(u)_x = sum_i gamma_i u^i u_x.
inline double convection_flux(std::span<const double> gamma, double u) {
  double f = 0.0;
  double power = u;  // u^(i+1) for i = 0 before the loop
  for (std::size_t i = 1; i <= gamma.size(); ++i) {
    power *= u;
    f += gamma[i - 1] * power / static_cast<double>(i + 1);
  }
  return f;
}

/// F'(u) = sum_i gamma_i u^i.
inline double convection_speed(std::span<const double> gamma, double u) {
  double s = 0.0;
  double power = 1.0;
  for (std::size_t i = 1; i <= gamma.size(); ++i) {
    power *= u;
    s += gamma[i - 1] * power;
  }
  return s;
}

}  // namespace parabctl
