#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "parabctl/solver.hpp"

namespace parabctl {
namespace {

constexpr double pi = std::numbers::pi;

PdeProblem plain(GridFunction u0, std::vector<double> gamma = {}) {
  return PdeProblem(DiffusionModel::constant(1.0), std::move(gamma), 2.0, std::move(u0));
}

BoundaryLaw cubic_law(const PdeProblem& pb, LawKind kind = LawKind::neumann_cubic_both) {
  return BoundaryLaw::make(kind, derive_gains(FreeGains{}, pb.diffusion.eps_lower(), pb.gamma), pb.gamma,
                           pb.diffusion.eps_lower());
}

TEST(Rhs, ZeroIsAnEquilibrium) {
  const auto pb = plain(GridFunction::zeros(51), {0.3, -0.2});
  const auto law = cubic_law(pb);
  const auto r = rhs(pb.initial, pb, law);
  for (double v : r.values()) EXPECT_EQ(v, 0.0);
}

TEST(Rhs, UniformStateFollowsTheOde) {
  const auto pb = plain(GridFunction::sample(51, [](double) { return 0.7; }));
  const auto r = rhs(pb.initial, pb, BoundaryLaw::open_loop());
  for (double v : r.values()) EXPECT_DOUBLE_EQ(v, 0.49);
}

TEST(Rhs, LaplacianOfCosineIsSecondOrder) {
  auto err = [](std::size_t n) {
    const auto u = GridFunction::sample(n, [](double x) { return std::cos(pi * x); });
    const auto pb = plain(u);
    VerificationMode off;
    off.reaction = false;
    const auto r = rhs(u, pb, BoundaryLaw::open_loop(), off);
    double e = 0.0;
    for (std::size_t j = 0; j < n; ++j) e = std::max(e, std::abs(r[j] + pi * pi * u[j]));
    return e;
  };
  EXPECT_LT(err(101), 2.0 * pi * pi * pi * pi / 12.0 / (100.0 * 100.0));
  EXPECT_NEAR(std::log2(err(51) / err(101)), 2.0, 0.05);
}

TEST(Rhs, ConvectionUsesTheFluxDerivative) {
  // Linear profile, gamma_1 = 1: F(u) = u^2/2, d/dx F = u u_x.
  const auto u = GridFunction::sample(21, [](double x) { return x; });
  const auto pb = plain(u, {1.0});
  VerificationMode off;
  off.reaction = false;
  const auto r = rhs(u, pb, BoundaryLaw::open_loop(), off);
  for (std::size_t j = 1; j + 1 < u.size(); ++j) EXPECT_NEAR(r[j], u.x(j), 1e-12);
}

TEST(Blowup, Detection) {
  SolverConfig cfg;
  std::vector<double> zero(5, 0.0);
  EXPECT_FALSE(detect_blowup(zero, cfg).has_value());
  std::vector<double> bad = {0.0, NAN, 0.0};
  EXPECT_TRUE(detect_blowup(bad, cfg).has_value());
  std::vector<double> big = {0.0, 2.0 * cfg.blowup_max, 0.0};
  const auto flag = detect_blowup(big, cfg);
  ASSERT_TRUE(flag.has_value());
  EXPECT_EQ(flag->reason, BlowupFlag::Reason::threshold);
}

TEST(Simulate, ZeroStaysZero) {
  const auto pb = plain(GridFunction::zeros(51));
  SolverConfig cfg;
  cfg.n_nodes = 51;
  cfg.t_end = 0.5;
  cfg.record_every = 0.1;
  const auto traj = simulate(pb, cubic_law(pb), cfg);
  EXPECT_EQ(traj.outcome.kind, OutcomeKind::completed);
  ASSERT_EQ(traj.series.size(), 6u);
  for (const auto& r : traj.series) {
    EXPECT_EQ(r.L2, 0.0);
    EXPECT_EQ(r.E, 0.0);
    EXPECT_EQ(r.max, 0.0);
  }
  EXPECT_NEAR(traj.series.back().t, 0.5, 1e-15);
}

TEST(Simulate, OpenLoopBlowupMatchesOdeTime) {
  for (auto integrator : {Integrator::rk4, Integrator::rkc}) {
    const auto pb = plain(GridFunction::sample(51, [](double) { return 1.0; }));
    SolverConfig cfg;
    cfg.n_nodes = 51;
    cfg.t_end = 2.0;
    cfg.integrator = integrator;
    const auto traj = simulate(pb, BoundaryLaw::open_loop(), cfg);
    EXPECT_EQ(traj.outcome.kind, OutcomeKind::blowup) << to_string(integrator);
    EXPECT_GE(traj.outcome.time, 0.95);
    EXPECT_LE(traj.outcome.time, 1.05);
  }
}

TEST(Simulate, ClosedLoopDecaysWithinL2Envelope) {
  const auto pb = plain(GridFunction::sample(51, [](double x) { return 0.01 * std::sin(pi * x); }));
  SolverConfig cfg;
  cfg.n_nodes = 51;
  cfg.t_end = 5.0;
  cfg.record_every = 0.5;
  const auto traj = simulate(pb, cubic_law(pb), cfg);
  ASSERT_EQ(traj.outcome.kind, OutcomeKind::completed);
  const double l0 = traj.series.front().L2;
  const double sigma = 0.2 - 2.0 * std::sqrt(3.0) * traj.series.front().H1;
  EXPECT_LE(traj.series.back().L2, l0 * std::exp(-0.5 * sigma * cfg.t_end));
}

TEST(Simulate, RecordsAndSnapshotsOnSchedule) {
  const auto pb = plain(GridFunction::sample(21, [](double x) { return 0.01 * x; }));
  SolverConfig cfg;
  cfg.n_nodes = 21;
  cfg.t_end = 1.0;
  cfg.record_every = 0.1;
  cfg.snapshot_every = 0.3;
  const auto traj = simulate(pb, cubic_law(pb), cfg);
  EXPECT_EQ(traj.series.size(), 11u);
  // records 0, 3, 6, 9 plus the final one
  EXPECT_EQ(traj.snapshots.size(), 5u);
  EXPECT_NEAR(traj.snapshot_times.back(), 1.0, 1e-12);
  for (std::size_t k = 0; k < traj.times.size(); ++k) EXPECT_NEAR(traj.times[k], 0.1 * k, 1e-12);
}

TEST(Simulate, RejectsMismatchedConfig) {
  const auto pb = plain(GridFunction::zeros(21));
  SolverConfig cfg;
  cfg.n_nodes = 51;
  EXPECT_THROW(simulate(pb, BoundaryLaw::open_loop(), cfg), InvalidParameter);
  cfg.n_nodes = 21;
  cfg.t_end = -1.0;
  EXPECT_THROW(simulate(pb, BoundaryLaw::open_loop(), cfg), InvalidParameter);
  cfg.t_end = 1.0;
  cfg.n_nodes = 9;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
}

TEST(Simulate, TinyDtLimitReportsUnderflow) {
  const auto pb = plain(GridFunction::zeros(21));
  SolverConfig cfg;
  cfg.n_nodes = 21;
  cfg.dt_min = 1.0;
  const auto traj = simulate(pb, BoundaryLaw::open_loop(), cfg);
  EXPECT_EQ(traj.outcome.kind, OutcomeKind::dt_underflow);
}

TEST(Compatibility, Examples) {
  const auto zero = plain(GridFunction::zeros(51));
  EXPECT_TRUE(check_compatibility(zero.initial, cubic_law(zero)).pass);

  const double c = 2.0;
  const auto cpb = plain(GridFunction::sample(51, [c](double) { return c; }), {2.0});
  const auto law = cubic_law(cpb);
  const auto rep = check_compatibility(cpb.initial, law);
  const auto& g = law.gains();
  EXPECT_NEAR(rep.residual0, std::abs(g.lambda0 * c + g.mu * c * c * c), 1e-12);
  EXPECT_FALSE(rep.pass);

  const auto fixed = compatibilize(cpb.initial, law);
  const auto after = check_compatibility(fixed, law);
  EXPECT_TRUE(after.pass);
  EXPECT_NEAR(after.residual0, 0.0, 1e-9);
  EXPECT_NEAR(after.residual1, 0.0, 1e-9);
  EXPECT_DOUBLE_EQ(fixed.front(), c);
  EXPECT_DOUBLE_EQ(fixed.back(), c);
  EXPECT_DOUBLE_EQ(fixed[25], c);
}

TEST(Rkc, StageTimesEndAtOne) {
  for (int s : {2, 3, 7, 20, 60}) {
    const auto k = detail::rkc_coefficients(s);
    EXPECT_NEAR(k.c[s], 1.0, 1e-12) << s;
    for (int j = 1; j < s; ++j) EXPECT_LT(k.c[j], k.c[j + 1]) << s;
  }
}

TEST(Rkc, SecondOrderInTime) {
  // Linear ODE system from a smooth decaying mode; compare against the exact exp.
  const auto u0 = GridFunction::sample(21, [](double x) { return std::cos(pi * x); });
  PdeProblem pb(DiffusionModel::constant(1.0), {}, 2.0, u0);
  auto err = [&](double dt) {
    SolverConfig cfg;
    cfg.n_nodes = 21;
    cfg.t_end = 0.2;
    cfg.record_every = 0.2;
    cfg.integrator = Integrator::rkc;
    cfg.dt_max = dt;
    cfg.verification.reaction = false;
    const auto traj = simulate(pb, BoundaryLaw::open_loop(), cfg);
    return traj.series.back().L2;
  };
  // Differences between successive halvings shrink by about 4.
  const double a = err(0.02), b = err(0.01), c = err(0.005);
  EXPECT_NEAR(std::log2(std::abs(a - b) / std::abs(b - c)), 2.0, 0.3);
}

TEST(DirichletSlope, InvertsTheDirichletMap) {
  GainSet g;
  g.lambda0 = g.lambda1 = 0.3;
  g.mu = 0.8;
  for (double s : {-3.0, -0.1, 0.0, 0.4, 5.0}) {
    for (auto l : {Endpoint::left, Endpoint::right}) {
      EXPECT_NEAR(dirichlet_slope(g, l, dirichlet_inverse(g, l, s)), s, 1e-10);
      EXPECT_NEAR(dirichlet_slope(g, l, s), flux(g, l, s), 1e-10 * std::max(1.0, std::abs(flux(g, l, s))));
    }
  }
}

TEST(DirichletEquivalent, MatchesNeumannForm) {
  const auto pb = plain(GridFunction::sample(41, [](double x) { return 0.05 * std::sin(pi * x) + 0.02; }),
                        {0.5, 0.2});
  SolverConfig cfg;
  cfg.n_nodes = 41;
  cfg.t_end = 1.0;
  cfg.record_every = 0.1;
  const auto neumann = simulate(pb, cubic_law(pb), cfg);
  const auto dirichlet = simulate(pb, cubic_law(pb, LawKind::dirichlet_equivalent), cfg);
  ASSERT_EQ(neumann.snapshots.size(), dirichlet.snapshots.size());
  for (std::size_t k = 0; k < neumann.snapshots.size(); ++k) {
    for (std::size_t j = 0; j < 41; ++j) {
      EXPECT_NEAR(neumann.snapshots[k][j], dirichlet.snapshots[k][j], 1e-12);
    }
  }
}

TEST(Integrator, StringRoundTrip) {
  EXPECT_EQ(integrator_from_string("rk4"), Integrator::rk4);
  EXPECT_EQ(integrator_from_string("rkc"), Integrator::rkc);
  EXPECT_THROW(integrator_from_string("euler"), InvalidParameter);
}

}  // namespace
}  // namespace parabctl
