#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "parabctl/diagnostics.hpp"

namespace parabctl {
namespace {

constexpr double pi = std::numbers::pi;

struct Run {
  PdeProblem problem;
  GainSet gains;
  BoundaryLaw law;
  CertificateReport report;
  Trajectory traj;
};

Run closed_loop(double amplitude, double t_end, std::size_t n = 51) {
  PdeProblem pb(DiffusionModel::constant(1.0), {}, 2.0,
                GridFunction::sample(n, [amplitude](double x) { return amplitude * std::sin(pi * x); }));
  const auto g = derive_gains(FreeGains{}, 1.0, pb.gamma);
  const auto law = BoundaryLaw::make(LawKind::neumann_cubic_both, g, pb.gamma, 1.0);
  const auto report = certify(pb, g);
  SolverConfig cfg;
  cfg.n_nodes = n;
  cfg.t_end = t_end;
  cfg.record_every = 0.01;
  auto traj = simulate(pb, law, cfg);
  return Run{pb, g, law, report, std::move(traj)};
}

TEST(Lyapunov, ZeroField) {
  const auto z = GridFunction::zeros(21);
  GainSet g;
  g.lambda0 = g.lambda1 = 1.0;
  g.mu = 1.0;
  EXPECT_EQ(lyapunov_v(z), 0.0);
  EXPECT_EQ(lyapunov_h(z, g), 0.0);
  EXPECT_EQ(lyapunov_e(z, g), 0.0);
}

TEST(Lyapunov, ConstantField) {
  const double c = 0.3, lambda = 0.7;
  const auto u = GridFunction::sample(21, [c](double) { return c; });
  GainSet g;
  g.lambda0 = g.lambda1 = lambda;
  EXPECT_NEAR(lyapunov_v(u), c * c / 2.0, 1e-15);
  EXPECT_NEAR(lyapunov_h(u, g), lambda * c * c, 1e-15);
  EXPECT_NEAR(lyapunov_e(u, g), c * c * (0.5 + lambda), 1e-15);
}

TEST(Lyapunov, EnergyDominatesItsParts) {
  GainSet g;
  g.lambda0 = 0.2;
  g.lambda1 = 0.4;
  g.mu = 0.5;
  for (int k = 1; k <= 10; ++k) {
    const auto u = GridFunction::sample(31, [k](double x) { return std::sin(k * x) - 0.3 * k * x; });
    EXPECT_GE(lyapunov_e(u, g), lyapunov_v(u));
    EXPECT_GE(lyapunov_e(u, g), lyapunov_h(u, g));
  }
}

TEST(Lyapunov, MatchesRecordedSeries) {
  const auto run = closed_loop(0.02, 0.2);
  const auto& s = run.traj.series.front();
  EXPECT_NEAR(s.V, lyapunov_v(run.problem.initial), 1e-15);
  EXPECT_NEAR(s.E, lyapunov_e(run.problem.initial, run.gains), 1e-15);
}

TEST(WorstCase, TracksSmallestSlack) {
  detail::WorstCase w("x");
  w.add(0.0, 1.0, 0.0);
  w.add(1.0, -0.05, 0.1);
  w.add(2.0, 0.01, 0.0);
  const auto r = w.finish();
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.worst_time, 2.0);
  EXPECT_EQ(r.worst_margin, 0.01);

  detail::WorstCase bad("y");
  bad.add(0.0, NAN, 1.0);
  EXPECT_FALSE(bad.finish().pass);
}

TEST(Checks, ZeroTrajectoryPassesEverything) {
  const auto run = closed_loop(0.0, 0.5);
  for (const auto& c : run_all_checks(run.traj, run.problem, run.report)) {
    EXPECT_TRUE(c.pass) << c.name;
    EXPECT_FALSE(c.advisory) << c.name;
  }
}

TEST(Checks, CertifiedRunPasses) {
  const auto probe = closed_loop(1.0, 0.1);
  // Scale to sit inside the certified region.
  const double a = 0.5 * std::sqrt(2.0 * probe.report.omega) / probe.report.kappa0;
  const auto run = closed_loop(a, 5.0);
  ASSERT_TRUE(run.report.certified());
  EXPECT_TRUE(check_l2_decay(run.traj, run.report).pass);
  EXPECT_TRUE(check_max_decay(run.traj, run.report).pass);
  EXPECT_TRUE(check_h1_decay(run.traj, run.report).pass);
  EXPECT_TRUE(check_energy_dissipation(run.traj, run.problem, run.gains).pass);
  EXPECT_TRUE(check_e_monotone(run.traj).pass);
  EXPECT_TRUE(check_kappa_freeze(run.traj, run.report).pass);
  EXPECT_TRUE(check_positivity(run.traj, run.problem.initial).pass);
  EXPECT_TRUE(check_agmon_chain(run.traj).pass);
  EXPECT_TRUE(check_max_by_energy(run.traj).pass);
  const auto rates = energy_rates(run.traj.series.front().E, run.problem, run.gains.free);
  EXPECT_GT(rates.alpha, 0.0);
  EXPECT_GT(rates.Lambda, 0.0);
}

TEST(Checks, OutsideTheRegionIsAdvisory) {
  const auto run = closed_loop(0.5, 0.5);
  ASSERT_TRUE(run.report.admissible);
  ASSERT_FALSE(run.report.in_region);
  const auto c = check_l2_decay(run.traj, run.report);
  EXPECT_TRUE(c.advisory);
  for (const auto& r : run_all_checks(run.traj, run.problem, run.report)) {
    if (r.name == "l2_decay" || r.name == "e_monotone") {
      EXPECT_TRUE(r.advisory) << r.name;
    }
  }
}

TEST(Checks, EnvelopeChecksNeedAdmissibility) {
  const auto run = closed_loop(0.01, 0.2);
  CertificateReport r = run.report;
  r.admissible = false;
  r.zeta_bar.reset();
  EXPECT_THROW(check_l2_decay(run.traj, r), CertificatePrecondition);
  const auto all = run_all_checks(run.traj, run.problem, r);
  for (const auto& c : all) EXPECT_NE(c.name, "l2_decay");
}

TEST(Checks, DetectsViolations) {
  auto run = closed_loop(0.01, 0.5);
  run.traj.series.back().E = run.traj.series.front().E + 1.0;
  EXPECT_FALSE(check_e_monotone(run.traj).pass);
  run.traj.series[2].min_u = -1.0;
  EXPECT_FALSE(check_positivity(run.traj, run.problem.initial).pass);
  run.traj.series[3].max = 10.0;
  EXPECT_FALSE(check_max_by_energy(run.traj).pass);
  EXPECT_FALSE(check_agmon_chain(run.traj).pass);
}

TEST(Checks, PositivitySkippedForSignChangingData) {
  auto run = closed_loop(-0.01, 0.2);
  EXPECT_TRUE(check_positivity(run.traj, run.problem.initial).skipped);
}

TEST(Checks, HigherOrderSkippedOnShortHorizon) {
  const auto run = closed_loop(0.01, 0.5);
  const auto c = check_higher_order(run.traj, run.report);
  EXPECT_TRUE(c.skipped);
  EXPECT_TRUE(c.pass);
}

}  // namespace
}  // namespace parabctl
