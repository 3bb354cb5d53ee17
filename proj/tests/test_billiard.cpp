#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "appellsep/billiard.hpp"
#include "appellsep/potentials.hpp"
#include "appellsep/sampling.hpp"

using namespace appellsep;

namespace {

SimConfig headline(std::optional<LaurentPoly> V, double dt = 1e-3, int bounces = 50) {
  SimConfig c;
  c.A = 3;
  c.B = 2;
  c.potential = std::move(V);
  c.initial = PhasePoint{{0.1, 1.0}, {0.2, 1.0}};
  c.dt = dt;
  c.bounce_max = bounces;
  c.sample_every = 10;
  return c;
}

LaurentPoly family2() { return ellipse_vk_laurent(EllipseFamilySpec{2, 1, make_rational(1, 20)}); }

double k1_of(const std::array<double, 2>& q, const std::array<double, 2>& p) {
  const double L = q[0] * p[1] - q[1] * p[0];
  return p[0] * p[0] / 3 + p[1] * p[1] / 2 - L * L / 6;
}

}  // namespace

TEST(Reflection, NormalAndTangentialIncidence) {
  const std::array<double, 2> pt{std::sqrt(3.0), 0.0};
  const auto n = reflect(pt, {1.0, 0.0}, 3, 2);
  EXPECT_DOUBLE_EQ(n[0], -1.0);
  EXPECT_NEAR(n[1], 0.0, 1e-16);
  const auto t = reflect(pt, {0.0, 1.0}, 3, 2);
  EXPECT_NEAR(t[0], 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(t[1], 1.0);
  EXPECT_THROW(reflect({1.0, 0.0}, {1.0, 0.0}, 3, 2), InvalidParameter);
}

TEST(Reflection, PreservesSpeedAndK1) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const double th = uniform_from(rng, 0, 2 * M_PI);
    const std::array<double, 2> pt{std::sqrt(3.0) * std::cos(th), std::sqrt(2.0) * std::sin(th)};
    const std::array<double, 2> p{uniform_from(rng, -1, 1), uniform_from(rng, -1, 1)};
    const auto out = reflect(pt, p, 3, 2);
    EXPECT_NEAR(std::hypot(out[0], out[1]) / std::hypot(p[0], p[1]), 1.0, 1e-14);
    const double k = k1_of(pt, p);
    // K1 can cancel to ~0 at the wall, so scale by the kinetic part
    EXPECT_LE(std::abs(k1_of(pt, out) - k), 1e-12 * (std::abs(k) + p[0] * p[0] + p[1] * p[1]));
  }
}

TEST(FreeFlight, QuadraticHitTimeMatchesBisection) {
  const SegmentIntegrator flow(3, 2, std::nullopt, 1e-14, 1e-3);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    State2 s;
    s.q = {uniform_from(rng, -1, 1), uniform_from(rng, -1, 1)};
    s.p = {uniform_from(rng, -1, 1), uniform_from(rng, -1, 1)};
    const double tau = free_flight_hit_time(3, 2, s.q, s.p);
    const auto res = flow.advance(s, tau + 1.0);
    ASSERT_TRUE(res.hit.has_value());
    EXPECT_NEAR(res.hit->t, tau, 1e-9);
  }
  EXPECT_THROW(free_flight_hit_time(3, 2, {0, 0}, {0, 0}), InvalidParameter);
}

TEST(Simulation, FreeBilliardConservesExactly) {
  auto cfg = headline(std::nullopt, 1e-2, 100);
  const auto rep = run(cfg);
  EXPECT_EQ(rep.bounces.size(), 100u);
  EXPECT_LE(rep.max_drift_H, 1e-10);
  EXPECT_LE(rep.max_drift_K, 1e-10);
  EXPECT_EQ(rep.k1_backend, "none");
}

TEST(Simulation, FreeBilliardIsTimeReversible) {
  auto cfg = headline(std::nullopt, 1e-2, 1000);
  cfg.t_max = 30.0;
  const auto fwd = run(cfg);
  ASSERT_GE(fwd.bounces.size(), 10u);
  const Sample& last = fwd.samples.back();
  auto back = cfg;
  back.initial = PhasePoint{{last.x, last.y}, {-last.px, -last.py}};
  const auto bwd = run(back);
  EXPECT_NEAR(bwd.samples.back().x, 0.1, 1e-6);
  EXPECT_NEAR(bwd.samples.back().y, 1.0, 1e-6);
}

TEST(Simulation, SolutionPotentialConservesPerturbedIntegral) {
  const auto rep = run(headline(family2()));
  EXPECT_EQ(rep.bounces.size(), 50u);
  EXPECT_FALSE(rep.aborted);
  EXPECT_EQ(rep.k1_backend, "exact-antiderivative");
  EXPECT_LE(rep.max_drift_H, 1e-6);
  EXPECT_LE(rep.max_drift_K, 1e-6);
  EXPECT_LE(rep.max_bounce_jump_K, 1e-12);
}

TEST(Simulation, NonSolutionControlDrifts) {
  const auto good = run(headline(family2()));
  const auto bad = run(headline(LaurentPoly::monomial(2, {4, 0}, make_rational(1, 20))));
  EXPECT_EQ(bad.k1_backend, "exact-path-integral");
  EXPECT_GE(bad.max_drift_K, 1e3 * good.max_drift_K);
}

TEST(Simulation, EnergyDriftIsFourthOrder) {
  std::vector<double> lx, ly;
  for (double dt : {2e-2, 1e-2, 5e-3, 2e-3}) {
    auto cfg = headline(family2(), dt, 10);
    cfg.keep_samples = false;
    const auto rep = run(cfg);
    lx.push_back(std::log(dt));
    ly.push_back(std::log(rep.max_drift_H));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, 4.0, 0.5);
}

TEST(Simulation, PoleApproachAbortsCleanly) {
  SimConfig cfg = headline(LaurentPoly::monomial(2, {0, -4}, make_rational(-1, 20)), 1e-3, 50);
  cfg.initial = PhasePoint{{0.1, 0.5}, {0.0, -1.0}};
  const auto rep = run(cfg);
  EXPECT_TRUE(rep.aborted);
  EXPECT_NE(rep.abort_reason.find("pole"), std::string::npos);
}

TEST(Simulation, InvalidConfigurations) {
  auto cfg = headline(std::nullopt);
  cfg.initial = PhasePoint{{2.0, 0.0}, {1.0, 0.0}};
  EXPECT_THROW(run(cfg), InvalidParameter);
  cfg = headline(std::nullopt);
  cfg.dt = 0;
  EXPECT_THROW(run(cfg), InvalidParameter);
  cfg = headline(LaurentPoly::constant(3, 1));
  EXPECT_THROW(run(cfg), ArityMismatch);
}
