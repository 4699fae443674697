#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "ult/model.hpp"

using namespace ult;

namespace {

SystemState standing(Vec2 com, double theta, Vec2 foot) {
  SystemState s;
  s.r_c = com;
  s.theta = theta;
  s.r_f = foot;
  return s;
}

// Elastic potential as a function of the hip position.
double potential(Vec2 hip, Vec2 foot, double xi, const ModelParams& mp) {
  const double stretch = (hip - foot).norm() - mp.l_0 - xi;
  return 0.5 * mp.k * stretch * stretch;
}

}  // namespace

TEST(LegVector, UprightWithHipOffset) {
  const LegGeometry g = leg_vector(standing({0, 1}, 0, {0, 0}), {});
  EXPECT_DOUBLE_EQ(g.r_l.x, 0.0);
  EXPECT_DOUBLE_EQ(g.r_l.y, 0.9);
  EXPECT_DOUBLE_EQ(g.l, 0.9);
}

TEST(LegVector, ZeroOffsetHipAtCom) {
  ModelParams mp;
  mp.d = 0.0;
  const LegGeometry g = leg_vector(standing({0, 1}, 0, {0, 0}), mp);
  EXPECT_DOUBLE_EQ(g.r_l.y, 1.0);
  EXPECT_DOUBLE_EQ(g.l, 1.0);
}

TEST(LegVector, LeaningTrunk) {
  const LegGeometry g = leg_vector(standing({0.5, 1.1}, 0.1, {0.3, 0}), {});
  const double x = 0.5 - 0.1 * std::sin(0.1) - 0.3;
  const double y = 1.1 - 0.1 * std::cos(0.1);
  EXPECT_NEAR(g.r_l.x, x, 1e-15);
  EXPECT_NEAR(g.r_l.y, y, 1e-15);
  EXPECT_NEAR(g.l, std::hypot(x, y), 1e-15);
}

TEST(LegVector, SingularWhenFootAtHip) {
  EXPECT_THROW(leg_vector(standing({0, 1}, 0, {0, 0.9}), {}), SingularConfiguration);
}

TEST(SpringForce, ZeroAtRestLength) {
  const SystemState s = standing({0.2, 1.3}, 0.2, {0, 0});
  const double l = leg_vector(s, {}).l;
  const Vec2 f = spring_force(s, l - 1.0, {});
  EXPECT_NEAR(f.x, 0.0, 1e-9);
  EXPECT_NEAR(f.y, 0.0, 1e-9);
}

TEST(SpringForce, CompressedAndStretchedVerticalLeg) {
  const Vec2 compressed = spring_force(standing({0, 1.0}, 0, {0, 0}), 0.0, {});
  EXPECT_NEAR(compressed.x, 0.0, 1e-12);
  EXPECT_NEAR(compressed.y, 2100.0, 1e-9);
  const Vec2 stretched = spring_force(standing({0, 1.2}, 0, {0, 0}), 0.0, {});
  EXPECT_NEAR(stretched.y, -2100.0, 1e-9);
}

TEST(SpringForce, NegativePotentialGradient) {
  const ModelParams mp;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const SystemState s = test::random_flight_state(rng);
    const double xi = std::uniform_real_distribution<double>(-0.1, 0.0)(rng);
    const Vec2 hip = hip_position(s, mp);
    const double h = 1e-6;
    const Vec2 grad{(potential(hip + Vec2{h, 0}, s.r_f, xi, mp) -
                     potential(hip - Vec2{h, 0}, s.r_f, xi, mp)) / (2 * h),
                    (potential(hip + Vec2{0, h}, s.r_f, xi, mp) -
                     potential(hip - Vec2{0, h}, s.r_f, xi, mp)) / (2 * h)};
    const Vec2 f = spring_force(s, xi, mp);
    const double scale = std::max(1.0, f.norm());
    EXPECT_LT((f + grad).norm() / scale, 1e-6) << "configuration " << i;
  }
}

TEST(SpringForce, RepulsiveOnlyWhenCompressed) {
  std::mt19937_64 rng(11);
  const ModelParams mp;
  for (int i = 0; i < 50; ++i) {
    const SystemState s = test::random_flight_state(rng);
    const LegGeometry g = leg_vector(s, mp);
    for (double xi : {-0.2, -0.05, 0.0}) {
      const double along = spring_force(s, xi, mp).dot(g.r_l);
      if (g.l < mp.l_0 + xi) EXPECT_GT(along, 0.0);
      if (g.l > mp.l_0 + xi) EXPECT_LT(along, 0.0);
    }
  }
}

TEST(HipTorqueForce, MagnitudeAndMoment) {
  const SystemState s = standing({0, 1.0}, 0, {0, 0});
  EXPECT_EQ(hip_force_on_foot(s, 0.0, {}).norm(), 0.0);
  const Vec2 f = hip_force_on_foot(s, 90.0, {});
  EXPECT_NEAR(f.norm(), 100.0, 1e-12);
  EXPECT_NEAR(f.y, 0.0, 1e-12);
  EXPECT_NEAR(leg_vector(s, {}).r_l.cross(f), 90.0, 1e-12);
}

TEST(FlightDerivative, BallisticAtRestLength) {
  SystemState s = standing({0, 1.1}, 0, {0, 0});
  s.v_c = {1, 2};
  s.v_f = {-1, 0.5};
  const StateDerivative d = flight_derivative(s, {0.0, 0.0}, {});
  EXPECT_NEAR(d.v_c.x, 0.0, 1e-12);
  EXPECT_NEAR(d.v_c.y, -9.81, 1e-12);
  EXPECT_NEAR(d.v_f.y, -9.81, 1e-12);
  EXPECT_NEAR(d.omega, 0.0, 1e-12);
  EXPECT_EQ(d.r_c, s.v_c);
  EXPECT_EQ(d.r_f, s.v_f);
}

TEST(FlightDerivative, VerticalForceBelowComHasNoMoment) {
  const StateDerivative d = flight_derivative(standing({0, 1.0}, 0, {0, 0}), {}, {});
  EXPECT_NEAR(d.omega, 0.0, 1e-12);
}

TEST(FlightDerivative, VerticalForceBehindComLeansTrunkForward) {
  // theta = pi/2 puts the hip 0.1 m behind the CoM. Pushing it up with
  // 2100 N is a clockwise moment of 210 N m, so theta accelerates at +42.
  const double th = std::numbers::pi / 2;
  const SystemState s = standing({0, 1.0}, th, {-0.1 * std::sin(th), 1.0 - 0.9 - 0.1 * std::cos(th)});
  EXPECT_NEAR(spring_force(s, 0.0, {}).y, 2100.0, 1e-9);
  const StateDerivative d = flight_derivative(s, {}, {});
  EXPECT_NEAR(d.omega, 42.0, 1e-9);
}

TEST(StanceDerivative, FootRowsZero) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const SystemState s = test::random_stance_state(rng);
    const StateDerivative d = stance_derivative(s, {123.0, 0.0}, {});
    EXPECT_EQ(d.r_f, Vec2{});
    EXPECT_EQ(d.v_f, Vec2{});
  }
}

TEST(StanceDerivative, CompressedVerticalLeg) {
  const StateDerivative d = stance_derivative(standing({0, 1.0}, 0, {0, 0}), {}, {});
  EXPECT_NEAR(d.v_c.y, 2100.0 / 80.0 - 9.81, 1e-12);
  const StateDerivative rest = stance_derivative(standing({0, 1.1}, 0, {0, 0}), {}, {});
  EXPECT_NEAR(rest.v_c.x, 0.0, 1e-12);
  EXPECT_NEAR(rest.v_c.y, -9.81, 1e-12);
}

TEST(StanceDerivative, TrunkRowsMatchFlight) {
  std::mt19937_64 rng(5);
  const SystemState s = test::random_stance_state(rng);
  const StateDerivative a = stance_derivative(s, {40.0, 0.0}, {});
  const StateDerivative b = flight_derivative(s, {40.0, 0.0}, {});
  EXPECT_EQ(a.v_c, b.v_c);
  EXPECT_EQ(a.omega, b.omega);
}

TEST(TouchdownImpact, ZeroesFootVelocityOnly) {
  SystemState s = standing({0.3, 1.0}, 0.2, {0.5, 1e-12});
  s.v_c = {4, -1};
  s.omega = 0.7;
  s.v_f = {2, -1};
  const SystemState after = touchdown_impact(s, Phase::Flight);
  EXPECT_EQ(after.v_f, Vec2{});
  EXPECT_EQ(after.r_f.y, 0.0);
  EXPECT_EQ(after.r_f.x, s.r_f.x);
  EXPECT_EQ(after.r_c, s.r_c);
  EXPECT_EQ(after.v_c, s.v_c);
  EXPECT_EQ(after.theta, s.theta);
  EXPECT_EQ(after.omega, s.omega);
}

TEST(TouchdownImpact, IdempotentAndEnergyLoss) {
  SystemState s = standing({0, 1.0}, 0, {0.2, 0});
  s.v_f = {2, -1};
  const ModelParams mp;
  const SystemState once = touchdown_impact(s, Phase::Flight);
  EXPECT_EQ(touchdown_impact(once, Phase::Flight), once);
  const double loss = diagnostics(s, 0.0, mp).energy - diagnostics(once, 0.0, mp).energy;
  EXPECT_NEAR(loss, 8.5, 1e-10);
}

TEST(TouchdownImpact, RejectedInStance) {
  EXPECT_THROW(touchdown_impact(SystemState{}, Phase::Stance), std::logic_error);
}

TEST(Diagnostics, Datum) {
  const ModelParams mp;
  // Both masses at height zero with the hip exactly l_0 from the foot.
  SystemState s = standing({0, 0}, 0, {std::sqrt(1.0 - 0.01), 0});
  EXPECT_NEAR(diagnostics(s, 0.0, mp).energy, 0.0, 1e-9);
  s.v_c = {0, 1};
  EXPECT_NEAR(diagnostics(s, 0.0, mp).energy, 40.0, 1e-9);
}

TEST(Conservation, AngularMomentumWithActiveTorque) {
  const ModelParams mp;
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const SystemState s0 = test::random_flight_state(rng);
    // Piecewise-constant torque, switching once the trunk has moved 0.15 m.
    auto tau = [&](const SystemState& s) {
      return s.r_c.x - s0.r_c.x > 0.15 ? -120.0 : 150.0;
    };
    const double xi = -0.087;
    const OdeResult r = test::integrate_flight(s0, xi, 0.25, tau, mp);
    const Diagnostics a = diagnostics(s0, xi, mp);
    const Diagnostics b = diagnostics(SystemState::from_vector(r.x), xi, mp);
    const double scale = std::max(1.0, std::abs(a.angular_momentum));
    EXPECT_LT(std::abs(b.angular_momentum - a.angular_momentum) / scale, 1e-6);
    // Linear momentum changes only by gravity.
    const double m = mp.m_c + mp.m_f;
    EXPECT_NEAR(b.momentum.x, a.momentum.x, 1e-7);
    EXPECT_NEAR(b.momentum.y, a.momentum.y - m * mp.g * r.t, 1e-7);
  }
}

TEST(Conservation, PassiveEnergy) {
  const ModelParams mp;
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const SystemState s0 = test::random_flight_state(rng);
    const double xi = -0.05;
    const OdeResult r = test::integrate_flight(s0, xi, 0.3, [](const SystemState&) { return 0.0; }, mp);
    const double e0 = diagnostics(s0, xi, mp).energy;
    const double e1 = diagnostics(SystemState::from_vector(r.x), xi, mp).energy;
    EXPECT_LT(std::abs(e1 - e0) / std::abs(e0), 1e-8);
  }
}

TEST(Conservation, EnergyRateEqualsHipPower) {
  const ModelParams mp;
  std::mt19937_64 rng(29);
  for (int i = 0; i < 20; ++i) {
    const SystemState s = test::random_flight_state(rng);
    const double tau = 200.0 * std::uniform_real_distribution<double>(-1, 1)(rng);
    const double xi = -0.087;
    const StateDerivative d = flight_derivative(s, {tau, xi}, mp);
    const double h = 1e-6;
    StateVector p = s.to_vector(), m = s.to_vector();
    const StateVector dv = d.to_vector();
    for (std::size_t k = 0; k < kStateSize; ++k) {
      p[k] += h * dv[k];
      m[k] -= h * dv[k];
    }
    const double rate = (diagnostics(SystemState::from_vector(p), xi, mp).energy -
                         diagnostics(SystemState::from_vector(m), xi, mp).energy) / (2 * h);
    EXPECT_NEAR(rate, hip_power(s, tau, mp), 1e-5 * std::max(1.0, std::abs(rate)));
  }
}
