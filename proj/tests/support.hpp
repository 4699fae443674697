#pragma once

#include <random>

#include "ult/model.hpp"
#include "ult/ode.hpp"

namespace ult::test {

// Flight state with a leg between 0.7 and 1.1 m and moderate velocities.
inline SystemState random_flight_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SystemState s;
  s.r_c = {u(rng), 1.2 + 0.2 * u(rng)};
  s.theta = 0.4 * u(rng);
  const double phi = 1.57 + 0.5 * u(rng);
  const double l = 0.9 + 0.2 * u(rng);
  const Vec2 hip = s.r_c + Vec2{-0.1 * std::sin(s.theta), -0.1 * std::cos(s.theta)};
  s.r_f = hip + Vec2{std::cos(phi), -std::sin(phi)} * l;
  s.v_c = {3.0 + u(rng), u(rng)};
  s.v_f = {2.0 * u(rng), 2.0 * u(rng)};
  s.omega = u(rng);
  return s;
}

// Stance state: foot on the ground at the origin, leg compressed.
inline SystemState random_stance_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SystemState s;
  const double phi = 1.57 + 0.45 * u(rng);
  const double l = 0.85 + 0.1 * u(rng);
  s.theta = 0.3 * u(rng);
  const Vec2 hip{-l * std::cos(phi), l * std::sin(phi)};
  s.r_c = hip - Vec2{-0.1 * std::sin(s.theta), -0.1 * std::cos(s.theta)};
  s.v_c = {4.0 + u(rng), u(rng)};
  s.omega = u(rng);
  return s;
}

// Integrates a flight with the given torque law and fixed xi over [0, T].
template <typename TorqueLaw>
OdeResult integrate_flight(const SystemState& s0, double xi, double T, TorqueLaw&& tau,
                           const ModelParams& mp, const Tolerances& tol = {}) {
  const VectorField f = [&](const StateVector& v) {
    const SystemState s = SystemState::from_vector(v);
    return flight_derivative(s, {tau(s), xi}, mp).to_vector();
  };
  OdeOptions oo;
  oo.tol = tol;
  oo.t_max = T;
  return integrate(f, s0.to_vector(), 0.0, {}, oo);
}

}  // namespace ult::test
