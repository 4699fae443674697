#include "ult/model.hpp"

#include <stdexcept>

namespace ult {

Vec2 hip_offset(double theta, const ModelParams& mp) {
  return {-mp.d * std::sin(theta), -mp.d * std::cos(theta)};
}

Vec2 hip_position(const SystemState& s, const ModelParams& mp) {
  return s.r_c + hip_offset(s.theta, mp);
}

Vec2 hip_velocity(const SystemState& s, const ModelParams& mp) {
  return s.v_c + Vec2{-mp.d * std::cos(s.theta), mp.d * std::sin(s.theta)} * s.omega;
}

LegGeometry leg_vector(const SystemState& s, const ModelParams& mp) {
  LegGeometry g;
  g.hip = hip_position(s, mp);
  g.r_l = g.hip - s.r_f;
  g.l = g.r_l.norm();
  if (!(g.l >= kMinLegLength)) {
    throw SingularConfiguration("leg length " + std::to_string(g.l) + " m below singularity threshold");
  }
  return g;
}

Vec2 spring_force(const SystemState& s, double xi, const ModelParams& mp) {
  const LegGeometry leg = leg_vector(s, mp);
  return leg.r_l * (mp.k * ((mp.l_0 + xi) / leg.l - 1.0));
}

Vec2 hip_force_on_foot(const SystemState& s, double tau, const ModelParams& mp) {
  const LegGeometry leg = leg_vector(s, mp);
  return leg.r_l.perp() * (tau / (leg.l * leg.l));
}

Vec2 hip_force_on_trunk(const SystemState& s, const ControlInput& u, const ModelParams& mp) {
  return spring_force(s, u.xi, mp) - hip_force_on_foot(s, u.tau, mp);
}

namespace {

// Trunk rows shared by both phases. Returns the force on the trunk so the
// flight branch can reuse it for the foot.
Vec2 trunk_rows(const SystemState& s, const ControlInput& u, const ModelParams& mp,
                StateDerivative& out) {
  const Vec2 f_hip = hip_force_on_trunk(s, u, mp);
  const Vec2 gravity{0.0, -mp.g};
  out.r_c = s.v_c;
  out.theta = s.omega;
  out.v_c = f_hip / mp.m_c + gravity;
  // Counter-clockwise moment about the CoM; theta grows clockwise.
  const double moment = u.tau + hip_offset(s.theta, mp).cross(f_hip);
  out.omega = -moment / mp.J;
  return f_hip;
}

}  // namespace

StateDerivative flight_derivative(const SystemState& s, const ControlInput& u,
                                  const ModelParams& mp) {
  StateDerivative out;
  const Vec2 f_hip = trunk_rows(s, u, mp, out);
  out.r_f = s.v_f;
  out.v_f = -f_hip / mp.m_f + Vec2{0.0, -mp.g};
  return out;
}

StateDerivative stance_derivative(const SystemState& s, const ControlInput& u,
                                  const ModelParams& mp) {
  StateDerivative out;
  trunk_rows(s, u, mp, out);
  out.r_f = {};
  out.v_f = {};
  return out;
}

StateDerivative phase_derivative(Phase phase, const SystemState& s, const ControlInput& u,
                                 const ModelParams& mp) {
  return phase == Phase::Flight ? flight_derivative(s, u, mp) : stance_derivative(s, u, mp);
}

SystemState touchdown_impact(const SystemState& s, Phase current) {
  if (current == Phase::Stance) throw std::logic_error("touchdown impact applied during stance");
  SystemState out = s;
  out.v_f = {};
  out.r_f.y = 0.0;
  return out;
}

double elastic_energy(const SystemState& s, double xi, const ModelParams& mp) {
  const double stretch = leg_vector(s, mp).l - mp.l_0 - xi;
  return 0.5 * mp.k * stretch * stretch;
}

Diagnostics diagnostics(const SystemState& s, double xi, const ModelParams& mp) {
  Diagnostics d;
  const double kinetic = 0.5 * mp.m_c * s.v_c.dot(s.v_c) + 0.5 * mp.m_f * s.v_f.dot(s.v_f) +
                         0.5 * mp.J * s.omega * s.omega;
  const double potential = mp.g * (mp.m_c * s.r_c.y + mp.m_f * s.r_f.y);
  d.energy = kinetic + potential + elastic_energy(s, xi, mp);

  const double m = mp.m_c + mp.m_f;
  d.momentum = s.v_c * mp.m_c + s.v_f * mp.m_f;
  const Vec2 com = (s.r_c * mp.m_c + s.r_f * mp.m_f) / m;
  const Vec2 v_com = d.momentum / m;
  d.angular_momentum = -mp.J * s.omega + mp.m_c * (s.r_c - com).cross(s.v_c - v_com) +
                       mp.m_f * (s.r_f - com).cross(s.v_f - v_com);
  return d;
}

double hip_power(const SystemState& s, double tau, const ModelParams& mp) {
  // Relative rotation rate of the leg with respect to the trunk, both
  // counter-clockwise.
  const LegGeometry leg = leg_vector(s, mp);
  const Vec2 rel_vel = hip_velocity(s, mp) - s.v_f;
  const double leg_rate = leg.r_l.cross(rel_vel) / (leg.l * leg.l);
  const double trunk_rate = -s.omega;
  return tau * (trunk_rate - leg_rate);
}

}  // namespace ult
