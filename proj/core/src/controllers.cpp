#include "ult/controllers.hpp"

#include <algorithm>

#include "ult/model.hpp"

namespace ult {

Vec2 vpp_point(const SystemState& s, const ControlParams& cp) {
  const double a = s.theta + cp.delta;
  return s.r_c + Vec2{std::sin(a), std::cos(a)} * cp.d_vpp;
}

double stance_torque(const SystemState& s, const ModelParams& mp, const ControlParams& cp) {
  const LegGeometry leg = leg_vector(s, mp);
  const Vec2 r_vpp = vpp_point(s, cp) - s.r_f;
  const double denom = r_vpp.dot(leg.r_l);
  if (!(denom > 0.0)) {
    throw ControllerSingularity("virtual pivot point more than 90 deg off the leg axis");
  }
  const double tan_gamma = r_vpp.cross(leg.r_l) / denom;
  // Signed |F|: positive while the leg is compressed.
  const double force = mp.k * (mp.l_0 - leg.l);
  return force * leg.l * tan_gamma;
}

LegAngle leg_angle(const SystemState& s, const ModelParams& mp) {
  const LegGeometry leg = leg_vector(s, mp);
  const Vec2 hip_v = hip_velocity(s, mp);
  const double x = s.r_f.x - leg.hip.x;
  const double y = leg.hip.y - s.r_f.y;
  const double xd = s.v_f.x - hip_v.x;
  const double yd = hip_v.y - s.v_f.y;
  return {std::atan2(y, x), (x * yd - y * xd) / (x * x + y * y)};
}

double swing_torque(const SystemState& s, const ControllerState& cs, const ControlParams& cp,
                    const ModelParams& mp) {
  const LegAngle a = leg_angle(s, mp);
  return cp.c * (cs.phi_des - a.phi) - cp.b * a.phi_dot;
}

AngleOfAttackUpdate update_angle_of_attack(double vx_touchdown, const ControlParams& cp) {
  const double raw = cp.phi_0 + cp.K * (cp.vx_des - vx_touchdown);
  const double clamped = std::clamp(raw, kMinAngleOfAttack, kMaxAngleOfAttack);
  return {clamped, clamped != raw};
}

ControlInput control_action(const SystemState& s, const ControllerState& cs,
                            const ModelParams& mp, const ControlParams& cp) {
  if (cs.phase == Phase::Stance) return {stance_torque(s, mp, cp), 0.0};
  return {swing_torque(s, cs, cp, mp), cp.l0_swing - mp.l_0};
}

}  // namespace ult
