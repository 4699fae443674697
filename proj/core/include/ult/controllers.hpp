#pragma once

#include "ult/types.hpp"

namespace ult {

/// Per-run controller memory: the desired angle of attack for the current
/// swing and the active phase.
struct ControllerState {
  double phi_des = 0.0;  // rad
  Phase phase = Phase::Flight;
};

/// Virtual pivot point: d_vpp above the CoM along the body axis rotated by delta.
Vec2 vpp_point(const SystemState& s, const ControlParams& cp);

/// Stance hip torque redirecting the leg force through the VPP,
/// tau = |F| l tan(gamma) with tan(gamma) = (r_vpp x r_l) / (r_vpp . r_l),
/// both vectors rooted at the foot. The signed spring magnitude is used,
/// which equals |F| for a compressed leg. Throws ControllerSingularity when
/// r_vpp . r_l <= 0.
double stance_torque(const SystemState& s, const ModelParams& mp, const ControlParams& cp);

struct LegAngle {
  double phi = 0.0;      // rad, angle between ground and leg; pi/2 vertical
  double phi_dot = 0.0;  // rad/s
};

/// phi = atan2(hip_y - foot_y, foot_x - hip_x); below pi/2 when the foot is
/// ahead of the hip.
LegAngle leg_angle(const SystemState& s, const ModelParams& mp);

/// Swing set-point law tau = c (phi_des - phi) - b phi_dot.
double swing_torque(const SystemState& s, const ControllerState& cs, const ControlParams& cp,
                    const ModelParams& mp);

inline constexpr double kMinAngleOfAttack = 0.1;
inline constexpr double kMaxAngleOfAttack = std::numbers::pi - 0.1;

struct AngleOfAttackUpdate {
  double phi_des = 0.0;
  bool clamped = false;
};

/// phi_next = phi_0 + K (vx_des - vx), clamped to (0.1, pi - 0.1).
AngleOfAttackUpdate update_angle_of_attack(double vx_touchdown, const ControlParams& cp);

/// Phase-switching control action: VPP torque with xi = 0 in stance, swing
/// servo with xi = l0_swing - l_0 in flight.
ControlInput control_action(const SystemState& s, const ControllerState& cs,
                            const ModelParams& mp, const ControlParams& cp);

}  // namespace ult
