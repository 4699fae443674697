#pragma once

#include "ult/types.hpp"

namespace ult {

// Continuous dynamics of the trunk + spring leg + point foot hopper.
//
// Sign conventions:
//   * hip = r_c + r_d with r_d = (-d sin(theta), -d cos(theta)).
//   * r_l = hip - foot, so r_l points from the foot to the hip.
//   * tau > 0 is a hip extension moment: counter-clockwise on the trunk
//     (pitching it back, i.e. decreasing theta) and clockwise on the leg.
//   * The massless leg transmits the spring force F plus the tangential
//     force needed to balance tau. The foot receives -F + F_tau and the
//     trunk receives F_hip = F - F_tau at the hip, so all hip forces are
//     internal and flight conserves linear and angular momentum.

struct LegGeometry {
  Vec2 hip;
  Vec2 r_l;  // foot -> hip
  double l = 0.0;
};

Vec2 hip_offset(double theta, const ModelParams& mp);
Vec2 hip_position(const SystemState& s, const ModelParams& mp);
Vec2 hip_velocity(const SystemState& s, const ModelParams& mp);

/// Throws SingularConfiguration when the leg length is below kMinLegLength.
LegGeometry leg_vector(const SystemState& s, const ModelParams& mp);

/// Spring force acting on the trunk at the hip: k((l_0 + xi)/l - 1) r_l.
Vec2 spring_force(const SystemState& s, double xi, const ModelParams& mp);

/// Tangential force on the foot produced by the hip torque. Magnitude
/// |tau|/l, perpendicular to the leg, oriented so that r_l x F_tau = tau.
Vec2 hip_force_on_foot(const SystemState& s, double tau, const ModelParams& mp);

/// Total force the leg exerts on the trunk at the hip (spring plus the
/// reaction of the tangential torque force).
Vec2 hip_force_on_trunk(const SystemState& s, const ControlInput& u, const ModelParams& mp);

StateDerivative flight_derivative(const SystemState& s, const ControlInput& u,
                                  const ModelParams& mp);

/// Foot pinned to the ground; trunk equations identical to flight.
StateDerivative stance_derivative(const SystemState& s, const ControlInput& u,
                                  const ModelParams& mp);

StateDerivative phase_derivative(Phase phase, const SystemState& s, const ControlInput& u,
                                 const ModelParams& mp);

/// Perfectly plastic foot impact. Zeroes the foot velocity and clamps the
/// foot onto the ground; the trunk is untouched. Throws std::logic_error
/// when called from stance.
SystemState touchdown_impact(const SystemState& s, Phase current);

struct Diagnostics {
  double energy = 0.0;            // J, kinetic + gravity + elastic
  double angular_momentum = 0.0;  // kg m^2/s, about the system CoM, counter-clockwise
  Vec2 momentum;                  // kg m/s
};

Diagnostics diagnostics(const SystemState& s, double xi, const ModelParams& mp);

double elastic_energy(const SystemState& s, double xi, const ModelParams& mp);

/// Mechanical power delivered by the hip motor (the rate of change of the
/// total energy at fixed xi).
double hip_power(const SystemState& s, double tau, const ModelParams& mp);

}  // namespace ult
