#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ult/controllers.hpp"
#include "ult/ode.hpp"
#include "ult/types.hpp"

namespace ult {

enum class EventKind { Touchdown, LiftOff, Apex, Fall };

std::string to_string(EventKind k);

struct GaitEvent {
  EventKind kind = EventKind::Fall;
  double time = 0.0;
  SystemState state;  // pre-reset state at the event
};

struct TrajectorySample {
  double t = 0.0;
  SystemState state;
  ControlInput input;
  Phase phase = Phase::Flight;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<GaitEvent> events;
};

/// Envelope outside which the hopper counts as fallen.
struct FallCriteria {
  double min_height = 0.4;    // m, trunk CoM height
  double max_stance = 2.0;    // s
  double max_flight = 3.0;    // s
  double min_leg = 0.2;       // m, foot inside the trunk
  // |theta| > pi/2 is always a fall.
};

struct HybridOptions {
  Tolerances tol;
  FallCriteria fall;
  double sample_dt = 1e-3;
};

/// A segment ran past the phase time limit.
class PhaseTimeout : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

struct SegmentResult {
  GaitEvent event;
  /// Dense samples at multiples of sample_dt inside the segment, followed by
  /// the event state. Empty unless requested.
  std::vector<TrajectorySample> samples;
};

/// Integrates the phase vector field under the continuous control action
/// until the first of the requested guards fires. Guards that do not apply
/// to the phase are ignored. Throws IntegrationError (PhaseTimeout when the
/// phase time limit is exceeded) and SingularConfiguration.
SegmentResult integrate_until_event(const SystemState& start, const ControllerState& cs,
                                    const ModelParams& mp, const ControlParams& cp,
                                    std::span<const EventKind> guards,
                                    const HybridOptions& opts, double t0 = 0.0,
                                    bool record = false);

struct CycleRecord {
  SystemState apex_state;       // apex the cycle started from
  SystemState touchdown_state;  // post-impact
  SystemState liftoff_state;
  double phi_d_used = 0.0;      // angle of attack commanded for this touchdown
  double stance_duration = 0.0;
  double flight_duration = 0.0;  // apex -> touchdown plus lift-off -> apex
  double energy_injected = 0.0;  // elastic energy jumps from the xi switches
  double impact_loss = 0.0;      // foot kinetic energy lost at touchdown
  bool phi_clamped = false;
};

struct FallOutcome {
  std::string reason;
  double time = 0.0;
  SystemState state;
};

struct CycleResult {
  SystemState next_apex;
  CycleRecord record;
  ControllerState controller;  // carried into the next cycle
  double end_time = 0.0;
};

using CycleOutcome = std::variant<CycleResult, FallOutcome>;

/// Initial controller memory for a run that starts in flight: the
/// angle-of-attack law applied to the starting forward velocity.
ControllerState initial_controller(const SystemState& s, const ControlParams& cp);

/// One apex-to-apex gait cycle: flight -> touchdown (plastic impact and
/// angle-of-attack update) -> stance -> lift-off -> apex. Any integrator or
/// controller failure is reported as a FallOutcome.
CycleOutcome step_gait_cycle(const SystemState& apex, const ControllerState& cs,
                             const ModelParams& mp, const ControlParams& cp,
                             const HybridOptions& opts = {}, double t0 = 0.0,
                             Trajectory* trajectory = nullptr);

/// Advances a flight state to the next apex, passing through a stance phase
/// if the foot lands first.
CycleOutcome advance_to_apex(const SystemState& start, const ControllerState& cs,
                             const ModelParams& mp, const ControlParams& cp,
                             const HybridOptions& opts = {}, double t0 = 0.0,
                             Trajectory* trajectory = nullptr);

inline bool at_apex(const SystemState& s) { return std::abs(s.v_c.y) < 1e-8; }

struct SimulationResult {
  Trajectory trajectory;
  std::vector<CycleRecord> cycles;
  bool completed = false;
  std::optional<FallOutcome> fall;
  std::size_t fall_cycle = 0;  // index of the cycle that failed
};

/// Chains n_cycles gait cycles from an initial flight state. States not at
/// apex are first advanced to the next apex. Without phi_des the first swing
/// uses initial_controller.
SimulationResult simulate(const SystemState& initial, std::size_t n_cycles, const ModelParams& mp,
                          const ControlParams& cp, bool record_dense,
                          const HybridOptions& opts = {},
                          std::optional<double> phi_des = std::nullopt);

}  // namespace ult
