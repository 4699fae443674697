#pragma once

#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "ult/gait.hpp"
#include "ult/stability.hpp"

namespace ult {

// All numbers are written with 17 significant digits so that outputs
// round-trip and identical runs produce identical bytes.

/// Header t,x_c,y_c,x_f,y_f,theta,vx_c,vy_c,vx_f,vy_f,omega,tau,xi,phase.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Header t,kind,x_c,...,omega.
void write_events_csv(std::ostream& os, const std::vector<GaitEvent>& events);
/// Header vx_des,l0_swing,steps_survived. The second column is the grid
/// retraction coordinate l0d.
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells);
/// Header k,vx_k,vx_k1.
void write_velocity_csv(std::ostream& os, const VelocityMap& map);

nlohmann::json to_json(const SystemState& s);
nlohmann::json to_json(const CycleRecord& r);
nlohmann::json to_json(const std::vector<CycleRecord>& records);
nlohmann::json to_json(const PerturbationRecord& p);
/// Fixed point as its 10-vector embedding, Jacobian row-major,
/// multipliers as [re, im] pairs.
nlohmann::json to_json(const StabilityReport& r);

}  // namespace ult
