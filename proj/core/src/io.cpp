#include "ult/io.hpp"

#include <cstdio>
#include <string>

namespace ult {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_state(std::ostream& os, const SystemState& s) {
  for (double v : s.to_vector()) os << ',' << num(v);
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x_c,y_c,x_f,y_f,theta,vx_c,vy_c,vx_f,vy_f,omega,tau,xi,phase\n";
  for (const auto& s : traj.samples) {
    os << num(s.t);
    write_state(os, s.state);
    os << ',' << num(s.input.tau) << ',' << num(s.input.xi) << ',' << to_string(s.phase) << '\n';
  }
}

void write_events_csv(std::ostream& os, const std::vector<GaitEvent>& events) {
  os << "t,kind,x_c,y_c,x_f,y_f,theta,vx_c,vy_c,vx_f,vy_f,omega\n";
  for (const auto& e : events) {
    os << num(e.time) << ',' << to_string(e.kind);
    write_state(os, e.state);
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "vx_des,l0_swing,steps_survived\n";
  for (const auto& c : cells) os << num(c.vx_des) << ',' << num(c.l0d) << ',' << c.steps << '\n';
}

void write_velocity_csv(std::ostream& os, const VelocityMap& map) {
  os << "k,vx_k,vx_k1\n";
  for (std::size_t k = 0; k < map.pairs.size(); ++k) {
    os << k << ',' << num(map.pairs[k].first) << ',' << num(map.pairs[k].second) << '\n';
  }
}

json to_json(const SystemState& s) { return s.to_vector(); }

json to_json(const CycleRecord& r) {
  return {{"apex_state", to_json(r.apex_state)},
          {"touchdown_state", to_json(r.touchdown_state)},
          {"liftoff_state", to_json(r.liftoff_state)},
          {"phi_d_used", r.phi_d_used},
          {"stance_duration", r.stance_duration},
          {"flight_duration", r.flight_duration},
          {"energy_injected", r.energy_injected},
          {"impact_loss", r.impact_loss},
          {"phi_clamped", r.phi_clamped}};
}

json to_json(const std::vector<CycleRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr;
}

json to_json(const PerturbationRecord& p) {
  json j{{"fraction", p.fraction}, {"distances", p.distances}, {"verdict", to_string(p.verdict)}};
  if (p.fall) j["fall"] = {{"reason", p.fall->reason}, {"time", p.fall->time}};
  return j;
}

json to_json(const StabilityReport& r) {
  json jac = json::array();
  for (Eigen::Index i = 0; i < r.jacobian.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.jacobian.cols(); ++j) jac.push_back(r.jacobian(i, j));
  }
  json mult = json::array();
  for (const auto& m : r.floquet.multipliers) mult.push_back({m.real(), m.imag()});
  json out{{"fixed_point", to_json(embed(r.fixed_point))},
           {"section_state", r.fixed_point.x},
           {"phi_des", r.fixed_point.phi_des},
           {"residual", r.residual},
           {"iterations", r.iterations},
           {"jacobian_size", r.jacobian.rows()},
           {"jacobian", jac},
           {"multipliers", mult},
           {"spectral_radius", r.floquet.spectral_radius},
           {"stable", r.stable}};
  if (r.perturbation) out["perturbation"] = to_json(*r.perturbation);
  return out;
}

}  // namespace ult
