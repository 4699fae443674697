#include "ult/gait.hpp"

#include <algorithm>
#include <cmath>

#include "ult/model.hpp"

namespace ult {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Touchdown: return "touchdown";
    case EventKind::LiftOff: return "liftoff";
    case EventKind::Apex: return "apex";
    case EventKind::Fall: return "fall";
  }
  return "unknown";
}

namespace {

bool applies(EventKind k, Phase phase) {
  switch (k) {
    case EventKind::Touchdown:
    case EventKind::Apex: return phase == Phase::Flight;
    case EventKind::LiftOff: return phase == Phase::Stance;
    case EventKind::Fall: return true;
  }
  return false;
}

EventFunction make_guard(EventKind k, const ModelParams& mp, const FallCriteria& fall) {
  switch (k) {
    case EventKind::Touchdown:
      return {[](const StateVector& v) { return v[3]; }, CrossingDirection::Falling, true};
    case EventKind::LiftOff:
      return {[mp](const StateVector& v) {
                return leg_vector(SystemState::from_vector(v), mp).l - mp.l_0;
              },
              CrossingDirection::Rising, true};
    case EventKind::Apex:
      return {[](const StateVector& v) { return v[6]; }, CrossingDirection::Falling, false};
    case EventKind::Fall:
      return {[h = fall.min_height, l_min = fall.min_leg, d = mp.d](const StateVector& v) {
                const double l = std::hypot(v[0] - d * std::sin(v[4]) - v[2],
                                            v[1] - d * std::cos(v[4]) - v[3]);
                return std::min({v[1] - h, std::cos(v[4]), l - l_min});
              },
              CrossingDirection::Falling, true};
  }
  return {};
}

}  // namespace

SegmentResult integrate_until_event(const SystemState& start, const ControllerState& cs,
                                    const ModelParams& mp, const ControlParams& cp,
                                    std::span<const EventKind> guards,
                                    const HybridOptions& opts, double t0, bool record) {
  std::vector<EventKind> kinds;
  std::vector<EventFunction> fns;
  for (EventKind k : guards) {
    if (!applies(k, cs.phase)) continue;
    kinds.push_back(k);
    fns.push_back(make_guard(k, mp, opts.fall));
  }

  const VectorField field = [&](const StateVector& v) {
    const SystemState s = SystemState::from_vector(v);
    return phase_derivative(cs.phase, s, control_action(s, cs, mp, cp), mp).to_vector();
  };

  SegmentResult out;
  auto make_sample = [&](double t, const SystemState& s) {
    return TrajectorySample{t, s, control_action(s, cs, mp, cp), cs.phase};
  };

  StepObserver observer;
  if (record) {
    observer = [&](double ta, double tb, const std::function<StateVector(double)>& interp) {
      const double dt = opts.sample_dt;
      for (double n = std::floor(ta / dt) + 1.0; n * dt < tb; n += 1.0) {
        const double ts = n * dt;
        if (ts <= ta) continue;
        SystemState s = SystemState::from_vector(interp(ts));
        if (cs.phase == Phase::Stance) {
          s.r_f = start.r_f;
          s.v_f = {};
        }
        out.samples.push_back(make_sample(ts, s));
      }
    };
  }

  OdeOptions oo;
  oo.tol = opts.tol;
  oo.t_max = cs.phase == Phase::Stance ? opts.fall.max_stance : opts.fall.max_flight;
  const OdeResult r = integrate(field, start.to_vector(), t0, fns, oo, observer);
  if (!r.event) {
    throw PhaseTimeout(to_string(cs.phase) + " phase exceeded " + std::to_string(oo.t_max) + " s");
  }
  out.event.kind = kinds[*r.event];
  out.event.time = r.t;
  out.event.state = SystemState::from_vector(r.x);
  if (record) out.samples.push_back(make_sample(r.t, out.event.state));
  return out;
}

ControllerState initial_controller(const SystemState& s, const ControlParams& cp) {
  return {update_angle_of_attack(s.v_c.x, cp).phi_des, Phase::Flight};
}

namespace {

class CycleRunner {
 public:
  CycleRunner(const ModelParams& mp, const ControlParams& cp, const HybridOptions& opts,
              Trajectory* traj)
      : mp_(mp), cp_(cp), opts_(opts), traj_(traj) {}

  CycleOutcome run(const SystemState& start, const ControllerState& cs0, double t0,
                   bool stop_at_first_apex) {
    try {
      return run_impl(start, cs0, t0, stop_at_first_apex);
    } catch (const std::exception& e) {
      return FallOutcome{e.what(), t_, state_};
    }
  }

 private:
  SegmentResult segment(const SystemState& s, const ControllerState& cs,
                        std::initializer_list<EventKind> guards) {
    state_ = s;
    SegmentResult seg =
        integrate_until_event(s, cs, mp_, cp_, guards, opts_, t_, traj_ != nullptr);
    if (traj_) {
      for (auto& sample : seg.samples) {
        if (!traj_->samples.empty() && sample.t <= traj_->samples.back().t) continue;
        traj_->samples.push_back(sample);
      }
      traj_->events.push_back(seg.event);
    }
    t_ = seg.event.time;
    state_ = seg.event.state;
    return seg;
  }

  CycleOutcome run_impl(const SystemState& start, const ControllerState& cs0, double t0,
                        bool stop_at_first_apex) {
    t_ = t0;
    state_ = start;
    ControllerState cs = cs0;
    cs.phase = Phase::Flight;
    CycleRecord rec;
    rec.apex_state = start;
    const double xi_swing = cp_.l0_swing - mp_.l_0;

    // Flight until touchdown (or the first apex when advancing).
    SegmentResult seg =
        stop_at_first_apex
            ? segment(start, cs, {EventKind::Apex, EventKind::Touchdown, EventKind::Fall})
            : segment(start, cs, {EventKind::Touchdown, EventKind::Fall});
    if (seg.event.kind == EventKind::Fall) return fall("fall guard during flight");
    if (seg.event.kind == EventKind::Apex) {
      rec.flight_duration = t_ - t0;
      return CycleResult{state_, rec, cs, t_};
    }
    const double t_touchdown = t_;
    double flight_time = t_ - t0;

    // Touchdown: plastic foot impact, controller switch, angle-of-attack update.
    const SystemState pre = seg.event.state;
    rec.impact_loss = 0.5 * mp_.m_f * pre.v_f.dot(pre.v_f);
    SystemState s = touchdown_impact(pre, Phase::Flight);
    rec.energy_injected += elastic_energy(s, 0.0, mp_) - elastic_energy(s, xi_swing, mp_);
    rec.touchdown_state = s;
    rec.phi_d_used = cs.phi_des;
    const AngleOfAttackUpdate upd = update_angle_of_attack(s.v_c.x, cp_);
    cs.phi_des = upd.phi_des;
    rec.phi_clamped = upd.clamped;
    cs.phase = Phase::Stance;

    seg = segment(s, cs, {EventKind::LiftOff, EventKind::Fall});
    if (seg.event.kind == EventKind::Fall) return fall("fall guard during stance");
    rec.stance_duration = t_ - t_touchdown;
    if (!(rec.stance_duration > 0.0)) return fall("touchdown with leg at or beyond rest length");

    // Lift-off: swing controller takes over, rest length switches.
    s = seg.event.state;
    s.v_f = {};
    rec.liftoff_state = s;
    rec.energy_injected += elastic_energy(s, xi_swing, mp_) - elastic_energy(s, 0.0, mp_);
    cs.phase = Phase::Flight;
    const double t_liftoff = t_;

    seg = segment(s, cs, {EventKind::Apex, EventKind::Touchdown, EventKind::Fall});
    if (seg.event.kind == EventKind::Fall) return fall("fall guard during flight");
    if (seg.event.kind == EventKind::Touchdown) return fall("touchdown before apex");
    flight_time += t_ - t_liftoff;
    rec.flight_duration = flight_time;
    return CycleResult{state_, rec, cs, t_};
  }

  FallOutcome fall(const std::string& reason) const { return {reason, t_, state_}; }

  const ModelParams& mp_;
  const ControlParams& cp_;
  const HybridOptions& opts_;
  Trajectory* traj_;
  double t_ = 0.0;
  SystemState state_;
};

}  // namespace

CycleOutcome step_gait_cycle(const SystemState& apex, const ControllerState& cs,
                             const ModelParams& mp, const ControlParams& cp,
                             const HybridOptions& opts, double t0, Trajectory* trajectory) {
  return CycleRunner(mp, cp, opts, trajectory).run(apex, cs, t0, false);
}

CycleOutcome advance_to_apex(const SystemState& start, const ControllerState& cs,
                             const ModelParams& mp, const ControlParams& cp,
                             const HybridOptions& opts, double t0, Trajectory* trajectory) {
  return CycleRunner(mp, cp, opts, trajectory).run(start, cs, t0, true);
}

SimulationResult simulate(const SystemState& initial, std::size_t n_cycles, const ModelParams& mp,
                          const ControlParams& cp, bool record_dense,
                          const HybridOptions& opts, std::optional<double> phi_des) {
  SimulationResult res;
  Trajectory* traj = record_dense ? &res.trajectory : nullptr;
  ControllerState cs = initial_controller(initial, cp);
  if (phi_des) cs.phi_des = *phi_des;
  SystemState apex = initial;
  double t = 0.0;

  if (!at_apex(initial)) {
    CycleOutcome pre = advance_to_apex(initial, cs, mp, cp, opts, t, traj);
    if (auto* f = std::get_if<FallOutcome>(&pre)) {
      res.fall = *f;
      return res;
    }
    const auto& c = std::get<CycleResult>(pre);
    apex = c.next_apex;
    cs = c.controller;
    t = c.end_time;
  }

  for (std::size_t i = 0; i < n_cycles; ++i) {
    CycleOutcome out = step_gait_cycle(apex, cs, mp, cp, opts, t, traj);
    if (auto* f = std::get_if<FallOutcome>(&out)) {
      res.fall = *f;
      res.fall_cycle = i;
      return res;
    }
    auto& c = std::get<CycleResult>(out);
    res.cycles.push_back(c.record);
    apex = c.next_apex;
    cs = c.controller;
    t = c.end_time;
  }
  res.completed = true;
  return res;
}

}  // namespace ult
