// ult-hopper: batch front-end for simulation, sweeps and stability analysis.
//
// Exit codes: 0 success, 1 fall or no convergence, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ult/config.hpp"
#include "ult/fixtures.hpp"
#include "ult/io.hpp"
#include "ult/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ult;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<long long> cycles;
  std::optional<std::string> grid;
  std::optional<std::string> retraction_mode;
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;
  bool no_adapt_phi = false;
};

GridAxis parse_axis(const std::string& item, std::string& name) {
  std::stringstream ss(item);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 4) throw ConfigError("grid axis '" + item + "' is not name:lo:hi:step");
  name = parts[0];
  try {
    return {std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3])};
  } catch (const std::exception&) {
    throw ConfigError("grid axis '" + item + "' has a non-numeric bound");
  }
}

void apply_grid(const std::string& text, json& j) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string name;
    const GridAxis a = parse_axis(item, name);
    if (name == "vx") {
      j["grid"]["vx"] = {a.lo, a.hi, a.step};
    } else if (name == "l0" || name == "l0d") {
      j["grid"]["l0d"] = {a.lo, a.hi, a.step};
    } else {
      throw ConfigError("unknown grid axis '" + name + "' (expected vx or l0)");
    }
  }
}

// Config document with command-line overrides merged in, then parsed. The
// returned config is exactly what gets recorded in the output directory.
ExperimentConfig effective_config(const Overrides& o, bool cycles_are_max_steps) {
  json j = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot open config file " + o.config_path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(o.config_path + ": top level must be an object");
  }
  if (o.out) j["output_dir"] = *o.out;
  if (o.cycles) {
    if (*o.cycles < 1) throw ConfigError("--cycles must be at least 1");
    j[cycles_are_max_steps ? "max_steps" : "cycles"] = *o.cycles;
  }
  if (o.grid) apply_grid(*o.grid, j);
  if (o.retraction_mode) j["retraction_mode"] = *o.retraction_mode;
  if (o.abs_tol) j["tolerances"]["abs"] = *o.abs_tol;
  if (o.rel_tol) j["tolerances"]["rel"] = *o.rel_tol;
  return config_from_json(j);
}

fs::path prepare_output(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << to_json(cfg).dump(2) << '\n';
  return dir;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  fn(os);
}

// Starting point on the apex section: the configured initial state advanced
// to its next apex, or the stored nominal fixed point.
std::optional<SectionState> initial_section(const ExperimentConfig& cfg) {
  if (!cfg.initial) return nominal_fixed_point();
  const SystemState s = SystemState::from_vector(*cfg.initial);
  ControllerState cs = initial_controller(s, cfg.control);
  if (cfg.initial_phi_des) cs.phi_des = *cfg.initial_phi_des;
  if (at_apex(s)) return reduce(s, cs);
  CycleOutcome out = advance_to_apex(s, cs, cfg.model, cfg.control, cfg.hybrid_options());
  if (auto* f = std::get_if<FallOutcome>(&out)) {
    std::cerr << "initial state does not reach an apex: " << f->reason << '\n';
    return std::nullopt;
  }
  const auto& c = std::get<CycleResult>(out);
  return reduce(c.next_apex, c.controller);
}

void print_summary(const ExperimentConfig& cfg) {
  std::printf("vx_des %.4g m/s, l0d %.4g (%s, swing rest length %.4g m)\n", cfg.control.vx_des,
              cfg.l0d, to_string(cfg.retraction_mode).c_str(), cfg.control.l0_swing);
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  print_summary(cfg);
  SystemState start;
  std::optional<double> phi;
  if (cfg.initial) {
    start = SystemState::from_vector(*cfg.initial);
    phi = cfg.initial_phi_des;
  } else {
    start = embed(nominal_fixed_point());
    phi = nominal_fixed_point().phi_des;
  }
  const SimulationResult res =
      simulate(start, cfg.cycles, cfg.model, cfg.control, true, cfg.hybrid_options(), phi);
  write_file(dir / "trajectory.csv", [&](auto& os) { write_trajectory_csv(os, res.trajectory); });
  write_file(dir / "events.csv", [&](auto& os) { write_events_csv(os, res.trajectory.events); });
  write_file(dir / "cycles.json", [&](auto& os) { os << to_json(res.cycles).dump(2) << '\n'; });

  std::printf("%5s %10s %10s %10s %10s %9s\n", "cycle", "y_c", "vx_c", "theta", "phi_d", "stance");
  for (std::size_t i = 0; i < res.cycles.size(); ++i) {
    const CycleRecord& r = res.cycles[i];
    std::printf("%5zu %10.6f %10.6f %10.6f %10.6f %9.5f\n", i, r.apex_state.r_c.y,
                r.apex_state.v_c.x, r.apex_state.theta, r.phi_d_used, r.stance_duration);
  }
  if (res.fall) {
    std::printf("fell in cycle %zu at t = %.6f s: %s\n", res.fall_cycle, res.fall->time,
                res.fall->reason.c_str());
    return kFailed;
  }
  std::printf("completed %zu cycles\n", res.cycles.size());
  return kOk;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const auto init = initial_section(cfg);
  if (!init) return kFailed;
  const auto cells = sweep(cfg.grid, cfg.retraction_mode, *init, cfg.model, cfg.control,
                           cfg.max_steps, cfg.threads, cfg.hybrid_options());
  write_file(dir / "sweep.csv", [&](auto& os) { write_sweep_csv(os, cells); });
  std::size_t stable = 0;
  for (const auto& c : cells) stable += c.steps >= cfg.max_steps ? 1 : 0;
  std::printf("%zu of %zu cells survived %zu steps (%s retraction)\n", stable, cells.size(),
              cfg.max_steps, to_string(cfg.retraction_mode).c_str());
  return kOk;
}

int cmd_stability(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  print_summary(cfg);
  const auto init = initial_section(cfg);
  if (!init) return kFailed;
  const HybridOptions opts = cfg.hybrid_options();

  const SectionFixedPoint fp = find_fixed_point(*init, cfg.model, cfg.control, {}, opts);
  if (!fp.converged) {
    std::printf("no fixed point: %s (residual %.3e)\n", fp.diagnostic.c_str(), fp.residual);
    return kFailed;
  }
  StabilityReport rep;
  rep.fixed_point = fp.x;
  rep.residual = fp.residual;
  rep.iterations = fp.iterations;
  try {
    rep.jacobian = linearize(section_map(cfg.model, cfg.control, opts), to_eigen(fp.x));
  } catch (const LinearizationError& e) {
    std::printf("linearization failed: %s\n", e.what());
    return kFailed;
  }
  rep.floquet = floquet_multipliers(rep.jacobian);
  rep.stable = rep.floquet.spectral_radius < 1.0;
  rep.perturbation =
      perturb_and_track(fp.x, cfg.perturbation, cfg.cycles, cfg.model, cfg.control, opts);
  write_file(dir / "stability.json", [&](auto& os) { os << to_json(rep).dump(2) << '\n'; });

  std::printf("fixed point residual %.3e after %zu iterations\n", rep.residual, rep.iterations);
  std::printf("fixed point:");
  for (double v : embed(fp.x).to_vector()) std::printf(" %.6f", v);
  std::printf("\nmultipliers:\n");
  for (const auto& m : rep.floquet.multipliers) {
    std::printf("  % .6f %+.6fi  |%.6f|\n", m.real(), m.imag(), std::abs(m));
  }
  std::printf("spectral radius %.6f: %s\n", rep.floquet.spectral_radius,
              rep.stable ? "stable" : "unstable");
  const PerturbationRecord& p = *rep.perturbation;
  if (p.fall) {
    std::printf("perturbation %+.1f%% of apex height: fell in cycle %zu (%s)\n",
                100.0 * cfg.perturbation, p.distances.size(), p.fall->reason.c_str());
  } else {
    std::printf("perturbation %+.1f%% of apex height: %s, distance %.3e -> %.3e\n",
                100.0 * cfg.perturbation, to_string(p.verdict).c_str(), p.distances.front(),
                p.distances.back());
  }
  return kOk;
}

int cmd_velocity_map(const ExperimentConfig& cfg, bool adapt_phi) {
  const fs::path dir = prepare_output(cfg);
  print_summary(cfg);
  const auto init = initial_section(cfg);
  if (!init) return kFailed;
  const VelocityMap map = velocity_return_map(*init, cfg.model, cfg.control, cfg.cycles, adapt_phi,
                                              cfg.hybrid_options());
  write_file(dir / "velocity_map.csv", [&](auto& os) { write_velocity_csv(os, map); });
  std::printf("angle of attack %s\n", adapt_phi ? "adapted" : "frozen at phi_0");
  if (!map.pairs.empty()) std::printf("+ initial vx %.6f\n", map.pairs.front().first);
  for (std::size_t k = 0; k < map.pairs.size(); ++k) {
    std::printf("  %3zu %.6f -> %.6f\n", k, map.pairs[k].first, map.pairs[k].second);
  }
  if (map.fell) {
    std::printf("fell after %zu cycles\n", map.cycles);
    return kFailed;
  }
  const auto& last = map.pairs.back();
  if (std::abs(last.second - last.first) < 1e-6) std::printf("x fixed vx %.6f\n", last.second);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trunk-and-leg hopper simulation and limit-cycle analysis"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--cycles", o.cycles, "gait cycles (sweep: steps-to-fall cap)");
    sub->add_option("--retraction-mode", o.retraction_mode, "absolute or relative")
        ->check(CLI::IsMember({"absolute", "relative"}));
    sub->add_option("--abs-tol", o.abs_tol, "absolute integration tolerance");
    sub->add_option("--rel-tol", o.rel_tol, "relative integration tolerance");
  };
  CLI::App* sim = app.add_subcommand("simulate", "run gait cycles and write traces");
  CLI::App* swp = app.add_subcommand("sweep", "steps-to-fall over a (vx_des, l0d) grid");
  CLI::App* stab = app.add_subcommand("stability", "fixed point, multipliers, perturbation");
  CLI::App* vel = app.add_subcommand("velocity-map", "apex forward-velocity return map");
  for (CLI::App* sub : {sim, swp, stab, vel}) add_common(sub);
  swp->add_option("--grid", o.grid, "vx:lo:hi:step,l0:lo:hi:step");
  vel->add_flag("--no-adapt-phi", o.no_adapt_phi, "keep the angle of attack at phi_0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(effective_config(o, false));
    if (swp->parsed()) return cmd_sweep(effective_config(o, true));
    if (stab->parsed()) return cmd_stability(effective_config(o, false));
    if (vel->parsed()) return cmd_velocity_map(effective_config(o, false), !o.no_adapt_phi);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kConfigError;
}
