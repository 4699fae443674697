#include "ult/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace ult {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_deg(const json& obj, const char* key, double& out_rad, const std::string& where) {
  if (!obj.contains(key)) return;
  double deg = 0.0;
  read(obj, key, deg, where);
  out_rad = deg_to_rad(deg);
}

GridAxis read_axis(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected [lo, hi, step]");
  GridAxis a;
  try {
    a = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return a;
}

}  // namespace

HybridOptions ExperimentConfig::hybrid_options() const {
  HybridOptions o;
  o.tol = tolerances;
  return o;
}

void ExperimentConfig::finalize() {
  control.l0_swing = swing_rest_length(l0d, retraction_mode, model);
  try {
    model.validate();
    control.validate();
    (void)grid.vx.values();
    (void)grid.l0d.values();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(tolerances.abs > 0.0) || !(tolerances.rel > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (cycles == 0) throw ConfigError("cycles must be at least 1");
  if (max_steps == 0) throw ConfigError("max_steps must be at least 1");
  if (initial) {
    for (double v : *initial) {
      if (!std::isfinite(v)) throw ConfigError("initial state must be finite");
    }
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  reject_unknown(j, "config",
                 {"model", "control", "retraction_mode", "initial", "initial_phi_des",
                  "tolerances", "output_dir", "cycles", "max_steps", "perturbation", "threads",
                  "grid"});
  if (j.contains("model")) {
    const json& m = j["model"];
    reject_unknown(m, "model", {"m_c", "m_f", "J", "d", "k", "l_0", "g"});
    read(m, "m_c", c.model.m_c, "model");
    read(m, "m_f", c.model.m_f, "model");
    read(m, "J", c.model.J, "model");
    read(m, "d", c.model.d, "model");
    read(m, "k", c.model.k, "model");
    read(m, "l_0", c.model.l_0, "model");
    read(m, "g", c.model.g, "model");
  }
  if (j.contains("control")) {
    const json& k = j["control"];
    reject_unknown(k, "control", {"c", "b", "phi_0", "K", "d_vpp", "delta", "vx_des", "l0d"});
    read(k, "c", c.control.c, "control");
    read(k, "b", c.control.b, "control");
    read_deg(k, "phi_0", c.control.phi_0, "control");
    read(k, "K", c.control.K, "control");
    read(k, "d_vpp", c.control.d_vpp, "control");
    read_deg(k, "delta", c.control.delta, "control");
    read(k, "vx_des", c.control.vx_des, "control");
    read(k, "l0d", c.l0d, "control");
  }
  if (j.contains("retraction_mode")) {
    std::string mode;
    read(j, "retraction_mode", mode, "config");
    try {
      c.retraction_mode = parse_retraction_mode(mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("initial")) {
    std::vector<double> v;
    read(j, "initial", v, "config");
    if (v.size() != kStateSize) throw ConfigError("initial must have 10 entries");
    StateVector s{};
    std::copy(v.begin(), v.end(), s.begin());
    c.initial = s;
  }
  if (j.contains("initial_phi_des")) {
    double rad = 0.0;
    read_deg(j, "initial_phi_des", rad, "config");
    c.initial_phi_des = rad;
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    reject_unknown(t, "tolerances", {"abs", "rel"});
    read(t, "abs", c.tolerances.abs, "tolerances");
    read(t, "rel", c.tolerances.rel, "tolerances");
  }
  read(j, "output_dir", c.output_dir, "config");
  read(j, "cycles", c.cycles, "config");
  read(j, "max_steps", c.max_steps, "config");
  read(j, "perturbation", c.perturbation, "config");
  read(j, "threads", c.threads, "config");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, "grid", {"vx", "l0d"});
    if (g.contains("vx")) c.grid.vx = read_axis(g["vx"], "grid.vx");
    if (g.contains("l0d")) c.grid.l0d = read_axis(g["l0d"], "grid.l0d");
  }
  c.finalize();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"m_c", c.model.m_c}, {"m_f", c.model.m_f}, {"J", c.model.J}, {"d", c.model.d},
                {"k", c.model.k},     {"l_0", c.model.l_0}, {"g", c.model.g}};
  j["control"] = {{"c", c.control.c},
                  {"b", c.control.b},
                  {"phi_0", rad_to_deg(c.control.phi_0)},
                  {"K", c.control.K},
                  {"d_vpp", c.control.d_vpp},
                  {"delta", rad_to_deg(c.control.delta)},
                  {"vx_des", c.control.vx_des},
                  {"l0d", c.l0d}};
  j["retraction_mode"] = to_string(c.retraction_mode);
  if (c.initial) j["initial"] = *c.initial;
  if (c.initial_phi_des) j["initial_phi_des"] = rad_to_deg(*c.initial_phi_des);
  j["tolerances"] = {{"abs", c.tolerances.abs}, {"rel", c.tolerances.rel}};
  j["output_dir"] = c.output_dir;
  j["cycles"] = c.cycles;
  j["max_steps"] = c.max_steps;
  j["perturbation"] = c.perturbation;
  j["threads"] = c.threads;
  j["grid"] = {{"vx", {c.grid.vx.lo, c.grid.vx.hi, c.grid.vx.step}},
               {"l0d", {c.grid.l0d.lo, c.grid.l0d.hi, c.grid.l0d.step}}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace ult
