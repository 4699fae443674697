#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "ult/ode.hpp"
#include "ult/stability.hpp"

namespace ult {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment description. Every field has a default, so "{}" is a valid
// config. Angles are given in degrees in the document and stored in
// radians here.
struct ExperimentConfig {
  ModelParams model;
  ControlParams control;  // control.l0_swing is derived from l0d and the mode
  double l0d = kDefaultRetraction;
  RetractionMode retraction_mode = RetractionMode::Relative;
  std::optional<StateVector> initial;
  std::optional<double> initial_phi_des;  // rad
  Tolerances tolerances;
  std::string output_dir = "out";
  std::size_t cycles = 100;
  std::size_t max_steps = 100;
  double perturbation = -0.075;
  std::size_t threads = 0;  // 0 = hardware concurrency
  SweepGrid grid;

  static constexpr double kDefaultRetraction = 0.087;

  HybridOptions hybrid_options() const;
  /// Recomputes control.l0_swing and validates everything. Throws ConfigError.
  void finalize();
};

/// Unknown keys are rejected so that typos do not silently fall back to
/// defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace ult
