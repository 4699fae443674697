#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ult/gait.hpp"

namespace ult {

// Apex section. The physical part drops x_c (translation symmetry) and
// vy_c (zero on the section):
//   [y_c, x_f - x_c, y_f, theta, vx_c, vx_f, vy_f, omega]
// The swing servo is still tracking the angle of attack chosen at the last
// touchdown when the apex is crossed, so phi_des is carried as a ninth
// coordinate. Without it the return map is not a function of the section
// state.
inline constexpr std::size_t kReducedSize = 8;
inline constexpr std::size_t kSectionSize = kReducedSize + 1;
using ReducedState = std::array<double, kReducedSize>;

struct SectionState {
  ReducedState x{};
  double phi_des = 0.0;  // rad
};

SectionState reduce(const SystemState& s, const ControllerState& cs);
/// Full apex state with x_c = 0 and vy_c = 0, plus the flight controller.
SystemState embed(const SectionState& z);
ControllerState embed_controller(const SectionState& z);

Eigen::VectorXd to_eigen(const SectionState& z);
SectionState from_eigen(const Eigen::VectorXd& v);

using MapOutcome = std::variant<SectionState, FallOutcome>;

/// One apex-to-apex cycle on the section.
MapOutcome poincare_map(const SectionState& z, const ModelParams& mp, const ControlParams& cp,
                        const HybridOptions& opts = {});

/// Generic map on R^n for the numerical routines below. nullopt marks a
/// point where the map is undefined (a fall).
using VectorMap = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>;

/// A probe point of the central-difference stencil fell.
class LinearizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Central-difference Jacobian. Column j uses the step
/// eps * max(1, |x_j|) on both sides.
Eigen::MatrixXd linearize(const VectorMap& map, const Eigen::VectorXd& x, double eps = 1e-6);

struct FloquetResult {
  std::vector<std::complex<double>> multipliers;  // descending magnitude
  double spectral_radius = 0.0;
};

FloquetResult floquet_multipliers(const Eigen::MatrixXd& jacobian);

struct FixedPointOptions {
  std::size_t max_iter = 40;
  double tol = 1e-8;        // infinity norm of P(x) - x
  double eps = 1e-6;        // Jacobian step
  std::size_t fallback_iterations = 5;
};

struct FixedPointResult {
  Eigen::VectorXd x;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string diagnostic;
};

/// Damped Newton on P(x) - x. When no damped step reduces the residual the
/// solver takes a few plain map iterations instead.
FixedPointResult solve_fixed_point(const VectorMap& map, const Eigen::VectorXd& guess,
                                   const FixedPointOptions& opts = {});

struct SectionFixedPoint {
  SectionState x;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string diagnostic;
};

SectionFixedPoint find_fixed_point(const SectionState& guess, const ModelParams& mp,
                                   const ControlParams& cp, const FixedPointOptions& fo = {},
                                   const HybridOptions& opts = {});

VectorMap section_map(const ModelParams& mp, const ControlParams& cp,
                      const HybridOptions& opts = {});

/// Number of completed cycles before a fall, capped at max_steps.
std::size_t steps_to_fall(const SectionState& initial, const ModelParams& mp,
                          const ControlParams& cp, std::size_t max_steps = 100,
                          const HybridOptions& opts = {});

enum class RetractionMode { Absolute, Relative };

std::string to_string(RetractionMode m);
RetractionMode parse_retraction_mode(const std::string& s);

/// Swing rest length for a retraction setting l0d. Absolute: l0d is the
/// swing rest length itself. Relative: the leg is shortened by l0d.
double swing_rest_length(double l0d, RetractionMode mode, const ModelParams& mp);

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
  /// Inclusive of hi up to a rounding tolerance of step / 1000.
  std::vector<double> values() const;
};

struct SweepGrid {
  GridAxis vx{3.0, 6.0, 0.1};
  GridAxis l0d{0.05, 0.15, 0.002};
};

struct SweepCell {
  double vx_des = 0.0;
  double l0d = 0.0;
  std::size_t steps = 0;
};

/// Steps-to-fall for every grid cell from a common initial state. Cells are
/// returned in vx-major order regardless of the thread count.
std::vector<SweepCell> sweep(const SweepGrid& grid, RetractionMode mode, const SectionState& initial,
                             const ModelParams& mp, const ControlParams& cp_template,
                             std::size_t max_steps = 100, std::size_t threads = 0,
                             const HybridOptions& opts = {});

enum class Verdict { Converged, Diverged, Fell };

std::string to_string(Verdict v);

struct PerturbationRecord {
  double fraction = 0.0;
  std::vector<double> distances;  // infinity norm to the fixed point, index 0 = initial
  Verdict verdict = Verdict::Diverged;
  std::optional<FallOutcome> fall;
};

/// Scales the apex height of x_star by (1 + fraction) and iterates the
/// return map. Converged iff the last distance is below 1% of the initial
/// one or below 1e-3.
PerturbationRecord perturb_and_track(const SectionState& x_star, double fraction,
                                     std::size_t n_cycles, const ModelParams& mp,
                                     const ControlParams& cp, const HybridOptions& opts = {});

struct VelocityMap {
  std::vector<std::pair<double, double>> pairs;  // (vx at apex k, vx at apex k + 1)
  bool fell = false;
  std::size_t cycles = 0;
};

/// Successive apex forward velocities. With adapt_phi unset the angle of
/// attack stays at phi_0 (K = 0).
VelocityMap velocity_return_map(const SectionState& initial, const ModelParams& mp,
                                const ControlParams& cp, std::size_t n_cycles, bool adapt_phi,
                                const HybridOptions& opts = {});

struct StabilityReport {
  SectionState fixed_point;
  double residual = 0.0;
  std::size_t iterations = 0;
  Eigen::MatrixXd jacobian;
  FloquetResult floquet;
  bool stable = false;
  std::optional<PerturbationRecord> perturbation;
};

}  // namespace ult
