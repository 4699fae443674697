#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ult/types.hpp"

namespace ult {

struct Tolerances {
  double abs = 1e-10;
  double rel = 1e-9;
};

/// Raised when the adaptive step size collapses or the step budget runs out.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CrossingDirection { Rising, Falling };

/// Scalar event function. An event fires when the value crosses zero in
/// the given direction. With fire_if_past set, a value already on the far
/// side of zero at the initial point fires immediately at t = t0.
struct EventFunction {
  std::function<double(const StateVector&)> value;
  CrossingDirection direction = CrossingDirection::Falling;
  bool fire_if_past = false;
};

struct OdeOptions {
  Tolerances tol;
  double t_max = 1.0;          // integration horizon, relative to t0
  double h_initial = 1e-4;
  double h_min = 1e-14;
  double h_max = 1e-2;
  std::size_t max_steps = 2'000'000;
  double event_tol = 1e-13;    // bracket width for the root polish, in s
};

struct OdeResult {
  double t = 0.0;
  StateVector x{};
  /// Index into the event list, or nullopt when t_max was reached.
  std::optional<std::size_t> event;
  std::size_t steps = 0;
};

using VectorField = std::function<StateVector(const StateVector&)>;
/// Called for every accepted step with (t0, t1, interpolant). The
/// interpolant evaluates the 4th-order dense output at any t in [t0, t1].
using StepObserver =
    std::function<void(double, double, const std::function<StateVector(double)>&)>;

/// Adaptive Dormand-Prince 5(4) integration of an autonomous system with
/// PI step-size control. Integration stops at the earliest event crossing,
/// located by bracketing the crossing inside the accepted step and
/// polishing with exact Runge-Kutta substeps from the step start.
OdeResult integrate(const VectorField& f, const StateVector& x0, double t0,
                    std::span<const EventFunction> events, const OdeOptions& opts,
                    const StepObserver& observer = {});

}  // namespace ult
