#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ult {

/// Planar vector. Units depend on context (m, m/s, N).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  /// Scalar (z-component) cross product.
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  /// Counter-clockwise perpendicular.
  constexpr Vec2 perp() const { return {-y, x}; }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline constexpr std::size_t kStateSize = 10;
using StateVector = std::array<double, kStateSize>;

/// Full hybrid state. theta is the trunk inclination, zero upright and
/// positive when the trunk leans toward +x (hip moves to -x).
struct SystemState {
  Vec2 r_c;      // trunk CoM position
  Vec2 r_f;      // foot position
  double theta = 0.0;
  Vec2 v_c;
  Vec2 v_f;
  double omega = 0.0;  // d(theta)/dt

  /// Order: x_c, y_c, x_f, y_f, theta, vx_c, vy_c, vx_f, vy_f, omega.
  constexpr StateVector to_vector() const {
    return {r_c.x, r_c.y, r_f.x, r_f.y, theta, v_c.x, v_c.y, v_f.x, v_f.y, omega};
  }
  static constexpr SystemState from_vector(const StateVector& v) {
    return {{v[0], v[1]}, {v[2], v[3]}, v[4], {v[5], v[6]}, {v[7], v[8]}, v[9]};
  }

  bool is_finite() const;
  constexpr bool operator==(const SystemState&) const = default;
};

/// Time derivative of a SystemState; same layout.
using StateDerivative = SystemState;

struct ModelParams {
  double m_c = 80.0;    // kg
  double m_f = 3.4;     // kg
  double J = 5.0;       // kg m^2
  double d = 0.1;       // m, CoM to hip
  double k = 21000.0;   // N/m
  double l_0 = 1.0;     // m
  double g = 9.81;      // m/s^2

  /// Throws std::invalid_argument on a non-physical parameter set.
  void validate() const;
};

struct ControlParams {
  double c = 1900.0;                                // N m / rad
  double b = 80.37;                                 // N m s / rad
  double phi_0 = 70.0 * std::numbers::pi / 180.0;  // rad
  double K = 0.15;                                  // rad s / m
  double d_vpp = 0.25;                              // m
  double delta = 0.0;                               // rad
  double vx_des = 5.0;                              // m/s
  double l0_swing = 0.913;                          // m, swing rest length

  void validate() const;
};

struct ControlInput {
  double tau = 0.0;  // hip torque, positive = hip extension
  double xi = 0.0;   // rest-length offset
};

enum class Phase { Flight, Stance };

std::string to_string(Phase p);

/// Leg length dropped below the singularity threshold.
class SingularConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The VPP lies more than 90 degrees off the leg axis.
class ControllerSingularity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMinLegLength = 1e-9;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace ult
