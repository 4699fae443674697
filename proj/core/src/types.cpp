#include "ult/types.hpp"

namespace ult {

bool SystemState::is_finite() const {
  for (double v : to_vector()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void ModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("model parameter '") + name + "' must be positive");
    }
  };
  positive(m_c, "m_c");
  positive(m_f, "m_f");
  positive(J, "J");
  positive(d, "d");
  positive(k, "k");
  positive(l_0, "l_0");
  positive(g, "g");
  if (d >= l_0) throw std::invalid_argument("model parameter 'd' must be smaller than 'l_0'");
}

void ControlParams::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("control parameter 'c' must be positive");
  if (!(b > 0.0)) throw std::invalid_argument("control parameter 'b' must be positive");
  if (!(phi_0 > 0.0 && phi_0 < std::numbers::pi)) {
    throw std::invalid_argument("control parameter 'phi_0' must lie in (0, 180) deg");
  }
  if (!(l0_swing > 0.0)) throw std::invalid_argument("swing rest length must be positive");
  for (double v : {K, d_vpp, delta, vx_des}) {
    if (!std::isfinite(v)) throw std::invalid_argument("control parameters must be finite");
  }
}

std::string to_string(Phase p) { return p == Phase::Flight ? "flight" : "stance"; }

}  // namespace ult
