#pragma once

#include "ult/stability.hpp"

namespace ult {

// Apex fixed point certified by find_fixed_point (residual 4e-13) for the
// default parameters with vx_des = 5.0 and a relative retraction of 0.087
// (swing rest length 0.913). It is an unstable cycle: the dominant
// multipliers are a complex pair near -3.34.
inline SectionState nominal_fixed_point() {
  return {{1.1600980383912176, 0.39789453045243967, 0.1700717371730297, 0.46646309840171707,
           5.3401191004402362, 3.1044529935564573, 2.8998227601086581, -0.90621763732458105},
          1.2023100978934604};
}

inline constexpr double kNominalVxDes = 5.0;
inline constexpr double kNominalRetraction = 0.087;

}  // namespace ult
