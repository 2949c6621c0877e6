#include "hexcpg/mapping.hpp"

#include <cmath>

namespace hexcpg {

FootTarget map_foot_position(const OscillatorState& s, const MapParams& mp,
                             int leg) {
  FootTarget t;
  t.position.x() = -mp.d_step * s.x * std::cos(mp.phi_dir);
  t.position.y() = -mp.d_step * s.x * std::sin(mp.phi_dir);
  if (s.y > 0.0) {
    t.position.z() = -mp.h + mp.k1[leg] * s.y;
  } else {
    const double k2 = mp.invert_stance_branch ? -mp.k2 : mp.k2;
    t.position.z() = -mp.h + k2 * s.y;
  }
  return t;
}

double swing_clearance(const MapParams& mp, double mu, int leg) {
  return mp.k1[leg] * mu;
}

}  // namespace hexcpg
