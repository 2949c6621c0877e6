#pragma once

#include <Eigen/Dense>
#include <array>

#include "hexcpg/cpg.hpp"

namespace hexcpg {

// Parameters of the oscillator-to-foothold map. d_step, k1 and phi_dir are
// policy-controlled at runtime; h and k2 stay constant.
struct MapParams {
  double d_step = 0.075;                  // step length (m)
  double h = 0.25;                        // base height (m)
  std::array<double, kNumLegs> k1 = {0.06, 0.06, 0.06, 0.06, 0.06, 0.06};
  double k2 = 0.02;                       // stance depth gain (m)
  double phi_dir = 0.0;                   // direction angle (rad)
  // Alternative reading of the stance branch (z = -h - k2*y for y < 0).
  bool invert_stance_branch = false;
};

struct FootTarget {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

// x = -d_step*x*cos(phi), y = -d_step*x*sin(phi),
// z = -h + k1*y (swing, y > 0) or -h + k2*y (stance).
FootTarget map_foot_position(const OscillatorState& s, const MapParams& mp,
                             int leg);

// Peak swing height above nominal ground: k1[leg] * mu.
double swing_clearance(const MapParams& mp, double mu, int leg);

}  // namespace hexcpg
