#include <doctest.h>

#include <cmath>

#include "hexcpg/mapping.hpp"
#include "hexcpg/rng.hpp"

using namespace hexcpg;

TEST_CASE("map output at the oscillator origin is the neutral stance") {
  MapParams mp;
  mp.h = 0.25;
  const FootTarget t = map_foot_position({0.0, 0.0}, mp, 0);
  CHECK(t.position.x() == 0.0);
  CHECK(t.position.y() == 0.0);
  CHECK(t.position.z() == doctest::Approx(-0.25));
}

TEST_CASE("stance-phase horizontal mapping") {
  MapParams mp;
  mp.d_step = 0.1;
  mp.phi_dir = 0.0;
  mp.h = 0.25;
  const FootTarget t = map_foot_position({1.0, 0.0}, mp, 0);
  CHECK(t.position.x() == doctest::Approx(-0.1));
  CHECK(t.position.y() == doctest::Approx(0.0));
  CHECK(t.position.z() == doctest::Approx(-0.25));
}

TEST_CASE("swing-phase vertical mapping") {
  MapParams mp;
  mp.k1.fill(0.05);
  mp.h = 0.25;
  const FootTarget t = map_foot_position({0.0, 1.0}, mp, 2);
  CHECK(t.position.x() == doctest::Approx(0.0));
  CHECK(t.position.y() == doctest::Approx(0.0));
  CHECK(t.position.z() == doctest::Approx(-0.20));
}

TEST_CASE("swing clearance is k1 times mu") {
  MapParams mp;
  mp.k1.fill(0.05);
  CHECK(swing_clearance(mp, 1.0, 0) == doctest::Approx(0.05));
  mp.k1.fill(0.0);
  CHECK(swing_clearance(mp, 2.0, 3) == 0.0);
  mp.k1.fill(0.12);
  CHECK(swing_clearance(mp, 1.0, 5) == doctest::Approx(0.12));
}

TEST_CASE("z is continuous across the swing/stance switch") {
  MapParams mp;
  const FootTarget above = map_foot_position({0.4, 1e-12}, mp, 0);
  const FootTarget below = map_foot_position({0.4, -1e-12}, mp, 0);
  CHECK(std::abs(above.position.z() - below.position.z()) < 1e-12);
  CHECK(above.position.z() == doctest::Approx(-mp.h));
}

TEST_CASE("map output stays bounded over the limit cycle") {
  MapParams mp;
  mp.d_step = 0.13;
  mp.k1.fill(0.09);
  mp.k2 = 0.02;
  mp.phi_dir = 0.4;
  const double mu = 1.0;
  for (int s = 0; s < 500; ++s) {
    const double phi = 2.0 * M_PI * s / 500.0;
    const FootTarget t =
        map_foot_position({mu * std::cos(phi), mu * std::sin(phi)}, mp, 1);
    CHECK(std::abs(t.position.x()) <= mp.d_step * mu + 1e-12);
    CHECK(std::abs(t.position.y()) <= mp.d_step * mu + 1e-12);
    CHECK(t.position.z() >= -mp.h - mp.k2 * mu - 1e-12);
    CHECK(t.position.z() <= -mp.h + mp.k1[1] * mu + 1e-12);
  }
}

TEST_CASE("horizontal displacement lies along the commanded direction") {
  MapParams mp;
  mp.d_step = 0.1;
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    mp.phi_dir = rng.uniform(-0.6, 0.6);
    const double x = rng.uniform(-1.0, 1.0);
    const FootTarget t = map_foot_position({x, 0.3}, mp, 0);
    const double cross = t.position.x() * std::sin(mp.phi_dir) -
                         t.position.y() * std::cos(mp.phi_dir);
    CHECK(std::abs(cross) < 1e-12);
    if (x > 1e-9) {
      // Positive oscillator x pushes the foot along phi_dir + pi.
      const double dot = t.position.x() * std::cos(mp.phi_dir) +
                         t.position.y() * std::sin(mp.phi_dir);
      CHECK(dot < 0.0);
    }
  }
}

TEST_CASE("inverted stance branch raises the foot instead") {
  MapParams mp;
  mp.invert_stance_branch = true;
  const FootTarget t = map_foot_position({0.0, -1.0}, mp, 0);
  CHECK(t.position.z() == doctest::Approx(-mp.h + mp.k2));
}
