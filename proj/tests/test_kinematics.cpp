#include <doctest.h>

#include <cmath>

#include "hexcpg/kinematics.hpp"
#include "hexcpg/rng.hpp"

using namespace hexcpg;

namespace {

LegGeometry geometry() { return LegGeometry::default_geometry(); }

}  // namespace

TEST_CASE("forward kinematics of the straight leg") {
  const LegGeometry g = geometry();
  const FootTarget t = forward_kinematics(g, {0.0, 0.0, 0.0});
  CHECK(t.position.x() == doctest::Approx(g.max_reach()));
  CHECK(t.position.y() == doctest::Approx(0.0));
  CHECK(t.position.z() == doctest::Approx(0.0));
}

TEST_CASE("yaw rotates the extended leg") {
  const LegGeometry g = geometry();
  const FootTarget t = forward_kinematics(g, {M_PI / 2.0, 0.0, 0.0});
  CHECK(t.position.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.position.y() == doctest::Approx(g.max_reach()));
  CHECK(t.position.z() == doctest::Approx(0.0));
}

TEST_CASE("bent knee drops the tibia straight down") {
  const LegGeometry g = geometry();
  const FootTarget t = forward_kinematics(g, {0.0, 0.0, -M_PI / 2.0});
  CHECK(t.position.x() == doctest::Approx(g.l_coxa + g.l_femur));
  CHECK(t.position.y() == doctest::Approx(0.0));
  CHECK(t.position.z() == doctest::Approx(-g.l_tibia));
}

TEST_CASE("ik inverts the bent-knee pose") {
  const LegGeometry g = geometry();
  FootTarget t;
  t.position = {g.l_coxa + g.l_femur, 0.0, -g.l_tibia};
  const LegJointAngles q = inverse_kinematics(g, t);
  CHECK(q.hip_yaw == doctest::Approx(0.0));
  CHECK(q.hip_pitch == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(q.knee == doctest::Approx(-M_PI / 2.0));
}

TEST_CASE("fk-ik round trip over random in-limit poses") {
  const LegGeometry g = geometry();
  const JointLimits lim;
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    LegJointAngles q;
    q.hip_yaw = rng.uniform(lim.lower[0], lim.upper[0]);
    q.hip_pitch = rng.uniform(lim.lower[1], lim.upper[1]);
    q.knee = rng.uniform(lim.lower[2], lim.upper[2]);
    const FootTarget p = forward_kinematics(g, q);
    const LegJointAngles q2 = inverse_kinematics_unchecked(g, p);
    const FootTarget p2 = forward_kinematics(g, q2);
    CHECK((p2.position - p.position).norm() < 1e-9);
  }
}

TEST_CASE("targets beyond maximum reach are rejected") {
  const LegGeometry g = geometry();
  FootTarget t;
  t.position = {g.max_reach() + 0.01, 0.0, 0.0};
  CHECK_THROWS_AS(inverse_kinematics(g, t), Unreachable);
  try {
    inverse_kinematics(g, t);
  } catch (const Unreachable& e) {
    CHECK(e.excess == doctest::Approx(0.01));
  }
}

TEST_CASE("limit-violating solutions are rejected") {
  const LegGeometry g = geometry();
  FootTarget t;
  t.position = {-0.10, 0.10, -0.20};  // yaw = 3 pi / 4
  CHECK_THROWS_AS(inverse_kinematics(g, t), JointLimit);
  CHECK_NOTHROW(inverse_kinematics_unchecked(g, t));
}

TEST_CASE("mirrored targets mirror the yaw") {
  const LegGeometry g = geometry();
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    FootTarget t;
    t.position = {rng.uniform(0.05, 0.18), rng.uniform(-0.12, 0.12),
                  rng.uniform(-0.24, -0.12)};
    FootTarget m = t;
    m.position.y() = -m.position.y();
    const LegJointAngles q = inverse_kinematics_unchecked(g, t);
    const LegJointAngles qm = inverse_kinematics_unchecked(g, m);
    CHECK(qm.hip_yaw == doctest::Approx(-q.hip_yaw));
    CHECK(qm.hip_pitch == doctest::Approx(q.hip_pitch));
    CHECK(qm.knee == doctest::Approx(q.knee));
  }
}

TEST_CASE("hip transform composes the base pose with the mount offset") {
  const LegGeometry g = geometry();
  const Eigen::Isometry3d identity = Eigen::Isometry3d::Identity();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    CHECK(hip_transform(identity, g, leg).isApprox(g.hip_offsets[leg]));
  }

  Eigen::Isometry3d shifted = Eigen::Isometry3d::Identity();
  shifted.translate(Eigen::Vector3d(1.0, -2.0, 0.5));
  const Eigen::Vector3d expect =
      g.hip_offsets[kLM].translation() + Eigen::Vector3d(1.0, -2.0, 0.5);
  CHECK(hip_transform(shifted, g, kLM).translation().isApprox(expect));

  Eigen::Isometry3d yawed = Eigen::Isometry3d::Identity();
  yawed.rotate(Eigen::AngleAxisd(M_PI / 2.0, Eigen::Vector3d::UnitZ()));
  const Eigen::Vector3d mount = g.hip_offsets[kRF].translation();
  const Eigen::Vector3d rotated(-mount.y(), mount.x(), mount.z());
  CHECK(hip_transform(yawed, g, kRF).translation().isApprox(rotated, 1e-12));
}

TEST_CASE("leg jacobian matches finite differences") {
  const LegGeometry g = geometry();
  Rng rng(31);
  const double eps = 1e-7;
  for (int trial = 0; trial < 50; ++trial) {
    LegJointAngles q;
    q.hip_yaw = rng.uniform(-1.2, 1.2);
    q.hip_pitch = rng.uniform(-1.2, 1.2);
    q.knee = rng.uniform(-2.4, -0.3);
    const Eigen::Matrix3d J = leg_jacobian(g, q);
    for (int col = 0; col < 3; ++col) {
      LegJointAngles qp = q, qm = q;
      double* fields_p[3] = {&qp.hip_yaw, &qp.hip_pitch, &qp.knee};
      double* fields_m[3] = {&qm.hip_yaw, &qm.hip_pitch, &qm.knee};
      *fields_p[col] += eps;
      *fields_m[col] -= eps;
      const Eigen::Vector3d fd = (forward_kinematics(g, qp).position -
                                  forward_kinematics(g, qm).position) /
                                 (2.0 * eps);
      CHECK((J.col(col) - fd).norm() < 1e-6);
    }
  }
}
