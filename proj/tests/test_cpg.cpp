#include <doctest.h>

#include <cmath>

#include "hexcpg/cpg.hpp"

using namespace hexcpg;

namespace {

CpgParams default_params() {
  CpgParams p;
  p.theta = tripod_phase_matrix();
  return p;
}

OscillatorNetworkState run_for(OscillatorNetworkState net, const CpgParams& p,
                               double seconds, double dt = 1e-3) {
  const int steps = static_cast<int>(std::round(seconds / dt));
  for (int s = 0; s < steps; ++s) net = step_network(net, p, dt);
  return net;
}

}  // namespace

TEST_CASE("hopf derivative on the limit cycle") {
  CpgParams p = default_params();
  auto [dx, dy] = hopf_derivative({p.mu, 0.0}, p);
  CHECK(dx == doctest::Approx(0.0));
  CHECK(dy == doctest::Approx(p.omega * p.mu));
}

TEST_CASE("hopf derivative at the origin is zero") {
  auto [dx, dy] = hopf_derivative({0.0, 0.0}, default_params());
  CHECK(dx == 0.0);
  CHECK(dy == 0.0);
}

TEST_CASE("hopf derivative hand-substituted value") {
  CpgParams p = default_params();
  p.alpha = 100.0;
  p.beta = 100.0;
  p.mu = 1.0;
  p.omega = M_PI;
  auto [dx, dy] = hopf_derivative({0.5, 0.0}, p);
  CHECK(dx == doctest::Approx(37.5));
  CHECK(dy == doctest::Approx(0.5 * M_PI));
}

TEST_CASE("coupling term from the phase-difference matrix") {
  CpgParams p = default_params();
  OscillatorNetworkState net;
  net.states[1] = {1.0, 0.0};

  p.theta.setZero();
  auto [dx0, dy0] = coupling_term(net, p, 0, 1);
  CHECK(dx0 == doctest::Approx(0.0));
  CHECK(dy0 == doctest::Approx(1.0));

  p.theta(0, 1) = M_PI;
  p.theta(1, 0) = -M_PI;
  auto [dx1, dy1] = coupling_term(net, p, 0, 1);
  CHECK(dx1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dy1 == doctest::Approx(-1.0));
}

TEST_CASE("coupling term rejects a degenerate oscillator") {
  CpgParams p = default_params();
  OscillatorNetworkState net;  // all at origin
  CHECK_THROWS_AS(coupling_term(net, p, 0, 1), DegenerateOscillator);
}

TEST_CASE("uncoupled step preserves the limit cycle radius") {
  CpgParams p = default_params();
  p.k = 0.0;
  OscillatorNetworkState net;
  for (int i = 0; i < kNumLegs; ++i) net.states[i] = {p.mu, 0.0};
  net = run_for(net, p, 2.0);
  for (int i = 0; i < kNumLegs; ++i) {
    CHECK(net.states[i].radius() == doctest::Approx(p.mu).epsilon(1e-3));
  }
}

TEST_CASE("zero dt returns the identical state") {
  CpgParams p = default_params();
  OscillatorNetworkState net;
  for (int i = 0; i < kNumLegs; ++i) net.states[i] = {0.3 * i + 0.1, -0.2};
  const OscillatorNetworkState out = step_network(net, p, 0.0);
  for (int i = 0; i < kNumLegs; ++i) {
    CHECK(out.states[i].x == net.states[i].x);
    CHECK(out.states[i].y == net.states[i].y);
  }
}

TEST_CASE("tripod matrix locks pairwise phase differences") {
  CpgParams p = default_params();
  Rng rng(42);
  OscillatorNetworkState net = init_network(tripod_phases(), rng, 0.5, M_PI);
  net = run_for(net, p, 10.0);
  for (int i = 0; i < kNumLegs; ++i) {
    for (int j = 0; j < kNumLegs; ++j) {
      if (i == j) continue;
      const double diff =
          wrap_angle(phase_of(net.states[i]) - phase_of(net.states[j]));
      CHECK(std::abs(wrap_angle(diff - p.theta(i, j))) < 0.05);
    }
  }
}

TEST_CASE("phase extraction") {
  CHECK(phase_of({1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(phase_of({0.0, 1.0}) == doctest::Approx(M_PI / 2.0));
  CHECK(phase_of({-1.0, 0.0}) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(phase_of({0.0, 0.0}), DegenerateOscillator);
}

TEST_CASE("tripod phase matrix structure") {
  const ThetaMatrix theta = tripod_phase_matrix();
  CHECK(theta(kLF, kRM) == doctest::Approx(0.0));
  CHECK(std::abs(wrap_angle(theta(kLF, kRF) + M_PI)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  for (int i = 0; i < kNumLegs; ++i) CHECK(theta(i, i) == 0.0);
  CHECK(theta_is_consistent(theta));
}

TEST_CASE("theta antisymmetry holds for any phase assignment") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, kNumLegs> phases;
    for (double& ph : phases) ph = rng.uniform(-M_PI, M_PI);
    const ThetaMatrix theta = phase_matrix_from_phases(phases);
    CHECK(theta_is_consistent(theta));
    for (int i = 0; i < kNumLegs; ++i) {
      for (int j = 0; j < kNumLegs; ++j) {
        CHECK(std::abs(wrap_angle(theta(i, j) + theta(j, i))) < 1e-9);
      }
    }
  }
}

TEST_CASE("limit-cycle convergence from a range of radii") {
  CpgParams p = default_params();
  p.k = 0.0;
  Rng rng(3);
  for (double r0 : {0.02, 0.1, 0.5, 2.0, 9.5}) {
    OscillatorNetworkState net;
    for (int i = 0; i < kNumLegs; ++i) {
      const double phi = rng.uniform(-M_PI, M_PI);
      net.states[i] = {r0 * std::cos(phi), r0 * std::sin(phi)};
    }
    net = run_for(net, p, 2.0);
    for (int i = 0; i < kNumLegs; ++i) {
      CHECK(std::abs(net.states[i].radius() - p.mu) < 0.01 * p.mu);
    }
  }
}

TEST_CASE("oscillation period matches 2 pi / omega within 2 percent") {
  CpgParams p = default_params();
  p.k = 0.0;
  p.omega = 2.0 * M_PI * 1.3;
  OscillatorNetworkState net;
  net.states[0] = {p.mu, 0.0};
  const double dt = 1e-3;
  int crossings = 0;
  double first = 0.0, last = 0.0;
  double prev_y = net.states[0].y;
  for (int s = 1; s < 20000; ++s) {
    net = step_network(net, p, dt);
    const double y = net.states[0].y;
    if (prev_y < 0.0 && y >= 0.0) {
      const double t = s * dt;
      if (crossings == 0) first = t;
      last = t;
      ++crossings;
      if (crossings >= 11) break;
    }
    prev_y = y;
  }
  REQUIRE(crossings >= 11);
  const double period = (last - first) / 10.0;
  CHECK(period == doctest::Approx(2.0 * M_PI / p.omega).epsilon(0.02));
}

TEST_CASE("step_network is bit-reproducible") {
  CpgParams p = default_params();
  Rng rng(11);
  OscillatorNetworkState a = init_network(tripod_phases(), rng);
  OscillatorNetworkState b = a;
  for (int s = 0; s < 5000; ++s) {
    a = step_network(a, p, 1e-3);
    b = step_network(b, p, 1e-3);
  }
  for (int i = 0; i < kNumLegs; ++i) {
    CHECK(a.states[i].x == b.states[i].x);
    CHECK(a.states[i].y == b.states[i].y);
  }
}

TEST_CASE("rk4 integrator tracks the limit cycle more tightly than euler") {
  CpgParams p = default_params();
  p.k = 0.0;
  OscillatorNetworkState net;
  net.states[0] = {p.mu, 0.0};
  CpgParams rk = p;
  rk.integrator = Integrator::kRk4;
  OscillatorNetworkState net_rk = net;
  for (int s = 0; s < 2000; ++s) {
    net = step_network(net, p, 1e-3);
    net_rk = step_network(net_rk, rk, 1e-3);
  }
  const double err_euler = std::abs(net.states[0].radius() - p.mu);
  const double err_rk = std::abs(net_rk.states[0].radius() - p.mu);
  CHECK(err_rk <= err_euler + 1e-12);
  CHECK(err_rk < 1e-6);
}

TEST_CASE("rotation coupling locks at the signed target difference") {
  // The conventional diffusive form locks phase_i - phase_j exactly at
  // theta_ij for a generic (non-tripod) assignment.
  CpgParams p = default_params();
  p.coupling = CouplingForm::kRotation;
  std::array<double, kNumLegs> phases = {0.0, 0.9, 1.7, -2.0, 2.8, -0.7};
  p.theta = phase_matrix_from_phases(phases);
  Rng rng(5);
  OscillatorNetworkState net = init_network(phases, rng, 0.3, 0.4);
  net = run_for(net, p, 10.0);
  for (int i = 0; i < kNumLegs; ++i) {
    for (int j = 0; j < kNumLegs; ++j) {
      if (i == j) continue;
      const double diff =
          wrap_angle(phase_of(net.states[i]) - phase_of(net.states[j]));
      CHECK(std::abs(wrap_angle(diff - p.theta(i, j))) < 0.05);
    }
  }
}

TEST_CASE("invalid parameters are rejected") {
  CpgParams p = default_params();
  p.mu = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = default_params();
  p.theta(0, 1) = 0.3;  // breaks antisymmetry against theta(1, 0) = pi
  p.theta(1, 0) = M_PI;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
