#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>

#include "hexcpg/errors.hpp"
#include "hexcpg/rng.hpp"

namespace hexcpg {

// Fixed leg order used everywhere: left/right front, middle, back.
enum Leg : int { kLF = 0, kRF = 1, kLM = 2, kRM = 3, kLB = 4, kRB = 5 };
inline constexpr int kNumLegs = 6;
inline constexpr const char* kLegNames[kNumLegs] = {"LF", "RF", "LM",
                                                    "RM", "LB", "RB"};

using ThetaMatrix = Eigen::Matrix<double, kNumLegs, kNumLegs>;

// Oscillators inside this radius are treated as degenerate (phase undefined).
inline constexpr double kEpsRadius = 1e-6;

struct OscillatorState {
  double x = 0.0;
  double y = 0.0;
  double radius() const { return std::sqrt(x * x + y * y); }
};

struct OscillatorNetworkState {
  std::array<OscillatorState, kNumLegs> states;
};

enum class CouplingForm {
  kAdditive,  // (x_j + y_j)/r_j numerator, asymmetric -k/+k injection
  kRotation,  // unit vector of oscillator j rotated by theta_ij
};

enum class Integrator { kEuler, kRk4 };

struct CpgParams {
  double alpha = 100.0;       // x convergence gain (1/s)
  double beta = 100.0;        // y convergence gain (1/s)
  double mu = 1.0;            // limit-cycle amplitude
  double omega = 2.0 * M_PI;  // angular frequency (rad/s)
  double k = 5.0;             // coupling strength (1/s)
  ThetaMatrix theta = ThetaMatrix::Zero();
  CouplingForm coupling = CouplingForm::kAdditive;
  Integrator integrator = Integrator::kEuler;

  void validate() const;  // throws ConfigError on bad gains or theta
};

// Uncoupled Hopf derivative (xdot, ydot).
std::pair<double, double> hopf_derivative(const OscillatorState& s,
                                          const CpgParams& p);

// Coupling contribution of oscillator j onto oscillator i.
// Throws DegenerateOscillator when oscillator j sits within kEpsRadius.
std::pair<double, double> coupling_term(const OscillatorNetworkState& network,
                                        const CpgParams& p, int i, int j);

// One integration step of the coupled network. dt = 0 returns the input.
OscillatorNetworkState step_network(const OscillatorNetworkState& network,
                                    const CpgParams& p, double dt);

// atan2 phase in (-pi, pi]. Throws DegenerateOscillator near the origin.
double phase_of(const OscillatorState& s);

// Target phases of the tripod gait: {LF, RM, LB} at 0, {RF, LM, RB} at pi.
std::array<double, kNumLegs> tripod_phases();

// theta[i][j] = phase[i] - phase[j] built from a phase assignment.
ThetaMatrix phase_matrix_from_phases(const std::array<double, kNumLegs>& phases);

ThetaMatrix tripod_phase_matrix();

// Checks theta[i][i] = 0 and theta[i][j] + theta[j][i] = 0 (mod 2pi).
bool theta_is_consistent(const ThetaMatrix& theta, double tol = 1e-9);

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

// Radius 0.1, phases = targets + uniform noise within +/- phase_noise rad.
OscillatorNetworkState init_network(const std::array<double, kNumLegs>& phases,
                                    Rng& rng, double radius = 0.1,
                                    double phase_noise = 0.3);

}  // namespace hexcpg
