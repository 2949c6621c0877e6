#include "hexcpg/cpg.hpp"

#include <cmath>

namespace hexcpg {

namespace {

// All twelve state derivatives evaluated synchronously from one snapshot.
using NetworkDerivative = std::array<std::pair<double, double>, kNumLegs>;

NetworkDerivative network_derivative(const OscillatorNetworkState& network,
                                     const CpgParams& p) {
  NetworkDerivative d;
  for (int i = 0; i < kNumLegs; ++i) {
    auto [dx, dy] = hopf_derivative(network.states[i], p);
    if (p.k != 0.0) {
      for (int j = 0; j < kNumLegs; ++j) {
        if (j == i) continue;
        auto [cx, cy] = coupling_term(network, p, i, j);
        dx -= p.k * cx;
        dy += p.k * cy;
      }
    }
    d[i] = {dx, dy};
  }
  return d;
}

// Far from the limit cycle the radial dynamics are stiff (local rate
// ~ alpha * (3 r^2 - mu^2)); split the step so each substep stays inside the
// explicit-Euler stability region. On and near the cycle this is one step.
int stability_substeps(const OscillatorNetworkState& network,
                       const CpgParams& p, double dt) {
  double r2_max = 0.0;
  for (const OscillatorState& s : network.states) {
    r2_max = std::max(r2_max, s.x * s.x + s.y * s.y);
  }
  const double rate = std::max(p.alpha, p.beta) *
                      std::max(3.0 * r2_max - p.mu * p.mu, 2.0 * p.mu * p.mu);
  return std::max(1, static_cast<int>(std::ceil(dt * rate / 0.5)));
}

OscillatorNetworkState add_scaled(const OscillatorNetworkState& s,
                                  const NetworkDerivative& d, double h) {
  OscillatorNetworkState out = s;
  for (int i = 0; i < kNumLegs; ++i) {
    out.states[i].x += h * d[i].first;
    out.states[i].y += h * d[i].second;
  }
  return out;
}

}  // namespace

void CpgParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(mu > 0.0) || !(omega > 0.0) ||
      !(k >= 0.0)) {
    throw ConfigError("cpg: require alpha, beta, mu, omega > 0 and k >= 0");
  }
  if (!theta_is_consistent(theta)) {
    throw ConfigError("cpg: theta is not a consistent phase-difference matrix");
  }
}

std::pair<double, double> hopf_derivative(const OscillatorState& s,
                                          const CpgParams& p) {
  const double r2 = p.mu * p.mu - s.x * s.x - s.y * s.y;
  return {p.alpha * r2 * s.x - p.omega * s.y,
          p.beta * r2 * s.y + p.omega * s.x};
}

std::pair<double, double> coupling_term(const OscillatorNetworkState& network,
                                        const CpgParams& p, int i, int j) {
  const OscillatorState& other = network.states[j];
  const double r = other.radius();
  if (r <= kEpsRadius) {
    throw DegenerateOscillator("coupling undefined: oscillator " +
                               std::to_string(j) + " at origin");
  }
  const double th = p.theta(i, j);
  if (p.coupling == CouplingForm::kAdditive) {
    const double s = (other.x + other.y) / r;
    return {-std::sin(th) * s, std::cos(th) * s};
  }
  // Rotation form: unit vector of j rotated by theta_ij. Injected with the
  // same signs as the additive form, so it locks at phase_i - phase_j =
  // theta_ij (the conventional diffusive coupling).
  const double ux = other.x / r;
  const double uy = other.y / r;
  const double px = std::cos(th) * ux - std::sin(th) * uy;
  const double py = std::sin(th) * ux + std::cos(th) * uy;
  return {-px, py};
}

OscillatorNetworkState step_network(const OscillatorNetworkState& network,
                                    const CpgParams& p, double dt) {
  if (dt == 0.0) return network;
  const int n_sub = stability_substeps(network, p, dt);
  const double h = dt / n_sub;
  OscillatorNetworkState out = network;
  for (int s = 0; s < n_sub; ++s) {
    if (p.integrator == Integrator::kEuler) {
      out = add_scaled(out, network_derivative(out, p), h);
      continue;
    }
    const NetworkDerivative k1 = network_derivative(out, p);
    const NetworkDerivative k2 =
        network_derivative(add_scaled(out, k1, 0.5 * h), p);
    const NetworkDerivative k3 =
        network_derivative(add_scaled(out, k2, 0.5 * h), p);
    const NetworkDerivative k4 = network_derivative(add_scaled(out, k3, h), p);
    for (int i = 0; i < kNumLegs; ++i) {
      out.states[i].x += h / 6.0 *
                         (k1[i].first + 2.0 * k2[i].first + 2.0 * k3[i].first +
                          k4[i].first);
      out.states[i].y += h / 6.0 *
                         (k1[i].second + 2.0 * k2[i].second +
                          2.0 * k3[i].second + k4[i].second);
    }
  }
  return out;
}

double phase_of(const OscillatorState& s) {
  if (s.radius() <= kEpsRadius) {
    throw DegenerateOscillator("phase undefined near origin");
  }
  double phi = std::atan2(s.y, s.x);
  if (phi <= -M_PI) phi += 2.0 * M_PI;
  return phi;
}

std::array<double, kNumLegs> tripod_phases() {
  std::array<double, kNumLegs> phases{};
  phases[kLF] = 0.0;
  phases[kRM] = 0.0;
  phases[kLB] = 0.0;
  phases[kRF] = M_PI;
  phases[kLM] = M_PI;
  phases[kRB] = M_PI;
  return phases;
}

ThetaMatrix phase_matrix_from_phases(
    const std::array<double, kNumLegs>& phases) {
  ThetaMatrix theta;
  for (int i = 0; i < kNumLegs; ++i) {
    for (int j = 0; j < kNumLegs; ++j) {
      theta(i, j) = wrap_angle(phases[i] - phases[j]);
    }
  }
  return theta;
}

ThetaMatrix tripod_phase_matrix() {
  return phase_matrix_from_phases(tripod_phases());
}

bool theta_is_consistent(const ThetaMatrix& theta, double tol) {
  for (int i = 0; i < kNumLegs; ++i) {
    if (std::abs(theta(i, i)) > tol) return false;
    for (int j = 0; j < kNumLegs; ++j) {
      if (std::abs(wrap_angle(theta(i, j) + theta(j, i))) > tol) return false;
    }
  }
  return true;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

OscillatorNetworkState init_network(const std::array<double, kNumLegs>& phases,
                                    Rng& rng, double radius,
                                    double phase_noise) {
  OscillatorNetworkState net;
  for (int i = 0; i < kNumLegs; ++i) {
    const double phi = phases[i] + rng.uniform(-phase_noise, phase_noise);
    net.states[i].x = radius * std::cos(phi);
    net.states[i].y = radius * std::sin(phi);
  }
  return net;
}

}  // namespace hexcpg
