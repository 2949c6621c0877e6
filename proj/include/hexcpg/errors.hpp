#pragma once

#include <stdexcept>
#include <string>

namespace hexcpg {

// Base for all domain errors thrown by the library.
class HexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Oscillator too close to the origin for phase/coupling queries.
class DegenerateOscillator : public HexError {
 public:
  using HexError::HexError;
};

// IK target outside the leg workspace. `excess` is the distance by which the
// target misses the reachable annulus (positive: too far, negative: too close).
class Unreachable : public HexError {
 public:
  Unreachable(const std::string& msg, double excess)
      : HexError(msg), excess(excess) {}
  double excess;
};

// The only IK solution violates configured joint limits.
class JointLimit : public HexError {
 public:
  using HexError::HexError;
};

// Simulation state left sanity bounds (unstable gains or timestep).
class NumericalDivergence : public HexError {
 public:
  using HexError::HexError;
};

// A PPO loss evaluated to NaN/inf; the update is aborted.
class NonFiniteLoss : public HexError {
 public:
  using HexError::HexError;
};

// Invalid or inconsistent run configuration.
class ConfigError : public HexError {
 public:
  using HexError::HexError;
};

}  // namespace hexcpg
