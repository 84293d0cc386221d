#pragma once

#include <stdexcept>
#include <string>

namespace forge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// layout
struct NonPositiveDimension : Error {
  using Error::Error;
};
struct PortMismatch : Error {
  using Error::Error;
};
struct OverlapError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  SchemaError(const std::string& msg, const std::string& where)
      : Error(msg + " (at " + where + ")"), location(where) {}
  std::string location;
};
struct InvariantError : Error {
  InvariantError(const std::string& name, const std::string& detail)
      : Error(name + ": " + detail), invariant(name) {}
  std::string invariant;
};

// field / pseudo
struct BelowPlane : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct TubeLost : Error {
  using Error::Error;
};
struct NotAMinimum : Error {
  NotAMinimum(const std::string& msg, int axis) : Error(msg), unstable_axis(axis) {}
  int unstable_axis;
};

// optim / waveform
struct EmptyNullSpace : Error {
  using Error::Error;
};
struct InsufficientElectrodes : Error {
  using Error::Error;
};
struct NoFeasibleWell : Error {
  NoFeasibleWell(const std::string& msg, double achievable_hz)
      : Error(msg), best_achievable_freq(achievable_hz) {}
  double best_achievable_freq;  // Hz
};

}  // namespace forge
