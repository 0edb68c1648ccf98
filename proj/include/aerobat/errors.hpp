#pragma once

#include <stdexcept>
#include <string>

namespace aerobat {

/// Invalid configuration: parse failures, unknown keys, violated invariants.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system and data-file failures; messages carry the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical failure inside a simulation step (singular solve, non-finite state).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aerobat
