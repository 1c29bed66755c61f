#pragma once

#include <stdexcept>
#include <string>

namespace ionpa {

// Bad or inconsistent user input (config files, flags, field values).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Trap parameters yield a non-confining effective potential.
struct UnstableConfinementError : std::runtime_error {
  explicit UnstableConfinementError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Minimizer failed to reach the gradient tolerance.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Linearization has an unstable or non-oscillatory mode.
struct ModeInstabilityError : std::runtime_error {
  explicit ModeInstabilityError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Parametric drive at or above the squeezing threshold |delta| <= |g A|.
struct ThresholdError : std::runtime_error {
  explicit ThresholdError(const std::string& msg) : std::runtime_error(msg) {}
};

// Layer assignment failed (no bimodal z structure, degenerate split, ...).
struct LayerError : std::runtime_error {
  explicit LayerError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ionpa
