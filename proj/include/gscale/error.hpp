#pragma once

#include <stdexcept>
#include <string>

namespace gscale {

// Precondition on a formula input was violated (non-positive time, negative span, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Scenario, catalog or model configuration cannot be realized.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (trace CSV, app JSON, params file).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulation invariant broken; indicates a bug rather than bad input.
class SimulationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace gscale
