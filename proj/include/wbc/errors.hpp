#pragma once

#include <stdexcept>
#include <string>

namespace wbc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scenario spec could not produce a valid world within the attempt budget.
struct GenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResetFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SteppedAfterDone : std::logic_error {
  using std::logic_error::logic_error;
};

struct ChecksumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checkpoint/parameter shapes do not match the network spec.
struct ParamsCorrupt : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GradientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlanningFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wbc
