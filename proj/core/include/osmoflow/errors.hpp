#pragma once

#include <stdexcept>
#include <string>

namespace osmoflow {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stokes traction data violates the rigid-body compatibility conditions.
struct IncompatibleData : SimulationError {
  using SimulationError::SimulationError;
};

// Linear system conditioning failure; message carries a condition estimate.
struct SingularSystem : SimulationError {
  using SimulationError::SimulationError;
};

struct CFLViolation : SimulationError {
  using SimulationError::SimulationError;
};

struct PositivityLoss : SimulationError {
  using SimulationError::SimulationError;
};

// min r dropped below the configured floor; the simulation cannot continue.
struct StarShapeLoss : SimulationError {
  using SimulationError::SimulationError;
};

struct DegenerateCurve : SimulationError {
  using SimulationError::SimulationError;
};

struct ConfigError : SimulationError {
  using SimulationError::SimulationError;
};

struct SchemaError : SimulationError {
  using SimulationError::SimulationError;
};

struct IoError : SimulationError {
  using SimulationError::SimulationError;
};

}  // namespace osmoflow
