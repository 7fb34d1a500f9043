#pragma once

#include <stdexcept>
#include <string>

namespace nopo {

// Base class for all simulation-level failures; CLI maps subclasses to
// distinct exit codes.
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : SimulationError {
  using SimulationError::SimulationError;
};

// Fock distribution / density-matrix cutoff leaves too much tail mass.
struct CutoffTooSmall : SimulationError {
  using SimulationError::SimulationError;
};

// Series evaluation exceeded the term budget.
struct NoConvergence : SimulationError {
  using SimulationError::SimulationError;
};

// Linearized closed forms are defined only above threshold (p > 1).
struct AboveThresholdOnly : SimulationError {
  using SimulationError::SimulationError;
};

// The fluctuation system is singular at j = 0 without regularization.
struct SingularSystem : SimulationError {
  using SimulationError::SimulationError;
};

// A positive-P trajectory amplitude exceeded the divergence bound.
struct Diverged : SimulationError {
  using SimulationError::SimulationError;
};

// Density-matrix trace left its tolerance band during evolution.
struct TraceDrift : SimulationError {
  using SimulationError::SimulationError;
};

struct EmptyEnsemble : SimulationError {
  using SimulationError::SimulationError;
};

struct DivisionByZero : SimulationError {
  using SimulationError::SimulationError;
};

}  // namespace nopo
