#pragma once

#include <stdexcept>
#include <string>

namespace qocsim {

// Raised when a bare Fock label cannot be attached to a dressed eigenstate
// with sufficient overlap (strong hybridization, e.g. near an avoided crossing).
struct labeling_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a model cannot be constructed from the given inputs.
struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an integrator or iterative scheme fails its convergence check.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a phase is extracted from a near-vanishing amplitude and is
// therefore numerically undefined.
struct phase_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a nonlinear fit does not converge or is degenerate.
struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised on invalid configuration input (files, grids, experiment setup).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a requested target lies outside the reachable range.
struct range_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qocsim
