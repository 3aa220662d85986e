#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qocsim/channels.hpp"
#include "qocsim/config.hpp"
#include "qocsim/device.hpp"
#include "qocsim/dynamics.hpp"

namespace qocsim {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kOutputSchemaVersion = 1;

// A self-contained experiment description. Grids that a given recipe does
// not use may be left empty; grids it does use must be non-empty
// (validated before any file is written).
struct ExperimentRecipe {
  std::string name;            // spectrum | phase-sweep | leakage-sweep |
                               // cz-calibrate | qpt | rb | irb | predistort-check
  std::string device_config;   // path; empty -> built-in reference device
  std::string transfer_config; // path; empty -> built-in reference transfer
  PulseConfig pulse;           // base pulse (amplitude/tau overridden by grids)
  std::vector<double> amplitudes;     // plateau fluxes [Phi_0]
  std::vector<double> taus;           // total pulse lengths [ns]
  std::vector<double> target_phases;  // cz-calibrate / qpt targets [rad]
  std::uint64_t seed = 1;
  std::string out_dir;
  Frame frame = Frame::kRwa;
  bool predistort = false;
  int shots = 0;                      // 0: exact expectation values
  int randomizations = 30;            // RB sequences per length
  std::vector<int> rb_lengths = {1, 5, 10, 20, 40, 80};
  double noise_depolarizing = 0.02;   // synthetic per-step noise for rb/irb
  double noise_leakage = 0.0014;
};

struct ArtifactBundle {
  std::vector<std::string> files;  // paths written, manifest last
  std::string manifest_path;
};

// Runs the recipe and writes its CSV/JSON artifacts plus manifest.json
// (tool version, output schema version, recipe, config hash, seed, wall
// time) into recipe.out_dir. Throws config_error on an invalid recipe
// before any file is written; errors at individual grid points are
// recorded in the output rows rather than aborting the sweep.
ArtifactBundle run_recipe(const ExperimentRecipe& recipe);

// Finds the total pulse length (buffers included) at which the pulse of
// the given plateau amplitude accumulates the target conditional phase,
// by bisection on the continuity-unwrapped phi_c(tau) curve to within
// 0.2 degrees. Throws range_error if the target is not reached by
// tau = 200 ns and phase_error/convergence_error from the underlying
// propagation.
double cz_calibrate(const DeviceParams& params, double target_phase_rad,
                    double amplitude, const SolverOptions& options = {},
                    double tau_b = 12.0, double sigma = kDefaultSigmaNs);

// Simulated conditional-phase gate as a two-qutrit channel: the pulse is
// propagated with the full-space propagator, computational and leakage
// levels |n1 n2 0> (n < 3) are carried, single-qubit phases are removed by
// virtual Z rotations, and weight that leaves the nine tracked levels
// appears as trace loss. The reported phase is the phi_c of the
// computational block.
struct SimulatedGate {
  Channel channel;  // dim 9
  double phi_c = 0.0;
  double max_leakage = 0.0;
  double tau = 0.0;
};
SimulatedGate simulate_gate_channel(const DeviceParams& params,
                                    double amplitude, double tau,
                                    const SolverOptions& options = {},
                                    double tau_b = 12.0,
                                    double sigma = kDefaultSigmaNs);

// Ideal conditional-phase unitary diag(1, 1, 1, e^{i phi}).
Eigen::Matrix4cd cphase_unitary(double phi);

// 64-bit FNV-1a content hash used for the manifest's config fingerprint.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace qocsim
