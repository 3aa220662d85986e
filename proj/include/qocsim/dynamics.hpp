#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qocsim/device.hpp"
#include "qocsim/pulse.hpp"

namespace qocsim {

// Model used for time evolution: the full charge-coupled Hamiltonian at the
// device truncation, or the excitation-conserving reduction at n = 3 (much
// faster, used for sweeps and calibration).
enum class Frame { kFull, kRwa };

struct SolverOptions {
  Frame frame = Frame::kFull;
  // 1 ps keeps the step-halving check below convergence_tol for gate-scale
  // pulses (the interaction-picture phasors turn at tens of GHz).
  double step_ns = 0.001;
  // Rerun at half step and require the computational block to agree
  // elementwise within convergence_tol (throws convergence_error otherwise).
  bool convergence_check = true;
  double convergence_tol = 1e-6;
  // Evolve the full identity instead of the four computational columns;
  // enables the unitarity defect diagnostic. Expensive for the full frame.
  bool full_propagator = false;
};

// Propagator restricted to the computational subspace, reported in the
// labeled dressed eigenbasis of the idle point, in the rotating frame that
// removes the idle single-particle dressed frequencies (so a zero pulse
// leaves only the residual static ZZ phase on |11>).
struct PropagationResult {
  // Computational block, basis order |00>, |01>, |10>, |11> (qubit 1 is
  // the most significant digit).
  Eigen::Matrix4cd block;
  // Population of each tracked non-computational dressed state, one row
  // per state, one column per computational initial state.
  std::vector<FockLabel> leak_labels;
  Eigen::MatrixXd leak_pops;
  // Total population outside the computational subspace per initial state.
  Eigen::Vector4d leakage;
  // Full-space propagator in the dressed eigenbasis (only if requested).
  Eigen::MatrixXcd propagator;
  double unitarity_defect = -1.0;  // ||U^dag U - 1||, -1 if not computed
  // Solver metadata.
  Frame frame = Frame::kFull;
  double step_ns = 0.0;
  int n_fock = 0;
  double convergence_delta = -1.0;  // max element change on step halving
};

// Integrates the Schroedinger equation for the flux pulse applied on top
// of the device idle bias, with fixed-step classical Runge-Kutta in the
// interaction picture of the idle Hamiltonian. In the full frame the
// Hamiltonian is expressed in the fixed local basis of the idle point,
// where the drive enters exactly as [E_Jc(idle + pulse(t)) - E_Jc(idle)]
// times the coupler potential. In the reduced frame the local basis itself
// depends on flux, so the flux-resolved model family is precomputed on a
// grid spanning the pulse range and H(t) - H_idle is interpolated (local
// eigenstates identified across flux by their index). Throws
// labeling_error if the idle point cannot be labeled and convergence_error
// on a failed step-halving check.
PropagationResult time_evolve(const DeviceParams& params, const FluxPulse& pulse,
                              const SolverOptions& options = {});

struct PhaseReport {
  double phi_c = 0.0;    // conditional phase [rad]
  double theta1 = 0.0;   // single-qubit dynamic phases [rad]
  double theta2 = 0.0;
  double max_leakage = 0.0;  // worst computational column
  // Frobenius distance of the phase-corrected block to diag(1,1,1,e^{i phi_c}).
  double cphase_distance = 0.0;
};

// Phases of the diagonal of the computational block:
//   phi_c  = arg<11|U|11> - arg<10|U|10> - arg<01|U|01> + arg<00|U|00>,
//   theta1 = arg<10|U|10> - arg<00|U|00>, theta2 symmetric.
// phi_c is invariant under single-qubit Z rotations; all phases are
// reported wrapped to (-pi, pi]. Throws phase_error if any diagonal
// element has magnitude below 0.1.
PhaseReport conditional_phase(const Eigen::Matrix4cd& u);
PhaseReport conditional_phase(const PropagationResult& result);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool valid = false;  // false when fewer than two usable points
};

// Least-squares line through (x, y); r2 is the coefficient of determination.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct PhasePoint {
  double tau = 0.0;     // total pulse length, buffers included [ns]
  double phi_c = 0.0;   // unwrapped [rad]
  double theta1 = 0.0;  // unwrapped [rad]
  double theta2 = 0.0;
  double leakage = 0.0;  // max over computational columns
  bool ok = false;
  std::string error;  // set when a point failed
};

struct PhaseSweep {
  std::vector<PhasePoint> points;
  LinearFit fit;  // phi_c vs tau over tau >= fit_min_tau
  double fit_min_tau = 0.0;
};

// Propagates the pulse family {amplitude, tau in taus} -- tau is the total
// pulse length including both buffers -- and unwraps the accumulated
// phases by continuity in tau (nearest-branch selection seeded in [0, 2pi)
// at the shortest length). Per-point failures are flagged, not fatal. The
// linear fit runs over tau >= fit_min_tau (all points if no point reaches
// it).
PhaseSweep phase_vs_length(const DeviceParams& params, double amplitude,
                           const std::vector<double>& taus,
                           const SolverOptions& options = {},
                           double tau_b = 12.0, double sigma = kDefaultSigmaNs,
                           double fit_min_tau = 38.0);

struct LeakagePoint {
  double amplitude = 0.0;
  double mean = 0.0;  // p_l averaged over tau
  double stdev = 0.0;
  int n_ok = 0;
  std::map<FockLabel, double> state_means;  // per tracked leakage state
};

// Mean and standard deviation over the tau list of the accumulated leakage
// p_l, per pulse amplitude. p_l of one propagation is the leaked
// population averaged over the four computational preparations (the
// subspace-averaged leakage rate); per-state breakdowns are averaged the
// same way.
std::vector<LeakagePoint> leakage_sweep(const DeviceParams& params,
                                        const std::vector<double>& amplitudes,
                                        const std::vector<double>& taus,
                                        const SolverOptions& options = {},
                                        double tau_b = 12.0,
                                        double sigma = kDefaultSigmaNs);

struct DynamicPhaseFit {
  PhaseSweep sweep;
  LinearFit q1;  // theta1 vs phi_c
  LinearFit q2;  // theta2 vs phi_c
};

// Fits the single-qubit dynamic phases against the conditional phase over
// a pulse-length sweep at fixed amplitude.
DynamicPhaseFit dynamic_phase_linearity(const DeviceParams& params,
                                        double amplitude,
                                        const std::vector<double>& taus,
                                        const SolverOptions& options = {},
                                        double tau_b = 12.0,
                                        double sigma = kDefaultSigmaNs);

// Flat-top pulse reaching the given total plateau flux from the device
// idle bias (sample values are the excursion relative to the bias). tau is
// the total pulse length including both buffers; the core length is
// tau - 2 tau_b (throws std::invalid_argument if negative).
FluxPulse gate_pulse(const DeviceParams& params, double plateau_flux_phi0,
                     double tau, double tau_b = 12.0,
                     double sigma = kDefaultSigmaNs,
                     double dt = 1.0 / kDefaultSampleRateGsa);

}  // namespace qocsim
