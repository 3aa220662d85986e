#pragma once

#include <vector>

namespace qocsim {

inline constexpr double kDefaultSigmaNs = 2.23;
inline constexpr double kDefaultSampleRateGsa = 2.4;

// Sampled flux waveform together with its analytic parametrization.
// Samples are flux values in Phi_0 units, measured relative to the static
// bias point; the buffers sit at zero.
struct FluxPulse {
  double amplitude = 0.0;  // plateau value [Phi_0]
  double tau_c = 0.0;      // core length [ns]
  double tau_b = 0.0;      // zero-amplitude buffer on each side [ns]
  double sigma = kDefaultSigmaNs;            // Gaussian filter width [ns]
  double dt = 1.0 / kDefaultSampleRateGsa;   // sample period [ns]
  std::vector<double> samples;

  double duration() const { return tau_c + 2.0 * tau_b; }
  // Linear interpolation of the sample train; zero outside [0, duration].
  double value_at(double t_ns) const;
};

// Flat-top Gaussian pulse: an erf-edged square pulse of core length tau_c
// centered between two buffers of length tau_b. Throws std::invalid_argument
// on degenerate parameters (fewer than two samples).
FluxPulse flat_top_gaussian(double amplitude, double tau_c, double tau_b,
                            double sigma = kDefaultSigmaNs,
                            double dt = 1.0 / kDefaultSampleRateGsa);

// Flux-line transfer model: DC gain plus a sum of exponential settling
// terms. Step response s(t) = gain * (1 + sum_k a_k exp(-t/tau_k)), t >= 0.
struct TransferModel {
  struct Term {
    double amplitude = 0.0;  // a_k, dimensionless
    double tau = 0.0;        // settling time constant [ns]
  };
  std::vector<Term> terms;
  double gain = 1.0;

  void validate() const;
};

// Samples the model step response on t = 0, dt, ..., < duration.
std::vector<double> step_response(const TransferModel& model, double duration,
                                  double dt);

// Applies the transfer model to a waveform (the "distortion" the line
// would add). Evaluated recursively, one exponential accumulator per term,
// so it is exact for the sampled model and O(N * terms).
std::vector<double> apply_transfer(const TransferModel& model,
                                   const std::vector<double>& x, double dt);

// One first-order IIR section: y[n] = b0 x[n] + b1 x[n-1] + a1 y[n-1].
struct IirSection {
  double b0 = 1.0;
  double b1 = 0.0;
  double a1 = 0.0;  // feedback coefficient; |a1| < 1 for stability
};

// Cascade of first-order sections applied in order.
struct FilterChain {
  std::vector<IirSection> sections;
  double dt = 1.0 / kDefaultSampleRateGsa;
};

// Designs the predistortion chain inverting the transfer model at sample
// period dt: the model's discrete transfer function is factored exactly
// into first-order sections (poles mapped as exp(-dt/tau_k), zeros from
// the numerator roots), and the chain is the reciprocal cascade, ordered
// longest time constant first. Throws model_error if the model is not
// invertible by stable real first-order sections (|a_k| >= 1, or numerator
// roots complex or inside the unit circle).
FilterChain design_iir(const TransferModel& model, double dt);

std::vector<double> apply_chain(const FilterChain& chain,
                                const std::vector<double>& x);

// Sample-period mismatch throws std::invalid_argument. Output length
// equals input length.
FluxPulse apply_chain(const FluxPulse& pulse, const FilterChain& chain);

}  // namespace qocsim
