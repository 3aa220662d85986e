#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qocsim/channels.hpp"
#include "qocsim/clifford.hpp"

namespace qocsim {

struct RbSequence {
  std::vector<int> gates;  // group indices, applied in order
  int recovery = 0;        // group index closing the sequence to identity
};

// n_c uniformly random Cliffords plus the recovery element. When
// `interleaved` is a group index, the ideal recovery accounts for the
// target gate inserted after each Clifford. Deterministic in the seed.
RbSequence rb_sequence(int n_c, std::uint64_t seed,
                       const CliffordGroup& group = clifford_group(),
                       int interleaved = -1);

struct DecayFit {
  double a = 0.0, b = 0.0, r = 0.0;
  double r_err = 0.0;  // 1-sigma from the fit covariance
  double chi2 = 0.0;
};

struct LeakageFit {
  double p_inf = 0.0;   // steady-state leaked population
  double lam = 0.0;     // per-step retention factor
  double per_step = 0.0;  // initial leakage rate p_inf * (1 - lam)
};

struct RBResult {
  std::vector<int> lengths;
  std::vector<double> zz_mean, zz_err;      // <sigma_z sigma_z> correlator
  std::vector<double> leak_mean, leak_err;  // population outside the 2x2 block
  DecayFit fit;
  LeakageFit leak_fit;
};

struct RbOptions {
  std::vector<int> lengths = {1, 5, 10, 20, 40, 80};
  int randomizations = 30;
  std::uint64_t seed = 1;
  int shots = 0;  // 0: exact expectation values, else multinomial sampling
  int interleaved = -1;  // group index of the interleaved target, -1: none
};

// Simulates randomized benchmarking on the 9-level space: each Clifford is
// its ideal embedded unitary followed by `noise`; an interleaved target
// (if any) is followed by `interleaved_noise` (defaults to `noise`).
// Decay and leakage fits are attempted and left zeroed on fit failure.
RBResult run_rb(const Channel& noise, const RbOptions& options,
                const Channel* interleaved_noise = nullptr);

// Weighted fit of a * r^N + b. Throws fit_error on degenerate (constant)
// data or non-convergence.
DecayFit fit_decay(const std::vector<int>& lengths,
                   const std::vector<double>& means,
                   const std::vector<double>& errors = {});

// Fit of the saturating leakage model p(N) = p_inf * (1 - lam^N).
LeakageFit fit_leakage(const std::vector<int>& lengths,
                       const std::vector<double>& means);

// Interleaved-RB gate fidelity, F = 1 - (d-1)/d * (1 - r_irb/r_rb), d = 4.
// Values with r_irb > r_rb are still returned (F > 1 flags the anomaly).
double irb_fidelity(double r_rb, double r_irb);

}  // namespace qocsim
