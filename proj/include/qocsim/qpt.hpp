#pragma once

#include <cstdint>

#include "qocsim/channels.hpp"

namespace qocsim {

struct ProcessMatrix {
  Eigen::MatrixXd ptm;  // 16x16 Pauli transfer matrix
  bool projected = false;
  double choi_floor = 0.0;   // most negative Choi eigenvalue before clipping
  double tp_residual = 0.0;  // deviation of the first row from (1,0,...,0)
};

struct QptOptions {
  int shots = 0;  // 0: exact expectation values, else binomial sampling
  std::uint64_t seed = 1;
  bool project = true;  // also run the CPTP projection
};

// Standard two-qubit process tomography of a channel: the 16 product
// preparations of {|0>,|1>,|+>,|+i>} per qubit, Pauli expectation readout,
// linear-inversion PTM. Channels of dimension 9 are measured with leakage
// events discarded (the computational block is renormalized per
// preparation). Returns the projected estimate when requested; the raw
// PTM is recovered by calling with project = false.
ProcessMatrix qpt(const Channel& channel, const QptOptions& options = {});

// Projects a PTM onto the CPTP set by alternating projections onto the
// trace-preserving affine subspace and the positive Choi cone (eigenvalue
// clipping), stopping when the update norm falls below 1e-9.
ProcessMatrix project_cptp(const ProcessMatrix& raw);

// Process fidelity tr(R_ideal^T R)/16 against a unitary target.
double process_fidelity(const Eigen::MatrixXd& ptm, const Eigen::Matrix4cd& ideal);

// Average gate fidelity (d F_pro + 1)/(d + 1), d = 4.
double fidelity_avg(const ProcessMatrix& estimate, const Eigen::Matrix4cd& ideal);

}  // namespace qocsim
