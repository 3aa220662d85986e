#pragma once

#include <Eigen/Dense>
#include <array>

namespace qocsim {

// Quantum channel as a dense superoperator acting on column-major
// vectorized density matrices: vec(L(rho)) = superop * vec(rho). The RB
// simulations use dim = 9 (one extra level per qubit, basis
// |n1 n2> with n in {0,1,2} and qubit 1 the most significant digit);
// process tomography uses dim = 4.
struct Channel {
  int dim = 0;
  Eigen::MatrixXcd superop;  // dim^2 x dim^2

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
  // Throws model_error if the map can increase trace by more than 1e-6
  // on some state (largest eigenvalue of the dual image of the identity).
  void validate() const;
};

// L(rho) = u rho u^dag.
Channel unitary_channel(const Eigen::MatrixXcd& u);

// Sequential composition: (b after a)(rho) = b(a(rho)).
Channel compose(const Channel& a, const Channel& b);

// Identity channel of the given dimension.
Channel identity_channel(int dim);

// Embeds a two-qubit unitary into the 9-level space (acts on the
// computational block, identity on the leakage levels).
Eigen::MatrixXcd embed_two_qubit(const Eigen::Matrix4cd& u);

// Two-qubit depolarizing on the computational block:
// rho_c -> (1 - p) rho_c + p tr(rho_c) I/4; leakage coherences with the
// computational block are scaled by sqrt(1-p), leakage populations are
// untouched. dim 4 or 9.
Channel depolarizing(double p, int dim = 9);

// Amplitude-damping surrogate on one qubit (0 or 1): decay 1->0 with
// probability gamma and 2->1 with probability min(2 gamma, 1).
Channel amplitude_damping(double gamma, int qubit, int dim = 9);

// Leakage exchange on one qubit: with probability p the levels |1> and
// |2> are swapped (dim 9 only).
Channel leakage_exchange(double p, int qubit);

// Pauli transfer matrix of a channel (dim 4: direct; dim 9: the
// computational block conditioned on no leakage is NOT taken -- the raw
// block map is used, so the PTM of a leaky channel is trace-decreasing).
Eigen::MatrixXd ptm_of_channel(const Channel& ch);

// The sixteen two-qubit Pauli matrices, I,X,Y,Z per qubit, qubit 1 major:
// index m = 4*a + b -> P_a (x) P_b.
const std::array<Eigen::Matrix4cd, 16>& pauli_basis();

}  // namespace qocsim
