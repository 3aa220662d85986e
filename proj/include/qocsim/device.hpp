#pragma once

#include <Eigen/Dense>
#include <compare>
#include <map>
#include <optional>
#include <vector>

namespace qocsim {

// Electrical parameters of the three-node circuit: two fixed-frequency
// computational transmons (1, 2) and a flux-tunable coupler transmon (c).
//
// Units: capacitances in farads, Josephson energies in h*GHz, fluxes
// everywhere in units of the (conventional) flux quantum Phi_0.
struct DeviceParams {
  double c_s1 = 0.0;  // shunt capacitances [F]
  double c_s2 = 0.0;
  double c_sc = 0.0;
  double c_12 = 0.0;  // coupling capacitances [F]
  double c_1c = 0.0;
  double c_2c = 0.0;
  double e_j1 = 0.0;  // Josephson energies [h*GHz]
  double e_j2 = 0.0;
  double e_jc = 0.0;
  double r = 1.0;  // SQUID junction asymmetry (dimensionless)
  double idle_flux = 0.0;  // static coupler bias point [Phi_0]
  Eigen::Matrix3d flux_crosstalk = Eigen::Matrix3d::Identity();
  int n_fock = 8;  // per-mode Fock truncation

  // Throws std::invalid_argument on non-physical parameters.
  void validate() const;
};

// Maxwell capacitance matrix of the circuit, node order (Q1, Q2, C).
struct CapacitanceMatrix {
  Eigen::Matrix3d c;  // [F], symmetric, positive definite
};

CapacitanceMatrix capacitance_matrix(const DeviceParams& params);

// Per-mode charging energies and pairwise charge-coupling coefficients
// obtained from the inverse capacitance matrix.
struct ChargingEnergies {
  // E_C,i = e^2/2 * (C^-1)_ii, in h*GHz.
  Eigen::Vector3d ec;
  // Coefficient of the n_i n_j cross term, 4 e^2 (C^-1)_ij, in h*GHz.
  // Symmetric, zero diagonal.
  Eigen::Matrix3d coupling;
};

ChargingEnergies charging_energies(const CapacitanceMatrix& cm);

// Effective Josephson energy of the asymmetric SQUID,
//   E_J(phase) = E_Jc/(r+1) * sqrt(1 + r^2 + 2 r cos(phase)),
// with phase the flux threading the loop in units of the reduced flux
// quantum (radians). Period 2*pi. Symmetric under r -> 1/r.
double squid_ej(double e_jc, double r, double phase_rad);

// Same modulation with the flux given in units of the conventional flux
// quantum Phi_0 (period 1), routed through the flux-crosstalk matrix.
double coupler_ej_at_flux(const DeviceParams& params, double flux_phi0);

// Bare product-basis label |n1, n2, nc>.
struct FockLabel {
  int n1 = 0, n2 = 0, nc = 0;
  friend auto operator<=>(const FockLabel&, const FockLabel&) = default;
};

// Truncated Fock-space Hamiltonian at a fixed coupler flux, together with
// its eigensolution. All energies in h*GHz; eigenvalues referenced to the
// ground state. The matrix is real symmetric in the local harmonic basis.
struct HamiltonianModel {
  int n = 0;              // per-mode truncation
  double flux = 0.0;      // coupler flux [Phi_0]
  Eigen::Vector3d ec;     // charging energies [GHz]
  Eigen::Vector3d ej;     // local Josephson energies at this flux [GHz]
  Eigen::Vector3d phi_zpf;
  Eigen::Vector3d n_zpf;
  Eigen::Matrix3d coupling;    // charge-coupling coefficients [GHz]
  // Coupler Josephson potential for unit E_J in the model's local basis
  // (n x n); multiplying by a change in E_Jc gives the flux-drive term.
  Eigen::MatrixXd coupler_potential;
  Eigen::MatrixXd hamiltonian; // n^3 x n^3 [GHz]
  double e_ground = 0.0;       // raw ground energy of `hamiltonian` [GHz]
  Eigen::VectorXd energies;    // ascending, ground-referenced [GHz]
  Eigen::MatrixXd eigenvectors;

  int dim() const { return static_cast<int>(hamiltonian.rows()); }
  // Index of a bare label in the product basis (mode 1 slowest).
  int bare_index(const FockLabel& l) const { return (l.n1 * n + l.n2) * n + l.nc; }
};

// Builds the Hamiltonian at the given coupler flux and diagonalizes it.
// The cosine potential is expanded to 6th order; the local harmonic basis
// of each mode is defined by its E_C and its local E_J at this flux.
HamiltonianModel build_hamiltonian(const DeviceParams& params, double flux_phi0);

// Excitation-conserving variant: the charge-charge couplings are reduced
// to their a_i^dag a_j + a_i a_j^dag part (counter-rotating a_i a_j and
// a_i^dag a_j^dag terms dropped), which permits a small truncation. The
// local potentials are kept in full.
HamiltonianModel build_rwa_hamiltonian(const DeviceParams& params,
                                       double flux_phi0, int n_fock = 3);

// Sixth-order expansion of the Josephson potential for unit E_J,
//   phi^2/2 - phi^4/24 + phi^6/720, with phi = phi_zpf (a + a^dag).
Eigen::MatrixXd josephson_potential(int n, double phi_zpf);

// Assigns each tracked bare label to the dressed eigenstate of maximal
// overlap, greedily in descending overlap order. Throws labeling_error if
// any tracked label ends up with squared overlap below 0.5.
std::map<FockLabel, int> label_states(const HamiltonianModel& model,
                                      const std::vector<FockLabel>& tracked);

// Non-throwing variant: labels that cannot be assigned are simply absent.
std::map<FockLabel, int> try_label_states(const HamiltonianModel& model,
                                          const std::vector<FockLabel>& tracked);

// Single- and two-excitation labels tracked by default.
std::vector<FockLabel> default_tracked_labels();

// Ground-referenced energy of a labeled eigenstate [GHz].
double level_energy(const HamiltonianModel& model,
                    const std::map<FockLabel, int>& labels, const FockLabel& l);

// Static cross-Kerr rate alpha_ZZ/2pi in MHz at the given coupler flux:
// the energy of |110> minus the two single-excitation energies.
double alpha_zz(const DeviceParams& params, double flux_phi0);

// Effective transverse qubit-qubit coupling J/2pi in MHz, computed from a
// companion model with both qubit Josephson energies symmetrized so that
// the local qubit modes are degenerate. J is half the signed splitting of
// the single-excitation doublet; positive when the symmetric superposition
// |100> + |010> lies above the antisymmetric one.
double j_rate(const DeviceParams& params, double flux_phi0);

// Transverse coupling rates (g12, g1c, g2c)/2pi in MHz from the charge
// coupling coefficients and zero-point charge fluctuations, with the
// coupler zero-point amplitude evaluated at the given flux.
Eigen::Vector3d bare_couplings(const DeviceParams& params, double flux_phi0 = 0.0);

struct SpectrumPoint {
  double flux_phi0 = 0.0;
  double omega_c_ghz = 0.0;   // dressed coupler frequency [GHz]
  double alpha_zz_mhz = 0.0;  // cross-Kerr rate [MHz]
  double j_mhz = 0.0;         // transverse coupling [MHz]
  bool label_ok = false;      // false: labeling failed, values not meaningful
};

// Evaluates the static spectrum on a flux grid. Points where labeling
// fails are flagged rather than dropped. with_j adds the symmetrized-model
// diagonalization per point (roughly doubles the cost).
std::vector<SpectrumPoint> spectrum_sweep(const DeviceParams& params,
                                          const std::vector<double>& flux_grid,
                                          bool with_j = true);

// Dressed coupler frequency [GHz] at the given flux (energy of |001>).
double coupler_frequency(const DeviceParams& params, double flux_phi0);

// Finds the flux in [0, 0.5) where the dressed coupler frequency equals
// the target, by bisection on the monotonically decreasing branch.
double flux_for_coupler_frequency(const DeviceParams& params, double omega_c_ghz);

// Dressed qubit frequencies and anharmonicities [GHz] at the given flux.
struct DressedSpectrum {
  Eigen::Vector3d omega;  // (Q1, Q2, C) 0->1 transition frequencies
  Eigen::Vector3d alpha;  // anharmonicities (2*E01 - E02 style), negative
};
DressedSpectrum dressed_spectrum(const DeviceParams& params, double flux_phi0);

}  // namespace qocsim
