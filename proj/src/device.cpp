#include "qocsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qocsim/constants.hpp"
#include "qocsim/errors.hpp"
#include "qocsim/operators.hpp"

namespace qocsim {

void DeviceParams::validate() const {
  const double caps[] = {c_s1, c_s2, c_sc};
  for (double c : caps)
    if (!(c > 0.0)) throw std::invalid_argument("shunt capacitances must be positive");
  const double couplings[] = {c_12, c_1c, c_2c};
  for (double c : couplings)
    if (c < 0.0) throw std::invalid_argument("coupling capacitances must be non-negative");
  const double ejs[] = {e_j1, e_j2, e_jc};
  for (double ej : ejs)
    if (!(ej > 0.0)) throw std::invalid_argument("Josephson energies must be positive");
  if (!(r > 0.0)) throw std::invalid_argument("SQUID asymmetry r must be positive");
  if (n_fock < 3) throw std::invalid_argument("Fock truncation must be at least 3");
}

CapacitanceMatrix capacitance_matrix(const DeviceParams& p) {
  p.validate();
  Eigen::Matrix3d c;
  c << p.c_s1 + p.c_12 + p.c_1c, -p.c_12, -p.c_1c,
       -p.c_12, p.c_s2 + p.c_12 + p.c_2c, -p.c_2c,
       -p.c_1c, -p.c_2c, p.c_sc + p.c_1c + p.c_2c;
  return {c};
}

ChargingEnergies charging_energies(const CapacitanceMatrix& cm) {
  const double det = cm.c.determinant();
  if (!(det > 0.0)) throw model_error("capacitance matrix is not positive definite");
  const Eigen::Matrix3d inv = cm.c.inverse();
  ChargingEnergies out;
  out.ec = kEsqOver2h * inv.diagonal();
  out.coupling = 8.0 * kEsqOver2h * inv;  // 4 e^2 (C^-1)_ij / h, in GHz
  out.coupling.diagonal().setZero();
  return out;
}

double squid_ej(double e_jc, double r, double phase_rad) {
  return e_jc / (r + 1.0) *
         std::sqrt(1.0 + r * r + 2.0 * r * std::cos(phase_rad));
}

double coupler_ej_at_flux(const DeviceParams& p, double flux_phi0) {
  const Eigen::Vector3d applied =
      p.flux_crosstalk * Eigen::Vector3d(0.0, 0.0, flux_phi0);
  return squid_ej(p.e_jc, p.r, kTwoPi * applied(2));
}

Eigen::MatrixXd josephson_potential(int n, double phi_zpf) {
  const Eigen::MatrixXd phi = phi_zpf * position_op(n);
  const Eigen::MatrixXd phi2 = phi * phi;
  const Eigen::MatrixXd phi4 = phi2 * phi2;
  return phi2 / 2.0 - phi4 / 24.0 + phi2 * phi4 / 720.0;
}

namespace {

// Local transmon Hamiltonian in its harmonic basis:
//   H = -4 E_C q^2 + E_J (phi^2/2 - phi^4/24 + phi^6/720),
// with q = n_zpf (a^dag - a) and phi = phi_zpf (a + a^dag); the charge
// operator is n = i q, so the kinetic term 4 E_C n^2 = -4 E_C q^2.
Eigen::MatrixXd local_transmon(int n, double ec, double ej,
                               double phi_zpf, double n_zpf) {
  const Eigen::MatrixXd q = n_zpf * momentum_q_op(n);
  return -4.0 * ec * (q * q) + ej * josephson_potential(n, phi_zpf);
}

HamiltonianModel build_impl(const DeviceParams& p, double flux_phi0,
                            int n_fock, bool rwa_coupling) {
  p.validate();
  const auto ch = charging_energies(capacitance_matrix(p));

  HamiltonianModel m;
  m.n = n_fock;
  m.flux = flux_phi0;
  m.ec = ch.ec;
  m.coupling = ch.coupling;
  m.ej = Eigen::Vector3d(p.e_j1, p.e_j2, coupler_ej_at_flux(p, flux_phi0));
  if (!(m.ej(2) > 0.0))
    throw model_error("effective coupler Josephson energy vanishes at this flux");
  for (int i = 0; i < 3; ++i) {
    m.phi_zpf(i) = std::pow(2.0 * m.ec(i) / m.ej(i), 0.25);
    m.n_zpf(i) = std::pow(m.ej(i) / (32.0 * m.ec(i)), 0.25);
  }

  const int n = m.n;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd h;
  if (rwa_coupling) {
    // Reduced model: each mode is truncated to its n lowest local
    // eigenstates (solved in a larger harmonic basis so the local spectrum
    // and charge matrix elements stay accurate), and only the
    // excitation-conserving part of the charge coupling is kept. With the
    // local charge written as i Q, Q real antisymmetric, the raising part
    // S is the strictly lower triangle of Q in the energy-ordered local
    // eigenbasis; c n_i n_j reduces to c (S_i S_j^T + S_i^T S_j).
    const int nbig = std::max(12, 2 * n);
    std::array<Eigen::MatrixXd, 3> h_local, s_local;
    Eigen::MatrixXd vc_big;  // coupler local eigenvectors
    for (int i = 0; i < 3; ++i) {
      const Eigen::MatrixXd hb =
          local_transmon(nbig, m.ec(i), m.ej(i), m.phi_zpf(i), m.n_zpf(i));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> les(hb);
      if (les.info() != Eigen::Success) throw model_error("eigensolver failed");
      Eigen::MatrixXd v = les.eigenvectors().leftCols(n);
      // Fix the local eigenvector gauge (dominant harmonic component
      // positive) so matrix elements vary continuously with flux.
      for (int j = 0; j < n; ++j)
        if (v(j, j) < 0.0) v.col(j) = -v.col(j);
      h_local[i] = (les.eigenvalues().head(n).array() - les.eigenvalues()(0))
                       .matrix().asDiagonal();
      const Eigen::MatrixXd q_loc =
          v.transpose() * (m.n_zpf(i) * momentum_q_op(nbig)) * v;
      s_local[i] = q_loc.triangularView<Eigen::StrictlyLower>();
      if (i == 2) vc_big = v;
    }
    h = kron3(h_local[0], id, id) + kron3(id, h_local[1], id) +
        kron3(id, id, h_local[2]);
    h += m.coupling(0, 1) * (kron3(s_local[0], s_local[1].transpose(), id) +
                             kron3(s_local[0].transpose(), s_local[1], id));
    h += m.coupling(0, 2) * (kron3(s_local[0], id, s_local[2].transpose()) +
                             kron3(s_local[0].transpose(), id, s_local[2]));
    h += m.coupling(1, 2) * (kron3(id, s_local[1], s_local[2].transpose()) +
                             kron3(id, s_local[1].transpose(), s_local[2]));
    m.coupler_potential =
        vc_big.transpose() * josephson_potential(nbig, m.phi_zpf(2)) * vc_big;
  } else {
    std::array<Eigen::MatrixXd, 3> h_local;
    std::array<Eigen::MatrixXd, 3> q_local;
    for (int i = 0; i < 3; ++i) {
      h_local[i] = local_transmon(n, m.ec(i), m.ej(i), m.phi_zpf(i), m.n_zpf(i));
      q_local[i] = m.n_zpf(i) * momentum_q_op(n);
    }
    h = kron3(h_local[0], id, id) + kron3(id, h_local[1], id) +
        kron3(id, id, h_local[2]);
    // Charge-charge couplings: c_ij n_i n_j = -c_ij q_i q_j with n = i q.
    h -= m.coupling(0, 1) * kron3(q_local[0], q_local[1], id);
    h -= m.coupling(0, 2) * kron3(q_local[0], id, q_local[2]);
    h -= m.coupling(1, 2) * kron3(id, q_local[1], q_local[2]);
    m.coupler_potential = josephson_potential(n, m.phi_zpf(2));
  }

  m.hamiltonian = h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw model_error("eigensolver failed");
  m.e_ground = es.eigenvalues()(0);
  m.energies = es.eigenvalues().array() - es.eigenvalues()(0);
  m.eigenvectors = es.eigenvectors();
  return m;
}

}  // namespace

HamiltonianModel build_hamiltonian(const DeviceParams& p, double flux_phi0) {
  return build_impl(p, flux_phi0, p.n_fock, false);
}

HamiltonianModel build_rwa_hamiltonian(const DeviceParams& p, double flux_phi0,
                                       int n_fock) {
  if (n_fock < 3) throw std::invalid_argument("Fock truncation must be at least 3");
  return build_impl(p, flux_phi0, n_fock, true);
}

namespace {

std::map<FockLabel, int> label_impl(const HamiltonianModel& m,
                                    const std::vector<FockLabel>& tracked,
                                    std::vector<FockLabel>* failed) {
  struct Candidate {
    double overlap2;
    int label_idx;
    int eig_idx;
  };
  std::vector<Candidate> cands;
  cands.reserve(tracked.size() * 8);
  for (int li = 0; li < static_cast<int>(tracked.size()); ++li) {
    const int bare = m.bare_index(tracked[li]);
    for (int k = 0; k < m.dim(); ++k) {
      const double v = m.eigenvectors(bare, k);
      const double o2 = v * v;
      if (o2 >= 0.25) cands.push_back({o2, li, k});
    }
  }
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.overlap2 > b.overlap2; });

  std::map<FockLabel, int> out;
  std::vector<bool> label_done(tracked.size(), false);
  std::vector<bool> eig_taken(m.dim(), false);
  for (const auto& c : cands) {
    if (label_done[c.label_idx] || eig_taken[c.eig_idx]) continue;
    if (c.overlap2 < 0.5) break;  // floor: below this, hybridization is too strong
    label_done[c.label_idx] = true;
    eig_taken[c.eig_idx] = true;
    out[tracked[c.label_idx]] = c.eig_idx;
  }
  if (failed) {
    for (size_t i = 0; i < tracked.size(); ++i)
      if (!label_done[i]) failed->push_back(tracked[i]);
  }
  return out;
}

}  // namespace

std::map<FockLabel, int> label_states(const HamiltonianModel& m,
                                      const std::vector<FockLabel>& tracked) {
  std::vector<FockLabel> failed;
  auto out = label_impl(m, tracked, &failed);
  if (!failed.empty()) {
    const auto& l = failed.front();
    throw labeling_error("no eigenstate with overlap >= 0.5 for |" +
                         std::to_string(l.n1) + std::to_string(l.n2) +
                         std::to_string(l.nc) + "> at flux " + std::to_string(m.flux));
  }
  return out;
}

std::map<FockLabel, int> try_label_states(const HamiltonianModel& m,
                                          const std::vector<FockLabel>& tracked) {
  return label_impl(m, tracked, nullptr);
}

std::vector<FockLabel> default_tracked_labels() {
  return {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0},
          {2, 0, 0}, {0, 2, 0}, {1, 0, 1}, {0, 1, 1}, {0, 0, 2}};
}

double level_energy(const HamiltonianModel& m, const std::map<FockLabel, int>& labels,
                    const FockLabel& l) {
  auto it = labels.find(l);
  if (it == labels.end()) throw labeling_error("label not assigned");
  return m.energies(it->second);
}

double alpha_zz(const DeviceParams& p, double flux_phi0) {
  const auto m = build_hamiltonian(p, flux_phi0);
  const auto labels = label_states(m, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  const double e110 = level_energy(m, labels, {1, 1, 0});
  const double e100 = level_energy(m, labels, {1, 0, 0});
  const double e010 = level_energy(m, labels, {0, 1, 0});
  return (e110 - e100 - e010) * 1e3;
}

double j_rate(const DeviceParams& p, double flux_phi0) {
  DeviceParams sym = p;
  sym.e_j1 = sym.e_j2 = 0.5 * (p.e_j1 + p.e_j2);
  const auto m = build_hamiltonian(sym, flux_phi0);

  // The degenerate qubit doublet hybridizes fully, so label by combined
  // weight on span{|100>, |010>} instead of per-label overlap.
  const int b100 = m.bare_index({1, 0, 0});
  const int b010 = m.bare_index({0, 1, 0});
  int best = -1, second = -1;
  double wbest = 0.0, wsecond = 0.0;
  for (int k = 0; k < m.dim(); ++k) {
    const double c1 = m.eigenvectors(b100, k);
    const double c2 = m.eigenvectors(b010, k);
    const double w = c1 * c1 + c2 * c2;
    if (w > wbest) {
      second = best; wsecond = wbest;
      best = k; wbest = w;
    } else if (w > wsecond) {
      second = k; wsecond = w;
    }
  }
  if (wsecond < 0.5)
    throw labeling_error("qubit doublet hybridizes with other states at this flux");

  const double c1 = m.eigenvectors(b100, best);
  const double c2 = m.eigenvectors(b010, best);
  const bool best_symmetric = c1 * c2 > 0.0;
  const double e_sym = best_symmetric ? m.energies(best) : m.energies(second);
  const double e_anti = best_symmetric ? m.energies(second) : m.energies(best);
  return 0.5 * (e_sym - e_anti) * 1e3;
}

Eigen::Vector3d bare_couplings(const DeviceParams& p, double flux_phi0) {
  const auto ch = charging_energies(capacitance_matrix(p));
  const double ejc = coupler_ej_at_flux(p, flux_phi0);
  const Eigen::Vector3d ej(p.e_j1, p.e_j2, ejc);
  Eigen::Vector3d nz;
  for (int i = 0; i < 3; ++i) nz(i) = std::pow(ej(i) / (32.0 * ch.ec(i)), 0.25);
  return {ch.coupling(0, 1) * nz(0) * nz(1) * 1e3,
          ch.coupling(0, 2) * nz(0) * nz(2) * 1e3,
          ch.coupling(1, 2) * nz(1) * nz(2) * 1e3};
}

double coupler_frequency(const DeviceParams& p, double flux_phi0) {
  const auto m = build_hamiltonian(p, flux_phi0);
  const auto labels = label_states(m, {{0, 0, 1}});
  return level_energy(m, labels, {0, 0, 1});
}

double flux_for_coupler_frequency(const DeviceParams& p, double omega_c_ghz) {
  double lo = 0.0, hi = 0.4999;
  double flo = coupler_frequency(p, lo);
  double fhi;
  // The decreasing branch may lose labeling near resonance with the qubits;
  // back off the upper bracket until the frequency is defined.
  for (;;) {
    try {
      fhi = coupler_frequency(p, hi);
      break;
    } catch (const labeling_error&) {
      hi *= 0.95;
      if (hi < 1e-3) throw;
    }
  }
  if (omega_c_ghz > flo || omega_c_ghz < fhi)
    throw model_error("target coupler frequency outside reachable range");
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (coupler_frequency(p, mid) > omega_c_ghz)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

DressedSpectrum dressed_spectrum(const DeviceParams& p, double flux_phi0) {
  const auto m = build_hamiltonian(p, flux_phi0);
  const auto labels = label_states(
      m, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0}, {0, 2, 0}, {0, 0, 2}});
  DressedSpectrum out;
  out.omega(0) = level_energy(m, labels, {1, 0, 0});
  out.omega(1) = level_energy(m, labels, {0, 1, 0});
  out.omega(2) = level_energy(m, labels, {0, 0, 1});
  out.alpha(0) = level_energy(m, labels, {2, 0, 0}) - 2.0 * out.omega(0);
  out.alpha(1) = level_energy(m, labels, {0, 2, 0}) - 2.0 * out.omega(1);
  out.alpha(2) = level_energy(m, labels, {0, 0, 2}) - 2.0 * out.omega(2);
  return out;
}

std::vector<SpectrumPoint> spectrum_sweep(const DeviceParams& p,
                                          const std::vector<double>& flux_grid,
                                          bool with_j) {
  std::vector<SpectrumPoint> out;
  out.reserve(flux_grid.size());
  for (double flux : flux_grid) {
    SpectrumPoint pt;
    pt.flux_phi0 = flux;
    try {
      const auto m = build_hamiltonian(p, flux);
      const auto labels = label_states(
          m, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}});
      pt.omega_c_ghz = level_energy(m, labels, {0, 0, 1});
      pt.alpha_zz_mhz = (level_energy(m, labels, {1, 1, 0}) -
                         level_energy(m, labels, {1, 0, 0}) -
                         level_energy(m, labels, {0, 1, 0})) * 1e3;
      pt.j_mhz = with_j ? j_rate(p, flux) : 0.0;
      pt.label_ok = true;
    } catch (const labeling_error&) {
      pt.label_ok = false;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace qocsim
