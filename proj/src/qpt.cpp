#include "qocsim/qpt.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qocsim/errors.hpp"

namespace qocsim {

namespace {

using cd = std::complex<double>;

constexpr int kComp9[4] = {0, 1, 3, 4};

// Orthonormal Pauli vectorization basis: column m holds vec(P_m)/2.
const Eigen::MatrixXcd& pauli_vec_basis() {
  static const Eigen::MatrixXcd b = [] {
    Eigen::MatrixXcd out(16, 16);
    const auto& paulis = pauli_basis();
    for (int m = 0; m < 16; ++m)
      out.col(m) = Eigen::Map<const Eigen::VectorXcd>(paulis[m].data(), 16) / 2.0;
    return out;
  }();
  return b;
}

Eigen::MatrixXcd superop_from_ptm(const Eigen::MatrixXd& r) {
  const Eigen::MatrixXcd& b = pauli_vec_basis();
  return b * r.cast<cd>() * b.adjoint();
}

Eigen::MatrixXd ptm_from_superop(const Eigen::MatrixXcd& s) {
  const Eigen::MatrixXcd& b = pauli_vec_basis();
  return (b.adjoint() * s * b).real();
}

// Unnormalized Choi matrix of a superoperator in the column-major vec
// convention: C((a,u),(b,v)) = L(E_uv)_{ab}, output factor first. Its
// partial trace over the output factor equals the identity iff the map is
// trace preserving, and C is positive semidefinite iff the map is CP.
Eigen::MatrixXcd choi_of_superop(const Eigen::MatrixXcd& s) {
  Eigen::MatrixXcd c(16, 16);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v)
          c(a * 4 + u, b * 4 + v) = s(b * 4 + a, v * 4 + u);
  return c;
}

// Inverse of choi_of_superop (note the two maps are not the same index
// permutation).
Eigen::MatrixXcd superop_of_choi(const Eigen::MatrixXcd& c) {
  Eigen::MatrixXcd s(16, 16);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 4; ++z)
        for (int w = 0; w < 4; ++w)
          s(x * 4 + y, z * 4 + w) = c(y * 4 + w, x * 4 + z);
  return s;
}

// Single-qubit preparation states |0>, |1>, |+>, |+i>.
Eigen::Vector2cd prep1(int k) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (k) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {s, s};
    default: return {s, cd(0.0, s)};
  }
}

}  // namespace

ProcessMatrix qpt(const Channel& ch, const QptOptions& opt) {
  if (ch.dim != 4 && ch.dim != 9)
    throw std::invalid_argument("qpt: channel dimension 4 or 9");
  const auto& paulis = pauli_basis();
  std::mt19937_64 rng(opt.seed);

  Eigen::MatrixXd e(16, 16), s(16, 16);
  for (int j = 0; j < 16; ++j) {
    const Eigen::Vector2cd a = prep1(j / 4), b = prep1(j % 4);
    Eigen::Vector4cd psi;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) psi(2 * i + k) = a(i) * b(k);
    const Eigen::Matrix4cd rho4 = psi * psi.adjoint();

    Eigen::Matrix4cd out4;
    if (ch.dim == 4) {
      out4 = ch.apply(rho4);
    } else {
      Eigen::MatrixXcd rho9 = Eigen::MatrixXcd::Zero(9, 9);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) rho9(kComp9[r], kComp9[c]) = rho4(r, c);
      const Eigen::MatrixXcd out9 = ch.apply(rho9);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out4(r, c) = out9(kComp9[r], kComp9[c]);
      const double keep = out4.trace().real();
      if (keep < 1e-9)
        throw model_error("qpt: preparation fully leaked, nothing to condition on");
      out4 /= keep;  // discard leakage events
    }

    for (int m = 0; m < 16; ++m) {
      double ev = ((paulis[m] * out4).trace()).real();
      if (opt.shots > 0 && m > 0) {
        const double p_plus = std::clamp(0.5 * (1.0 + ev), 0.0, 1.0);
        std::binomial_distribution<int> bin(opt.shots, p_plus);
        ev = 2.0 * bin(rng) / opt.shots - 1.0;
      }
      e(m, j) = ev;
      s(m, j) = ((paulis[m] * rho4).trace()).real();
    }
  }

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
  if (!lu.isInvertible())
    throw config_error("qpt: preparation set is not informationally complete");
  ProcessMatrix pm;
  pm.ptm = e * lu.inverse();
  pm.tp_residual =
      (pm.ptm.row(0) - Eigen::RowVectorXd::Unit(16, 0)).norm();
  return opt.project ? project_cptp(pm) : pm;
}

ProcessMatrix project_cptp(const ProcessMatrix& raw) {
  Eigen::MatrixXcd c = choi_of_superop(superop_from_ptm(raw.ptm));
  const Eigen::MatrixXcd id4 = Eigen::MatrixXcd::Identity(4, 4);
  for (int it = 0; it < 20000; ++it) {
    const Eigen::MatrixXcd prev = c;
    // TP affine subspace: partial trace over the output factor equals I.
    Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
    for (int a = 0; a < 4; ++a)
      for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v) t(u, v) += c(a * 4 + u, a * 4 + v);
    const Eigen::Matrix4cd delta = t - id4;
    for (int a = 0; a < 4; ++a)
      for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v)
          c(a * 4 + u, a * 4 + v) -= 0.25 * delta(u, v);
    // CP cone: clip negative Choi eigenvalues.
    const Eigen::MatrixXcd herm = 0.5 * (c + c.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    c = es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<cd>() *
        es.eigenvectors().adjoint();
    if ((c - prev).norm() < 1e-9) break;
  }
  // Land exactly on the TP subspace so the first-row invariant holds.
  Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
  for (int a = 0; a < 4; ++a)
    for (int u = 0; u < 4; ++u)
      for (int v = 0; v < 4; ++v) t(u, v) += c(a * 4 + u, a * 4 + v);
  const Eigen::Matrix4cd delta = t - id4;
  for (int a = 0; a < 4; ++a)
    for (int u = 0; u < 4; ++u)
      for (int v = 0; v < 4; ++v) c(a * 4 + u, a * 4 + v) -= 0.25 * delta(u, v);

  ProcessMatrix out;
  out.ptm = ptm_from_superop(superop_of_choi(c));
  out.projected = true;
  {
    const Eigen::MatrixXcd herm = 0.5 * (c + c.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    out.choi_floor = es.eigenvalues().minCoeff();
  }
  out.tp_residual =
      (out.ptm.row(0) - Eigen::RowVectorXd::Unit(16, 0)).norm();
  return out;
}

double process_fidelity(const Eigen::MatrixXd& ptm, const Eigen::Matrix4cd& ideal) {
  Channel ch = unitary_channel(ideal);
  const Eigen::MatrixXd r_ideal = ptm_of_channel(ch);
  return (r_ideal.transpose() * ptm).trace() / 16.0;
}

double fidelity_avg(const ProcessMatrix& estimate, const Eigen::Matrix4cd& ideal) {
  return (4.0 * process_fidelity(estimate.ptm, ideal) + 1.0) / 5.0;
}

}  // namespace qocsim
