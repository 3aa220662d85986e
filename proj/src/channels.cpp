#include "qocsim/channels.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "qocsim/errors.hpp"

namespace qocsim {

namespace {

using cd = std::complex<double>;

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int dim) {
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

// Builds the superoperator column by column from the action on matrix
// units; fine at these dimensions (<= 9).
Channel channel_from_map(
    int dim, const std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)>& f) {
  Channel ch;
  ch.dim = dim;
  ch.superop.resize(dim * dim, dim * dim);
  Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) {
      unit(r, c) = 1.0;
      ch.superop.col(c * dim + r) = vec(f(unit));
      unit(r, c) = 0.0;
    }
  return ch;
}

// The four computational indices within the 9-level basis |n1 n2>,
// n = 3*n1 + n2.
constexpr int kComp9[4] = {0, 1, 3, 4};

}  // namespace

Eigen::MatrixXcd Channel::apply(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("channel/state dimension mismatch");
  return unvec(superop * vec(rho), dim);
}

void Channel::validate() const {
  // Trace of the image: tr(L(rho)) = <vec(I), S vec(rho)>; the dual image
  // of the identity must satisfy L^dag(I) <= (1 + 1e-6) I.
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  const Eigen::MatrixXcd dual = unvec(superop.adjoint() * vec(id), dim);
  const Eigen::MatrixXcd herm = 0.5 * (dual + dual.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  if (es.eigenvalues().maxCoeff() > 1.0 + 1e-6)
    throw model_error("channel increases trace beyond tolerance");
}

Channel unitary_channel(const Eigen::MatrixXcd& u) {
  Channel ch;
  ch.dim = static_cast<int>(u.rows());
  // vec(u rho u^dag) = (conj(u) kron u) vec(rho), column-major.
  ch.superop.resize(ch.dim * ch.dim, ch.dim * ch.dim);
  for (int i = 0; i < ch.dim; ++i)
    for (int j = 0; j < ch.dim; ++j)
      ch.superop.block(i * ch.dim, j * ch.dim, ch.dim, ch.dim) =
          std::conj(u(i, j)) * u;
  return ch;
}

Channel compose(const Channel& a, const Channel& b) {
  if (a.dim != b.dim) throw std::invalid_argument("channel dimension mismatch");
  Channel ch;
  ch.dim = a.dim;
  ch.superop = b.superop * a.superop;
  return ch;
}

Channel identity_channel(int dim) {
  Channel ch;
  ch.dim = dim;
  ch.superop = Eigen::MatrixXcd::Identity(dim * dim, dim * dim);
  return ch;
}

Eigen::MatrixXcd embed_two_qubit(const Eigen::Matrix4cd& u) {
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Identity(9, 9);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) big(kComp9[r], kComp9[c]) = u(r, c);
  return big;
}

Channel depolarizing(double p, int dim) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing p in [0,1]");
  if (dim == 4) {
    return channel_from_map(4, [p](const Eigen::MatrixXcd& rho) {
      return ((1.0 - p) * rho +
              p * rho.trace() / 4.0 * Eigen::MatrixXcd::Identity(4, 4))
          .eval();
    });
  }
  if (dim != 9) throw std::invalid_argument("depolarizing: dim 4 or 9");
  const double s = std::sqrt(1.0 - p);
  return channel_from_map(9, [p, s](const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd out = rho;
    cd tr_c(0.0, 0.0);
    for (int i : kComp9) tr_c += rho(i, i);
    // computational block
    for (int r : kComp9)
      for (int c : kComp9) out(r, c) = (1.0 - p) * rho(r, c);
    for (int i : kComp9) out(i, i) += p * tr_c / 4.0;
    // coherence between the blocks decays with the Kraus weight
    for (int r = 0; r < 9; ++r) {
      const bool rc = r == 0 || r == 1 || r == 3 || r == 4;
      for (int c = 0; c < 9; ++c) {
        const bool cc = c == 0 || c == 1 || c == 3 || c == 4;
        if (rc != cc) out(r, c) = s * rho(r, c);
      }
    }
    return out;
  });
}

Channel amplitude_damping(double gamma, int qubit, int dim) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma in [0,1]");
  if (dim != 9) throw std::invalid_argument("amplitude_damping: dim 9 only");
  if (qubit != 0 && qubit != 1) throw std::invalid_argument("qubit 0 or 1");
  const double g2 = std::min(2.0 * gamma, 1.0);
  Eigen::Matrix3cd k0 = Eigen::Matrix3cd::Zero(), k1 = Eigen::Matrix3cd::Zero(),
                   k2 = Eigen::Matrix3cd::Zero();
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k0(2, 2) = std::sqrt(1.0 - g2);
  k1(0, 1) = std::sqrt(gamma);
  k2(1, 2) = std::sqrt(g2);
  const Eigen::Matrix3cd id3 = Eigen::Matrix3cd::Identity();
  auto lift = [&](const Eigen::Matrix3cd& k) {
    Eigen::MatrixXcd out(9, 9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out.block(3 * i, 3 * j, 3, 3) =
            qubit == 0 ? (k(i, j) * id3).eval()
                       : (cd(i == j ? 1.0 : 0.0) * k).eval();
    return out;
  };
  const Eigen::MatrixXcd a = lift(k0), b = lift(k1), c = lift(k2);
  return channel_from_map(9, [a, b, c](const Eigen::MatrixXcd& rho) {
    return (a * rho * a.adjoint() + b * rho * b.adjoint() +
            c * rho * c.adjoint())
        .eval();
  });
}

Channel leakage_exchange(double p, int qubit) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p in [0,1]");
  if (qubit != 0 && qubit != 1) throw std::invalid_argument("qubit 0 or 1");
  Eigen::Matrix3cd swap = Eigen::Matrix3cd::Zero();
  swap(0, 0) = 1.0;
  swap(1, 2) = 1.0;
  swap(2, 1) = 1.0;
  const Eigen::Matrix3cd id3 = Eigen::Matrix3cd::Identity();
  Eigen::MatrixXcd s(9, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      s.block(3 * i, 3 * j, 3, 3) =
          qubit == 0 ? (swap(i, j) * id3).eval()
                     : (cd(i == j ? 1.0 : 0.0) * swap).eval();
  return channel_from_map(9, [p, s](const Eigen::MatrixXcd& rho) {
    return ((1.0 - p) * rho + p * s * rho * s.adjoint()).eval();
  });
}

const std::array<Eigen::Matrix4cd, 16>& pauli_basis() {
  static const auto basis = [] {
    std::array<Eigen::Matrix2cd, 4> p1;
    p1[0].setIdentity();
    p1[1] << 0.0, 1.0, 1.0, 0.0;
    p1[2] << 0.0, cd(0.0, -1.0), cd(0.0, 1.0), 0.0;
    p1[3] << 1.0, 0.0, 0.0, -1.0;
    std::array<Eigen::Matrix4cd, 16> out;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            out[4 * a + b].block<2, 2>(2 * i, 2 * j) = p1[a](i, j) * p1[b];
    return out;
  }();
  return basis;
}

Eigen::MatrixXd ptm_of_channel(const Channel& ch) {
  const auto& paulis = pauli_basis();
  Eigen::MatrixXd r(16, 16);
  for (int n = 0; n < 16; ++n) {
    Eigen::MatrixXcd in;
    if (ch.dim == 4) {
      in = paulis[n];
    } else if (ch.dim == 9) {
      in = Eigen::MatrixXcd::Zero(9, 9);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) in(kComp9[a], kComp9[b]) = paulis[n](a, b);
    } else {
      throw std::invalid_argument("ptm_of_channel: dim 4 or 9");
    }
    const Eigen::MatrixXcd out = ch.apply(in);
    Eigen::Matrix4cd blk;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        blk(a, b) = ch.dim == 4 ? out(a, b) : out(kComp9[a], kComp9[b]);
    for (int m = 0; m < 16; ++m)
      r(m, n) = ((paulis[m] * blk).trace() / 4.0).real();
  }
  return r;
}

}  // namespace qocsim
