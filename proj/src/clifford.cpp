#include "qocsim/clifford.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <deque>

#include "qocsim/errors.hpp"

namespace qocsim {

namespace {

using cd = std::complex<double>;

// Canonical key of a unitary up to global phase: rotate the first entry of
// sufficient magnitude to the positive real axis, then round. Clifford
// entries in this representation live on a coarse grid (multiples of 1/2
// in modulus, eighth-turn phases), so 1e-4 rounding is far below the
// minimal spacing.
std::string phase_key(const Eigen::Matrix4cd& u) {
  cd ref(0.0, 0.0);
  for (int c = 0; c < 4 && ref == cd(0.0, 0.0); ++c)
    for (int r = 0; r < 4; ++r)
      if (std::abs(u(r, c)) > 0.25) {
        ref = u(r, c) / std::abs(u(r, c));
        break;
      }
  if (ref == cd(0.0, 0.0)) throw model_error("degenerate unitary in phase_key");
  std::string key;
  key.reserve(4 * 16 * 2);
  char buf[32];
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) {
      const cd z = u(r, c) * std::conj(ref);
      // avoid -0.0000
      const double re = std::round(z.real() * 1e4) / 1e4 + 0.0;
      const double im = std::round(z.imag() * 1e4) / 1e4 + 0.0;
      std::snprintf(buf, sizeof buf, "%.4f,%.4f;", re, im);
      key += buf;
    }
  return key;
}

}  // namespace

const std::array<Eigen::Matrix4cd, CliffordGroup::kGenerators>&
CliffordGroup::generators() {
  static const auto gens = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd h, sg, id2;
    h << s, s, s, -s;
    sg << 1.0, 0.0, 0.0, cd(0.0, 1.0);
    id2.setIdentity();
    auto kron2 = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
      Eigen::Matrix4cd out;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
      return out;
    };
    Eigen::Matrix4cd cz = Eigen::Matrix4cd::Identity();
    cz(3, 3) = -1.0;
    return std::array<Eigen::Matrix4cd, kGenerators>{
        kron2(h, id2), kron2(sg, id2), kron2(id2, h), kron2(id2, sg), cz};
  }();
  return gens;
}

CliffordGroup::CliffordGroup() {
  const auto& gens = generators();
  elements_.push_back(Eigen::Matrix4cd::Identity());
  words_.push_back({});
  lookup_.emplace(phase_key(elements_[0]), 0);
  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    const int g = frontier.front();
    frontier.pop_front();
    for (int k = 0; k < kGenerators; ++k) {
      const Eigen::Matrix4cd u = elements_[g] * gens[k];
      const std::string key = phase_key(u);
      if (lookup_.count(key)) continue;
      const int idx = static_cast<int>(elements_.size());
      lookup_.emplace(key, idx);
      elements_.push_back(u);
      words_.push_back(words_[g]);
      words_.back().push_back(k);
      frontier.push_back(idx);
    }
  }
}

int CliffordGroup::index_of(const Eigen::Matrix4cd& u) const {
  const auto it = lookup_.find(phase_key(u));
  return it == lookup_.end() ? -1 : it->second;
}

int CliffordGroup::compose(int a, int b) const {
  const int idx = index_of(elements_[a] * elements_[b]);
  if (idx < 0) throw model_error("clifford composition left the group");
  return idx;
}

int CliffordGroup::inverse(int g) const {
  const int idx = index_of(elements_[g].adjoint());
  if (idx < 0) throw model_error("clifford inverse not found");
  return idx;
}

const CliffordGroup& clifford_group() {
  static const CliffordGroup group;
  return group;
}

}  // namespace qocsim
