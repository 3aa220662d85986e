#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <unordered_map>
#include <vector>

namespace qocsim {

// Two-qubit Clifford group, enumerated by breadth-first closure over the
// generators {H1, S1, H2, S2, CZ} with equality up to global phase. Order
// 11520. Qubit 1 is the most significant factor, matching the dynamics
// computational basis |00>, |01>, |10>, |11>.
class CliffordGroup {
 public:
  static constexpr int kGenerators = 5;  // H1, S1, H2, S2, CZ

  CliffordGroup();

  int order() const { return static_cast<int>(elements_.size()); }
  const Eigen::Matrix4cd& matrix(int g) const { return elements_[g]; }
  // Generator word reaching the element from the identity.
  const std::vector<int>& word(int g) const { return words_[g]; }
  static const std::array<Eigen::Matrix4cd, kGenerators>& generators();

  // Index of a unitary up to global phase, or -1 if it is not a Clifford.
  int index_of(const Eigen::Matrix4cd& u) const;
  int compose(int a, int b) const;  // index of matrix(a) * matrix(b)
  int inverse(int g) const;
  int identity() const { return 0; }

 private:
  std::vector<Eigen::Matrix4cd> elements_;
  std::vector<std::vector<int>> words_;
  std::unordered_map<std::string, int> lookup_;
};

// Shared immutable instance (built on first use).
const CliffordGroup& clifford_group();

}  // namespace qocsim
