#pragma once

#include <Eigen/Dense>
#include <string>

namespace qocsim {

struct MitigationResult {
  Eigen::VectorXd raw;        // direct inverse-matrix solution
  Eigen::VectorXd projected;  // nearest point on the probability simplex
  bool projection_applied = false;  // raw left the simplex
  bool ill_conditioned = false;     // condition number above 1e6
  double condition = 0.0;
};

// Inverts the readout assignment matrix (p_measured = M p_true). Both the
// raw solution and its Euclidean projection onto the probability simplex
// are returned. Throws std::invalid_argument on shape mismatch or a
// singular matrix.
MitigationResult readout_correct(const Eigen::MatrixXd& assignment,
                                 const Eigen::VectorXd& measured);

// Euclidean projection onto {x : x_i >= 0, sum x_i = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

// Reads a square assignment matrix from CSV (one row per line; rows are
// the measured states, columns the prepared states, nine-state ordering
// |n1 n2 nc> = 000, 001, 010, 011, 100, 101, 110, 200, 020 as declared in
// the file; no header). Throws config_error on malformed input.
Eigen::MatrixXd load_assignment_csv(const std::string& path);

}  // namespace qocsim
