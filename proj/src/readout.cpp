#include "qocsim/readout.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qocsim/errors.hpp"

namespace qocsim {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  return (v.array() - theta).cwiseMax(0.0);
}

MitigationResult readout_correct(const Eigen::MatrixXd& assignment,
                                 const Eigen::VectorXd& measured) {
  if (assignment.rows() != assignment.cols())
    throw std::invalid_argument("assignment matrix must be square");
  if (assignment.rows() != measured.size())
    throw std::invalid_argument("assignment matrix / vector size mismatch");

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      assignment, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || !(smin > smax * 1e-14))
    throw std::invalid_argument("assignment matrix is singular");

  MitigationResult out;
  out.condition = smax / smin;
  out.ill_conditioned = out.condition > 1e6;
  out.raw = svd.solve(measured);
  out.projected = project_simplex(out.raw);
  out.projection_applied =
      out.raw.minCoeff() < -1e-12 || std::abs(out.raw.sum() - 1.0) > 1e-9;
  return out;
}

Eigen::MatrixXd load_assignment_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open assignment matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw config_error("malformed number in " + path + ": '" + cell + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw config_error("empty assignment matrix file: " + path);
  const size_t n = rows.size();
  for (const auto& r : rows)
    if (r.size() != n)
      throw config_error("assignment matrix in " + path + " is not square");
  Eigen::MatrixXd m(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace qocsim
