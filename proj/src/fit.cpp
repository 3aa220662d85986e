#include "qocsim/fit.hpp"

#include <cmath>
#include <stdexcept>

#include "qocsim/errors.hpp"

namespace qocsim {

namespace {

Eigen::VectorXd residuals(const ModelFn& f, const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<double>& w,
                          const Eigen::VectorXd& p) {
  Eigen::VectorXd r(static_cast<long>(x.size()));
  for (size_t i = 0; i < x.size(); ++i)
    r(static_cast<long>(i)) = w[i] * (y[i] - f(x[i], p));
  return r;
}

}  // namespace

FitResult fit_curve(const ModelFn& f, const std::vector<double>& x,
                    const std::vector<double>& y,
                    const std::vector<double>& sigma,
                    const Eigen::VectorXd& p0, int max_iter) {
  const size_t n = x.size();
  const long np = p0.size();
  if (n != y.size()) throw std::invalid_argument("fit_curve: size mismatch");
  if (!sigma.empty() && sigma.size() != n)
    throw std::invalid_argument("fit_curve: sigma size mismatch");
  if (static_cast<long>(n) < np)
    throw fit_error("fit_curve: fewer points than parameters");

  std::vector<double> w(n, 1.0);
  for (size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw std::invalid_argument("fit_curve: sigma <= 0");
    w[i] = 1.0 / sigma[i];
  }

  Eigen::VectorXd p = p0;
  Eigen::VectorXd r = residuals(f, x, y, w, p);
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;
  Eigen::MatrixXd jt_j;
  FitResult out;

  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    // Forward-difference Jacobian of the weighted residuals.
    Eigen::MatrixXd jac(static_cast<long>(n), np);
    for (long k = 0; k < np; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(p(k)));
      Eigen::VectorXd pk = p;
      pk(k) += h;
      jac.col(k) = (residuals(f, x, y, w, pk) - r) / h;
    }
    jt_j = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14 * std::max(1.0, chi2)) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd a = jt_j;
      a.diagonal().array() += lambda * jt_j.diagonal().array().max(1e-12);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      if (ldlt.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd dp = ldlt.solve(-g);
      const Eigen::VectorXd pn = p + dp;
      const Eigen::VectorXd rn = residuals(f, x, y, w, pn);
      const double chi2n = rn.squaredNorm();
      if (chi2n <= chi2) {
        const double gain = chi2 - chi2n;
        p = pn;
        r = rn;
        chi2 = chi2n;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (gain < 1e-12 * std::max(1.0, chi2) &&
            dp.lpNorm<Eigen::Infinity>() <
                1e-10 * std::max(1.0, p.lpNorm<Eigen::Infinity>()))
          out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No downhill step found: treat the current point as a (possibly
      // flat) minimum if the gradient is already tiny.
      out.converged = g.lpNorm<Eigen::Infinity>() < 1e-8;
      break;
    }
    if (out.converged) break;
  }

  if (!out.converged)
    throw fit_error("fit_curve: no convergence after " +
                    std::to_string(out.iterations) + " iterations (chi2 " +
                    std::to_string(chi2) + ")");
  out.params = p;
  out.chi2 = chi2;
  // Covariance from the Gauss-Newton normal matrix; pseudo-inverse guards
  // against flat directions.
  out.covariance = jt_j.completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

}  // namespace qocsim
