#include "qocsim/pulse.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qocsim/errors.hpp"

namespace qocsim {

double FluxPulse::value_at(double t_ns) const {
  if (samples.empty() || t_ns < 0.0) return 0.0;
  const double pos = t_ns / dt;
  const auto i = static_cast<long>(pos);
  if (i >= static_cast<long>(samples.size()) - 1)
    return t_ns <= duration() ? samples.back() : 0.0;
  const double frac = pos - static_cast<double>(i);
  return samples[i] * (1.0 - frac) + samples[i + 1] * frac;
}

FluxPulse flat_top_gaussian(double amplitude, double tau_c, double tau_b,
                            double sigma, double dt) {
  if (tau_c < 0.0 || tau_b < 0.0) throw std::invalid_argument("negative pulse length");
  if (!(sigma > 0.0) || !(dt > 0.0)) throw std::invalid_argument("sigma and dt must be positive");
  FluxPulse p;
  p.amplitude = amplitude;
  p.tau_c = tau_c;
  p.tau_b = tau_b;
  p.sigma = sigma;
  p.dt = dt;
  const double tau = p.duration();
  const auto n = static_cast<long>(std::floor(tau / dt)) + 1;
  if (n < 2) throw std::invalid_argument("degenerate pulse: fewer than two samples");
  const double s = std::sqrt(2.0) * sigma;
  p.samples.resize(n);
  for (long k = 0; k < n; ++k) {
    const double t = k * dt;
    p.samples[k] = 0.5 * amplitude *
                   (std::erf((t - tau_b) / s) - std::erf((t - tau_c - tau_b) / s));
  }
  return p;
}

void TransferModel::validate() const {
  for (const auto& t : terms)
    if (!(t.tau > 0.0)) throw std::invalid_argument("settling time constants must be positive");
}

std::vector<double> step_response(const TransferModel& m, double duration, double dt) {
  m.validate();
  if (!(duration > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("duration and dt must be positive");
  const auto n = static_cast<long>(std::ceil(duration / dt));
  std::vector<double> s(n);
  for (long k = 0; k < n; ++k) {
    double v = 1.0;
    for (const auto& t : m.terms) v += t.amplitude * std::exp(-k * dt / t.tau);
    s[k] = m.gain * v;
  }
  return s;
}

std::vector<double> apply_transfer(const TransferModel& m,
                                   const std::vector<double>& x, double dt) {
  m.validate();
  const size_t nterms = m.terms.size();
  std::vector<double> pole(nterms), coeff(nterms), acc(nterms, 0.0);
  double direct = 1.0;
  for (size_t k = 0; k < nterms; ++k) {
    pole[k] = std::exp(-dt / m.terms[k].tau);
    coeff[k] = m.terms[k].amplitude * (pole[k] - 1.0);
    direct += m.terms[k].amplitude;
  }
  std::vector<double> y(x.size());
  double prev_x = 0.0;
  for (size_t n = 0; n < x.size(); ++n) {
    double v = direct * x[n];
    for (size_t k = 0; k < nterms; ++k) {
      acc[k] = prev_x + pole[k] * acc[k];
      v += coeff[k] * acc[k];
    }
    y[n] = m.gain * v;
    prev_x = x[n];
  }
  return y;
}

namespace {

// Pole-normalized discrete transfer function of the settling model in
// x = z^-1: f(x) = 1 + sum_k a_k (1 - x) / (1 - p_k x). The full transfer
// function is H(x) = gain * f(x); its zeros are the roots of f.
double settle_tf(const std::vector<double>& amps, const std::vector<double>& poles,
                 double x) {
  double f = 1.0;
  for (size_t k = 0; k < amps.size(); ++k)
    f += amps[k] * (1.0 - x) / (1.0 - poles[k] * x);
  return f;
}

double bisect_zero(const std::vector<double>& amps, const std::vector<double>& poles,
                   double lo, double hi, double flo) {
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((settle_tf(amps, poles, mid) > 0.0) == (flo > 0.0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FilterChain design_iir(const TransferModel& model, double dt) {
  model.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  for (const auto& t : model.terms)
    if (std::abs(t.amplitude) >= 1.0)
      throw model_error("settling amplitude |a_k| >= 1: step response may cross zero");

  FilterChain chain;
  chain.dt = dt;
  if (model.terms.empty()) {
    if (std::abs(model.gain - 1.0) > 1e-15)
      chain.sections.push_back({1.0 / model.gain, 0.0, 0.0});
    return chain;
  }

  // Terms sorted by descending time constant; the cascade inverts the
  // slowest settling component first.
  auto terms = model.terms;
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.tau > b.tau; });
  const size_t nk = terms.size();
  std::vector<double> poles(nk), amps(nk);
  for (size_t k = 0; k < nk; ++k) {
    poles[k] = std::exp(-dt / terms[k].tau);
    amps[k] = terms[k].amplitude;
  }

  // Zeros of H(x) = gain * (1 + sum_k a_k (1-x)/(1 - p_k x)) in x = z^-1.
  // H has simple real singularities at s_k = 1/p_k > 1; for settling terms
  // of equal sign the zeros are real and interlace them, one per interval
  // plus one beyond the largest s_k. Locating them by bisection on the
  // rational form avoids the badly conditioned polynomial expansion (the
  // p_k cluster tightly below 1 for slow settling).
  std::vector<double> sing(nk);
  for (size_t k = 0; k < nk; ++k) sing[k] = 1.0 / poles[k];
  std::sort(sing.begin(), sing.end());
  const double span = sing.back() - sing.front() + 1.0;
  std::vector<double> edges;
  edges.push_back(std::min(1.0, sing.front() - 0.5 * span));  // left of the cluster
  for (double s : sing) edges.push_back(s);
  edges.push_back(sing.back() + 64.0 * span);  // right tail; f -> 1 + sum a/p

  std::vector<double> xroots;
  const double margin = 1e-13;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    double lo = edges[i] + margin * edges[i];
    double hi = edges[i + 1] - margin * edges[i + 1];
    if (hi <= lo) continue;
    // Scan for sign changes inside the interval; near the singular ends
    // the function diverges, so sample densely toward them.
    constexpr int kScan = 128;
    double prev_x = lo;
    double prev_f = settle_tf(amps, poles, lo);
    for (int j = 1; j <= kScan; ++j) {
      const double u = static_cast<double>(j) / kScan;
      const double x = lo + (hi - lo) * u;
      const double f = settle_tf(amps, poles, x);
      if ((f > 0.0) != (prev_f > 0.0))
        xroots.push_back(bisect_zero(amps, poles, prev_x, x, prev_f));
      prev_x = x;
      prev_f = f;
    }
  }
  if (xroots.size() != nk)
    throw model_error("transfer model not invertible by stable real first-order "
                      "sections (found " + std::to_string(xroots.size()) +
                      " real zeros for " + std::to_string(nk) + " terms)");
  for (double x : xroots)
    if (std::abs(x) <= 1.0)
      throw model_error("transfer model zero inside the unit circle: unstable inverse");

  // Inverse cascade: H_inv(x) = 1/(gain*f(0)) * prod_k (1 - p_k x)/(1 - z_k x)
  // with z_k = 1/x_k. Descending z pairs with descending p.
  std::vector<double> zeros(nk);
  for (size_t k = 0; k < nk; ++k) zeros[k] = 1.0 / xroots[k];
  std::sort(zeros.begin(), zeros.end(), std::greater<>());

  const double dc_num = settle_tf(amps, poles, 0.0);  // 1 + sum a_k
  for (size_t k = 0; k < nk; ++k) {
    IirSection s;
    s.b0 = 1.0;
    s.b1 = -poles[k];
    s.a1 = zeros[k];
    if (k == 0) {
      const double g = 1.0 / (model.gain * dc_num);
      s.b0 *= g;
      s.b1 *= g;
    }
    chain.sections.push_back(s);
  }
  return chain;
}

std::vector<double> apply_chain(const FilterChain& chain, const std::vector<double>& x) {
  std::vector<double> y = x;
  for (const auto& s : chain.sections) {
    double prev_in = 0.0, prev_out = 0.0;
    for (double& v : y) {
      const double in = v;
      v = s.b0 * in + s.b1 * prev_in + s.a1 * prev_out;
      prev_in = in;
      prev_out = v;
    }
  }
  return y;
}

FluxPulse apply_chain(const FluxPulse& pulse, const FilterChain& chain) {
  if (std::abs(pulse.dt - chain.dt) > 1e-12)
    throw std::invalid_argument("sample period mismatch between pulse and filter chain");
  FluxPulse out = pulse;
  out.samples = apply_chain(chain, pulse.samples);
  return out;
}

}  // namespace qocsim
