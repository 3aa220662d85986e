#include "qocsim/rb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qocsim/errors.hpp"
#include "qocsim/fit.hpp"

namespace qocsim {

namespace {

constexpr int kComp9[4] = {0, 1, 3, 4};
constexpr double kZz9[4] = {1.0, -1.0, -1.0, 1.0};  // |00>,|01>,|10>,|11>

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RbSequence rb_sequence(int n_c, std::uint64_t seed, const CliffordGroup& group,
                       int interleaved) {
  if (n_c < 0) throw std::invalid_argument("sequence length must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, group.order() - 1);
  RbSequence seq;
  int net = group.identity();
  for (int k = 0; k < n_c; ++k) {
    const int g = pick(rng);
    seq.gates.push_back(g);
    // Gates act on the state in sequence order, so the new gate's matrix
    // multiplies from the left.
    net = group.compose(g, net);
    if (interleaved >= 0) net = group.compose(interleaved, net);
  }
  seq.recovery = group.inverse(net);
  return seq;
}

RBResult run_rb(const Channel& noise, const RbOptions& opt,
                const Channel* interleaved_noise) {
  if (noise.dim != 9) throw std::invalid_argument("run_rb expects dim-9 channels");
  noise.validate();
  const Channel& inoise = interleaved_noise ? *interleaved_noise : noise;
  if (opt.interleaved >= 0) inoise.validate();
  const auto& group = clifford_group();

  // Per-Clifford step channels (ideal unitary then noise), cached lazily.
  std::vector<Channel> step(group.order());
  std::vector<bool> have(group.order(), false);
  auto step_of = [&](int g) -> const Channel& {
    if (!have[g]) {
      step[g] = compose(unitary_channel(embed_two_qubit(group.matrix(g))), noise);
      have[g] = true;
    }
    return step[g];
  };
  Channel istep;
  if (opt.interleaved >= 0)
    istep = compose(unitary_channel(embed_two_qubit(group.matrix(opt.interleaved))),
                    inoise);

  Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(9, 9);
  rho0(0, 0) = 1.0;  // |00>

  RBResult out;
  std::uint64_t seq_counter = 0;
  for (int n_c : opt.lengths) {
    std::vector<double> zz_s, lk_s;
    for (int rep = 0; rep < opt.randomizations; ++rep) {
      const std::uint64_t sseed = mix_seed(opt.seed, seq_counter++);
      const RbSequence seq = rb_sequence(n_c, sseed, group, opt.interleaved);
      Eigen::MatrixXcd rho = rho0;
      for (int g : seq.gates) {
        rho = step_of(g).apply(rho);
        if (opt.interleaved >= 0) rho = istep.apply(rho);
      }
      rho = step_of(seq.recovery).apply(rho);

      double zz = 0.0, leak = 1.0;
      if (opt.shots <= 0) {
        for (int k = 0; k < 4; ++k) {
          const double p = rho(kComp9[k], kComp9[k]).real();
          zz += kZz9[k] * p;
          leak -= p;
        }
      } else {
        std::array<double, 9> probs{};
        for (int k = 0; k < 9; ++k) probs[k] = std::max(rho(k, k).real(), 0.0);
        std::mt19937_64 rng(mix_seed(sseed, 0xabcdULL));
        std::discrete_distribution<int> draw(probs.begin(), probs.end());
        int n_leak = 0;
        double zz_sum = 0.0;
        for (int s = 0; s < opt.shots; ++s) {
          const int o = draw(rng);
          const auto it = std::find(std::begin(kComp9), std::end(kComp9), o);
          if (it == std::end(kComp9)) {
            ++n_leak;
          } else {
            zz_sum += kZz9[it - std::begin(kComp9)];
          }
        }
        zz = zz_sum / opt.shots;
        leak = static_cast<double>(n_leak) / opt.shots;
      }
      zz_s.push_back(zz);
      lk_s.push_back(std::max(leak, 0.0));
    }
    auto stats = [](const std::vector<double>& v) {
      const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      const double sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
      return std::pair<double, double>(m, sd / std::sqrt(double(v.size())));
    };
    const auto [zm, ze] = stats(zz_s);
    const auto [lm, le] = stats(lk_s);
    out.lengths.push_back(n_c);
    out.zz_mean.push_back(zm);
    out.zz_err.push_back(ze);
    out.leak_mean.push_back(lm);
    out.leak_err.push_back(le);
  }

  try {
    out.fit = fit_decay(out.lengths, out.zz_mean, out.zz_err);
  } catch (const fit_error&) {
    // left zeroed; caller inspects fit.r == 0
  }
  try {
    out.leak_fit = fit_leakage(out.lengths, out.leak_mean);
  } catch (const fit_error&) {
  }
  return out;
}

DecayFit fit_decay(const std::vector<int>& lengths,
                   const std::vector<double>& means,
                   const std::vector<double>& errors) {
  if (lengths.size() != means.size())
    throw std::invalid_argument("fit_decay: size mismatch");
  if (lengths.size() < 3) throw fit_error("fit_decay: need at least 3 lengths");
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  if (*hi - *lo < 1e-12)
    throw fit_error("fit_decay: constant data, decay rate unidentifiable");

  std::vector<double> x(lengths.begin(), lengths.end());
  // Initial guesses: B = min, A = span, r from the two-point log slope.
  double r0 = 0.95;
  {
    const size_t i = 0, j = means.size() - 1;
    const double num = means[j] - *lo + 1e-6, den = means[i] - *lo + 1e-6;
    if (num > 0.0 && den > num && x[j] > x[i])
      r0 = std::clamp(std::pow(num / den, 1.0 / (x[j] - x[i])), 0.2, 0.999999);
  }
  Eigen::VectorXd p0(3);
  p0 << *hi - *lo, *lo, r0;
  const ModelFn model = [](double n, const Eigen::VectorXd& p) {
    return p(0) * std::pow(std::abs(p(2)), n) + p(1);
  };
  std::vector<double> sig = errors;
  for (double& s : sig) s = std::max(s, 1e-6);  // avoid infinite weights
  const FitResult res = fit_curve(model, x, means, sig, p0);
  DecayFit fit;
  fit.a = res.params(0);
  fit.b = res.params(1);
  fit.r = std::abs(res.params(2));
  fit.r_err = std::sqrt(std::max(res.covariance(2, 2), 0.0));
  fit.chi2 = res.chi2;
  return fit;
}

LeakageFit fit_leakage(const std::vector<int>& lengths,
                       const std::vector<double>& means) {
  if (lengths.size() != means.size())
    throw std::invalid_argument("fit_leakage: size mismatch");
  if (lengths.size() < 3) throw fit_error("fit_leakage: need at least 3 lengths");
  std::vector<double> x(lengths.begin(), lengths.end());
  const double top = *std::max_element(means.begin(), means.end());
  if (top < 1e-12) {
    // No observable leakage: the saturating model degenerates; report zero.
    LeakageFit fit;
    fit.lam = 1.0;
    return fit;
  }
  Eigen::VectorXd p0(2);
  p0 << std::max(top, 1e-4), 0.98;
  const ModelFn model = [](double n, const Eigen::VectorXd& p) {
    return p(0) * (1.0 - std::pow(std::clamp(p(1), 0.0, 1.0), n));
  };
  const FitResult res = fit_curve(model, x, means, {}, p0);
  LeakageFit fit;
  fit.p_inf = res.params(0);
  fit.lam = std::clamp(res.params(1), 0.0, 1.0);
  fit.per_step = fit.p_inf * (1.0 - fit.lam);
  return fit;
}

double irb_fidelity(double r_rb, double r_irb) {
  if (!(r_rb > 0.0) || !(r_irb > 0.0))
    throw std::invalid_argument("decay parameters must be positive");
  return 1.0 - 0.75 * (1.0 - r_irb / r_rb);
}

}  // namespace qocsim
