#include "qocsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qocsim/constants.hpp"
#include "qocsim/errors.hpp"
#include "qocsim/operators.hpp"

namespace qocsim {

namespace {

constexpr FockLabel kComp[4] = {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}};

// Elementwise complex scaling of the rows of (yr, yi) by the unit phasor
// vector (cr, ci), then the real drive matrix, then the conjugate phasor:
// implements dY/dt = -i 2pi * e^{+iEt} W(t) e^{-iEt} Y with E in GHz and
// t in ns, split into real and imaginary parts.
//
// The drive W(t) is supplied in one of two forms:
//  - scalar mode: W(t) = lam(t) * w, with w the coupler potential in the
//    idle eigenbasis and lam the exact Josephson-energy excursion (used for
//    the full model, where the flux enters only through E_Jc);
//  - grid mode: W(t) interpolated from matrices precomputed on a uniform
//    flux grid (used for the reduced model, whose local basis and coupling
//    matrix elements change with flux).
struct Engine {
  Eigen::MatrixXd w;   // scalar mode: drive operator in the idle eigenbasis
  Eigen::VectorXd e;   // idle energies [GHz]

  std::vector<Eigen::MatrixXd> wgrid;  // grid mode: drive per flux point
  double grid_f0 = 0.0, grid_df = 0.0;

  mutable Eigen::MatrixXd ur, ui, vr, vi, wt;

  // Catmull-Rom interpolation of the drive matrix at the given flux; the
  // grid carries two pad points past each end so the stencil stays inside.
  const Eigen::MatrixXd& w_at(double flux) const {
    const double u = (flux - grid_f0) / grid_df;
    auto k = static_cast<long>(std::floor(u));
    k = std::clamp(k, 1L, static_cast<long>(wgrid.size()) - 3);
    const double x = u - static_cast<double>(k);
    const double c0 = 0.5 * x * ((2.0 - x) * x - 1.0);
    const double c1 = 0.5 * (x * x * (3.0 * x - 5.0) + 2.0);
    const double c2 = 0.5 * x * ((4.0 - 3.0 * x) * x + 1.0);
    const double c3 = 0.5 * x * x * (x - 1.0);
    wt = c0 * wgrid[k - 1] + c1 * wgrid[k] + c2 * wgrid[k + 1] + c3 * wgrid[k + 2];
    return wt;
  }

  void deriv(const Eigen::VectorXd& cr, const Eigen::VectorXd& ci, double s,
             const Eigen::MatrixXd& wmat,
             const Eigen::MatrixXd& yr, const Eigen::MatrixXd& yi,
             Eigen::MatrixXd& dr, Eigen::MatrixXd& di) const {
    ur = (yr.array().colwise() * cr.array() - yi.array().colwise() * ci.array()).matrix();
    ui = (yi.array().colwise() * cr.array() + yr.array().colwise() * ci.array()).matrix();
    vr.noalias() = wmat * ur;
    vi.noalias() = wmat * ui;
    dr = s * (vi.array().colwise() * cr.array() - vr.array().colwise() * ci.array()).matrix();
    di = -s * (vr.array().colwise() * cr.array() + vi.array().colwise() * ci.array()).matrix();
  }
};

void phasor_mul(Eigen::VectorXd& ar, Eigen::VectorXd& ai,
                const Eigen::VectorXd& br, const Eigen::VectorXd& bi) {
  const Eigen::ArrayXd tr = ar.array() * br.array() - ai.array() * bi.array();
  ai = (ar.array() * bi.array() + ai.array() * br.array()).matrix();
  ar = tr.matrix();
}

// Classical Runge-Kutta propagation of the columns (yr, yi) in the
// interaction picture of the idle Hamiltonian. Returns the final-time
// phasor exp(-i 2pi E T) so callers can return to the Schroedinger picture.
void integrate(const Engine& eng, const FluxPulse& pulse, double idle_flux,
               const DeviceParams& params, double ejc_idle, double step_ns,
               Eigen::MatrixXd& yr, Eigen::MatrixXd& yi,
               Eigen::VectorXd& fin_r, Eigen::VectorXd& fin_i) {
  const double t_total = pulse.duration();
  const long dim = eng.e.size();
  fin_r = Eigen::VectorXd::Ones(dim);
  fin_i = Eigen::VectorXd::Zero(dim);
  if (!(t_total > 0.0)) return;
  const long n_steps = std::max<long>(1, std::lround(t_total / step_ns));
  const double h = t_total / static_cast<double>(n_steps);

  const bool grid = !eng.wgrid.empty();
  auto scale_at = [&](double t) {
    if (grid) return kTwoPi;
    return kTwoPi * (coupler_ej_at_flux(params, idle_flux + pulse.value_at(t)) -
                     ejc_idle);
  };
  auto w_for = [&](double t) -> const Eigen::MatrixXd& {
    return grid ? eng.w_at(idle_flux + pulse.value_at(t)) : eng.w;
  };

  // exp(-i 2pi E h/2), advanced twice per step.
  Eigen::VectorXd pr(dim), pi(dim);
  for (long k = 0; k < dim; ++k) {
    const double ph = -kTwoPi * eng.e(k) * 0.5 * h;
    pr(k) = std::cos(ph);
    pi(k) = std::sin(ph);
  }
  Eigen::VectorXd c0r = fin_r, c0i = fin_i;  // phasor at t
  Eigen::VectorXd chr, chi, c1r, c1i;

  Eigen::MatrixXd k1r, k1i, k2r, k2i, k3r, k3i, k4r, k4i, tr, ti;
  for (long s = 0; s < n_steps; ++s) {
    const double t = static_cast<double>(s) * h;
    chr = c0r; chi = c0i; phasor_mul(chr, chi, pr, pi);
    c1r = chr; c1i = chi; phasor_mul(c1r, c1i, pr, pi);
    const double s0 = scale_at(t), sh = scale_at(t + 0.5 * h), s1 = scale_at(t + h);

    eng.deriv(c0r, c0i, s0, w_for(t), yr, yi, k1r, k1i);
    tr = yr + 0.5 * h * k1r; ti = yi + 0.5 * h * k1i;
    const Eigen::MatrixXd& wh = w_for(t + 0.5 * h);
    eng.deriv(chr, chi, sh, wh, tr, ti, k2r, k2i);
    tr = yr + 0.5 * h * k2r; ti = yi + 0.5 * h * k2i;
    eng.deriv(chr, chi, sh, wh, tr, ti, k3r, k3i);
    tr = yr + h * k3r; ti = yi + h * k3i;
    eng.deriv(c1r, c1i, s1, w_for(t + h), tr, ti, k4r, k4i);

    yr += (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    yi += (h / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
    c0r = c1r; c0i = c1i;
  }
  fin_r = c0r;
  fin_i = c0i;
}

PropagationResult run_once(const DeviceParams& params, const FluxPulse& pulse,
                           const SolverOptions& opt, double step_ns) {
  const bool full = opt.frame == Frame::kFull;
  const HamiltonianModel m =
      full ? build_hamiltonian(params, params.idle_flux)
           : build_rwa_hamiltonian(params, params.idle_flux);
  const auto tracked = default_tracked_labels();
  const auto labels = label_states(m, tracked);
  const int dim = m.dim();
  const double ejc_idle = m.ej(2);

  Engine eng;
  eng.e = m.energies;
  if (full) {
    // Drive operator: the coupler Josephson potential in the fixed idle
    // basis, so H(t) = H_idle + [E_Jc(t) - E_Jc(idle)] * P, rotated into
    // the idle eigenbasis. Exact: the flux enters only through E_Jc.
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m.n, m.n);
    const Eigen::MatrixXd p_bare = kron3(id, id, m.coupler_potential);
    eng.w.noalias() = m.eigenvectors.transpose() * p_bare * m.eigenvectors;
  } else {
    // The reduced model's local basis and coupling matrix elements change
    // with flux, so a fixed-basis drive misplaces the coupler excursion.
    // Instead the flux-resolved model family is precomputed on a uniform
    // grid spanning the pulse range (local eigenstates identified across
    // flux by their index), and H(t) - H_idle is interpolated in flux.
    double lo = 0.0, hi = 0.0;
    for (double v : pulse.samples) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double fmin = params.idle_flux + lo;
    const double span = std::max(params.idle_flux + hi - fmin, 1e-9);
    const int n_interior = 257;
    eng.grid_df = span / (n_interior - 1);
    eng.grid_f0 = fmin - 2.0 * eng.grid_df;
    const Eigen::MatrixXd h_idle =
        m.hamiltonian - m.e_ground * Eigen::MatrixXd::Identity(dim, dim);
    for (int k = 0; k < n_interior + 4; ++k) {
      const double f = eng.grid_f0 + k * eng.grid_df;
      const HamiltonianModel mk = build_rwa_hamiltonian(params, f, m.n);
      const Eigen::MatrixXd d =
          mk.hamiltonian - mk.e_ground * Eigen::MatrixXd::Identity(dim, dim) -
          h_idle;
      eng.wgrid.emplace_back(m.eigenvectors.transpose() * d * m.eigenvectors);
    }
  }

  // Initial columns: the four labeled computational eigenstates, or the
  // full identity when the whole propagator is requested.
  const int ncols = opt.full_propagator ? dim : 4;
  Eigen::MatrixXd yr = Eigen::MatrixXd::Zero(dim, ncols);
  Eigen::MatrixXd yi = Eigen::MatrixXd::Zero(dim, ncols);
  std::array<int, 4> comp_idx{};
  for (int c = 0; c < 4; ++c) comp_idx[c] = labels.at(kComp[c]);
  if (opt.full_propagator) {
    yr.setIdentity();
  } else {
    for (int c = 0; c < 4; ++c) yr(comp_idx[c], c) = 1.0;
  }

  Eigen::VectorXd fin_r, fin_i;
  integrate(eng, pulse, params.idle_flux, params, ejc_idle, step_ns, yr, yi,
            fin_r, fin_i);

  // Back to the Schroedinger picture, then into the reporting frame that
  // rotates each labeled state at the sum of its constituent idle dressed
  // frequencies (the |11> row keeps the static ZZ phase).
  const double t_total = std::max(pulse.duration(), 0.0);
  const double w1 = m.energies(labels.at({1, 0, 0}));
  const double w2 = m.energies(labels.at({0, 1, 0}));
  const double wc = m.energies(labels.at({0, 0, 1}));
  auto frame_freq = [&](const FockLabel& l) {
    return l.n1 * w1 + l.n2 * w2 + l.nc * wc;
  };

  PropagationResult out;
  out.frame = opt.frame;
  out.step_ns = step_ns;
  out.n_fock = m.n;
  auto framed_amp = [&](const FockLabel& l, int col) {
    const int k = labels.at(l);
    const std::complex<double> fin(fin_r(k), fin_i(k));
    const std::complex<double> psi(yr(k, col), yi(k, col));
    const double om = kTwoPi * frame_freq(l) * t_total;
    return std::exp(std::complex<double>(0.0, om)) * fin * psi;
  };
  auto col_of = [&](int c) { return opt.full_propagator ? comp_idx[c] : c; };
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.block(r, c) = framed_amp(kComp[r], col_of(c));
  for (const auto& l : tracked) {
    const bool comp = std::find(std::begin(kComp), std::end(kComp), l) != std::end(kComp);
    if (!comp) out.leak_labels.push_back(l);
  }
  out.leak_pops.resize(static_cast<long>(out.leak_labels.size()), 4);
  for (size_t r = 0; r < out.leak_labels.size(); ++r) {
    const int k = labels.at(out.leak_labels[r]);
    for (int c = 0; c < 4; ++c) {
      const double re = yr(k, col_of(c)), im = yi(k, col_of(c));
      out.leak_pops(static_cast<long>(r), c) = re * re + im * im;
    }
  }
  for (int c = 0; c < 4; ++c) {
    double p_comp = 0.0;
    for (int r = 0; r < 4; ++r) p_comp += std::norm(out.block(r, c));
    out.leakage(c) = 1.0 - p_comp;
  }
  if (opt.full_propagator) {
    out.propagator.resize(dim, dim);
    for (int r = 0; r < dim; ++r) {
      const std::complex<double> fin(fin_r(r), fin_i(r));
      for (int c = 0; c < dim; ++c)
        out.propagator(r, c) = fin * std::complex<double>(yr(r, c), yi(r, c));
    }
    out.unitarity_defect =
        (out.propagator.adjoint() * out.propagator -
         Eigen::MatrixXcd::Identity(dim, dim)).norm();
  }
  return out;
}

double wrap_pi(double x) { return std::remainder(x, kTwoPi); }

// Nearest-branch unwrapping of a phase series against a running linear
// prediction; `series` holds wrapped values on entry, unwrapped on exit.
void unwrap_series(const std::vector<double>& x, std::vector<double>& series,
                   const std::vector<bool>& ok) {
  double prev_x = 0.0, prev_v = 0.0, slope = 0.0;
  bool have_prev = false, have_slope = false;
  for (size_t i = 0; i < series.size(); ++i) {
    if (!ok[i]) continue;
    if (have_prev) {
      const double pred = prev_v + (have_slope ? slope * (x[i] - prev_x) : 0.0);
      series[i] += kTwoPi * std::round((pred - series[i]) / kTwoPi);
      if (x[i] != prev_x) {
        slope = (series[i] - prev_v) / (x[i] - prev_x);
        have_slope = true;
      }
    }
    prev_x = x[i];
    prev_v = series[i];
    have_prev = true;
  }
}

}  // namespace

PropagationResult time_evolve(const DeviceParams& params, const FluxPulse& pulse,
                              const SolverOptions& opt) {
  if (!(opt.step_ns > 0.0)) throw std::invalid_argument("step must be positive");
  PropagationResult res = run_once(params, pulse, opt, opt.step_ns);
  if (opt.convergence_check) {
    PropagationResult fine = run_once(params, pulse, opt, 0.5 * opt.step_ns);
    const double delta = (fine.block - res.block).cwiseAbs().maxCoeff();
    if (delta > opt.convergence_tol)
      throw convergence_error(
          "step-halving changed the computational block by " +
          std::to_string(delta) + " (tolerance " +
          std::to_string(opt.convergence_tol) + "); reduce the step");
    fine.convergence_delta = delta;
    fine.step_ns = opt.step_ns;
    return fine;
  }
  return res;
}

PhaseReport conditional_phase(const Eigen::Matrix4cd& u) {
  std::array<double, 4> ph{};
  for (int k = 0; k < 4; ++k) {
    if (std::abs(u(k, k)) < 0.1)
      throw phase_error("diagonal element " + std::to_string(k) +
                        " has magnitude below 0.1: phase undefined");
    ph[k] = std::arg(u(k, k));
  }
  PhaseReport rep;
  rep.phi_c = wrap_pi(ph[3] - ph[2] - ph[1] + ph[0]);
  rep.theta1 = wrap_pi(ph[2] - ph[0]);
  rep.theta2 = wrap_pi(ph[1] - ph[0]);
  for (int c = 0; c < 4; ++c) {
    double p = 0.0;
    for (int r = 0; r < 4; ++r) p += std::norm(u(r, c));
    rep.max_leakage = std::max(rep.max_leakage, 1.0 - p);
  }
  // Undo the single-qubit Z rotations and the global phase, then compare
  // against the ideal controlled-phase gate.
  Eigen::Matrix4cd corr = u;
  const double g = ph[0];
  const std::array<double, 4> zph = {g, g + rep.theta2, g + rep.theta1,
                                     g + rep.theta1 + rep.theta2};
  for (int r = 0; r < 4; ++r)
    corr.row(r) *= std::exp(std::complex<double>(0.0, -zph[r]));
  Eigen::Matrix4cd ideal = Eigen::Matrix4cd::Identity();
  ideal(3, 3) = std::exp(std::complex<double>(0.0, rep.phi_c));
  rep.cphase_distance = (corr - ideal).norm();
  return rep;
}

PhaseReport conditional_phase(const PropagationResult& result) {
  for (int c = 0; c < 4; ++c)
    if (result.leakage(c) > 0.2)
      throw phase_error("leakage above 20% for a computational state: "
                        "conditional phase not meaningful");
  return conditional_phase(result.block);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (n < 2) return f;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.valid = true;
  return f;
}

FluxPulse gate_pulse(const DeviceParams& params, double plateau_flux_phi0,
                     double tau, double tau_b, double sigma, double dt) {
  if (tau < 2.0 * tau_b)
    throw std::invalid_argument("total pulse length shorter than the buffers");
  return flat_top_gaussian(plateau_flux_phi0 - params.idle_flux,
                           tau - 2.0 * tau_b, tau_b, sigma, dt);
}

PhaseSweep phase_vs_length(const DeviceParams& params, double amplitude,
                           const std::vector<double>& taus,
                           const SolverOptions& opt, double tau_b, double sigma,
                           double fit_min_tau) {
  std::vector<double> sorted = taus;
  std::sort(sorted.begin(), sorted.end());
  PhaseSweep sweep;
  sweep.fit_min_tau = fit_min_tau;
  std::vector<double> raw_phi, raw_t1, raw_t2;
  std::vector<bool> ok;
  for (double tau : sorted) {
    PhasePoint pt;
    pt.tau = tau;
    try {
      const FluxPulse pulse = gate_pulse(params, amplitude, tau, tau_b, sigma);
      const PropagationResult res = time_evolve(params, pulse, opt);
      const PhaseReport rep = conditional_phase(res);
      pt.phi_c = rep.phi_c;
      pt.theta1 = rep.theta1;
      pt.theta2 = rep.theta2;
      pt.leakage = rep.max_leakage;
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    raw_phi.push_back(pt.phi_c);
    raw_t1.push_back(pt.theta1);
    raw_t2.push_back(pt.theta2);
    ok.push_back(pt.ok);
    sweep.points.push_back(pt);
  }
  // phi_c accumulates monotonically; seed its branch in [0, 2pi) at the
  // shortest length, then follow by continuity. The dynamic phases start
  // on the principal branch.
  for (size_t i = 0; i < raw_phi.size(); ++i) {
    if (ok[i]) {
      if (raw_phi[i] < 0.0) raw_phi[i] += kTwoPi;
      break;
    }
  }
  std::vector<double> xs;
  for (const auto& p : sweep.points) xs.push_back(p.tau);
  unwrap_series(xs, raw_phi, ok);
  unwrap_series(xs, raw_t1, ok);
  unwrap_series(xs, raw_t2, ok);
  for (size_t i = 0; i < sweep.points.size(); ++i) {
    if (!ok[i]) continue;
    sweep.points[i].phi_c = raw_phi[i];
    sweep.points[i].theta1 = raw_t1[i];
    sweep.points[i].theta2 = raw_t2[i];
  }
  std::vector<double> fx, fy;
  for (const auto& p : sweep.points)
    if (p.ok && p.tau >= fit_min_tau) {
      fx.push_back(p.tau);
      fy.push_back(p.phi_c);
    }
  if (fx.size() < 2) {
    fx.clear();
    fy.clear();
    for (const auto& p : sweep.points)
      if (p.ok) {
        fx.push_back(p.tau);
        fy.push_back(p.phi_c);
      }
  }
  sweep.fit = fit_line(fx, fy);
  return sweep;
}

std::vector<LeakagePoint> leakage_sweep(const DeviceParams& params,
                                        const std::vector<double>& amplitudes,
                                        const std::vector<double>& taus,
                                        const SolverOptions& opt, double tau_b,
                                        double sigma) {
  std::vector<LeakagePoint> out;
  for (double amp : amplitudes) {
    LeakagePoint pt;
    pt.amplitude = amp;
    std::vector<double> pls;
    std::map<FockLabel, double> sums;
    for (double tau : taus) {
      try {
        const FluxPulse pulse = gate_pulse(params, amp, tau, tau_b, sigma);
        const PropagationResult res = time_evolve(params, pulse, opt);
        pls.push_back(res.leakage.mean());  // subspace-averaged
        for (size_t r = 0; r < res.leak_labels.size(); ++r)
          sums[res.leak_labels[r]] +=
              res.leak_pops.row(static_cast<long>(r)).mean();
      } catch (const std::exception&) {
        // flagged by n_ok < taus.size()
      }
    }
    pt.n_ok = static_cast<int>(pls.size());
    if (!pls.empty()) {
      pt.mean = std::accumulate(pls.begin(), pls.end(), 0.0) / pls.size();
      double ss = 0.0;
      for (double v : pls) ss += (v - pt.mean) * (v - pt.mean);
      pt.stdev = pls.size() > 1 ? std::sqrt(ss / (pls.size() - 1)) : 0.0;
      for (auto& [l, s] : sums) pt.state_means[l] = s / pls.size();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

DynamicPhaseFit dynamic_phase_linearity(const DeviceParams& params,
                                        double amplitude,
                                        const std::vector<double>& taus,
                                        const SolverOptions& opt, double tau_b,
                                        double sigma) {
  DynamicPhaseFit out;
  out.sweep = phase_vs_length(params, amplitude, taus, opt, tau_b, sigma,
                              /*fit_min_tau=*/0.0);
  std::vector<double> phi, t1, t2;
  for (const auto& p : out.sweep.points) {
    if (!p.ok) continue;
    phi.push_back(p.phi_c);
    t1.push_back(p.theta1);
    t2.push_back(p.theta2);
  }
  out.q1 = fit_line(phi, t1);
  out.q2 = fit_line(phi, t2);
  return out;
}

}  // namespace qocsim
