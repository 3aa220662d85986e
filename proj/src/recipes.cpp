#include "qocsim/recipes.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "qocsim/constants.hpp"
#include "qocsim/errors.hpp"
#include "qocsim/qpt.hpp"
#include "qocsim/rb.hpp"

namespace qocsim {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int env_threads() {
  const char* s = std::getenv("QOCSIM_THREADS");
  if (!s) return 1;
  const int n = std::atoi(s);
  return n > 0 ? n : 1;
}

// Fans indices 0..n-1 out to at most `threads` workers; results must be
// written to per-index slots so aggregation order does not matter.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int nw = std::min(std::max(threads, 1), n);
  if (nw <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mx;
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mx);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct Writer {
  std::vector<std::string> files;
  fs::path dir;

  void csv(const std::string& name, const std::string& header,
           const std::vector<std::string>& rows) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    if (!out) throw config_error("cannot write " + p.string());
    out << header << '\n';
    for (const auto& r : rows) out << r << '\n';
    if (!out) throw config_error("write failed: " + p.string());
    files.push_back(p.string());
  }
  void text(const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    if (!out) throw config_error("cannot write " + p.string());
    out << body << '\n';
    if (!out) throw config_error("write failed: " + p.string());
    files.push_back(p.string());
  }
};

constexpr double kCalTolRad = 0.2 * kPi / 180.0;  // 0.2 degrees

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Eigen::Matrix4cd cphase_unitary(double phi) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  u(3, 3) = std::exp(std::complex<double>(0.0, phi));
  return u;
}

double cz_calibrate(const DeviceParams& params, double target_phase_rad,
                    double amplitude, const SolverOptions& options,
                    double tau_b, double sigma) {
  const double tau_min = 2.0 * tau_b;
  double slope = 0.0;
  bool have_slope = false;
  double prev_tau = 0.0, prev_phi = 0.0;
  bool have_prev = false;

  auto phi_at = [&](double tau) {
    const FluxPulse pulse = gate_pulse(params, amplitude, tau, tau_b, sigma);
    const PhaseReport rep = conditional_phase(time_evolve(params, pulse, options));
    double phi = rep.phi_c;
    if (!have_prev) {
      // seed the branch in [0, 2 pi)
      phi -= kTwoPi * std::floor(phi / kTwoPi);
    } else {
      const double pred =
          prev_phi + (have_slope ? slope * (tau - prev_tau) : 0.0);
      phi += kTwoPi * std::round((pred - phi) / kTwoPi);
      if (tau != prev_tau) {
        slope = (phi - prev_phi) / (tau - prev_tau);
        have_slope = true;
      }
    }
    prev_tau = tau;
    prev_phi = phi;
    have_prev = true;
    return phi;
  };

  // Coarse scan in 4 ns steps: the phase advances well under half a turn
  // per step for in-range amplitudes, so nearest-branch unwrapping is safe.
  double lo = tau_min, phi_lo = phi_at(tau_min);
  if (std::abs(phi_lo - target_phase_rad) <= kCalTolRad) return lo;
  if (phi_lo > target_phase_rad)
    throw range_error("target phase below the minimal-pulse phase");
  double hi = lo, phi_hi = phi_lo;
  while (phi_hi < target_phase_rad) {
    if (hi >= 200.0)
      throw range_error("target phase not reached within tau = 200 ns");
    lo = hi;
    phi_lo = phi_hi;
    hi = std::min(hi + 4.0, 200.0);
    phi_hi = phi_at(hi);
  }

  // Bisection with the branch pinned to the bracket's interpolation.
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    // keep the unwrapping prediction anchored inside the bracket
    prev_tau = lo;
    prev_phi = phi_lo;
    slope = (phi_hi - phi_lo) / std::max(hi - lo, 1e-12);
    have_slope = true;
    const double phi_mid = phi_at(mid);
    if (std::abs(phi_mid - target_phase_rad) <= kCalTolRad) return mid;
    if (phi_mid < target_phase_rad) {
      lo = mid;
      phi_lo = phi_mid;
    } else {
      hi = mid;
      phi_hi = phi_mid;
    }
    if (hi - lo < 1e-4) break;
  }
  return 0.5 * (lo + hi);
}

SimulatedGate simulate_gate_channel(const DeviceParams& params,
                                    double amplitude, double tau,
                                    const SolverOptions& options, double tau_b,
                                    double sigma) {
  SolverOptions opt = options;
  opt.full_propagator = true;
  const FluxPulse pulse = gate_pulse(params, amplitude, tau, tau_b, sigma);
  const PropagationResult res = time_evolve(params, pulse, opt);

  // Idle model matching the solver's, for labels and frame frequencies.
  const HamiltonianModel m =
      opt.frame == Frame::kRwa
          ? build_rwa_hamiltonian(params, params.idle_flux, 3)
          : build_hamiltonian(params, params.idle_flux);
  std::vector<FockLabel> two_qutrit;
  for (int n1 = 0; n1 < 3; ++n1)
    for (int n2 = 0; n2 < 3; ++n2) two_qutrit.push_back({n1, n2, 0});
  const auto labels = label_states(m, two_qutrit);
  const double w1 = m.energies(labels.at({1, 0, 0}));
  const double w2 = m.energies(labels.at({0, 1, 0}));

  // Rotating frame removing the idle dressed single-qubit frequencies,
  // then virtual-Z removal of the accumulated single-qubit phases.
  const PhaseReport rep = conditional_phase(res);
  const double g0 = std::arg(res.block(0, 0));
  const double t_total = pulse.duration();
  Eigen::MatrixXcd k(9, 9);
  for (int r = 0; r < 9; ++r) {
    const FockLabel& lr = two_qutrit[r];
    const double frame_phase =
        kTwoPi * (lr.n1 * w1 + lr.n2 * w2) * t_total -
        (g0 + lr.n1 * rep.theta1 + lr.n2 * rep.theta2);
    const std::complex<double> ph = std::exp(std::complex<double>(0.0, frame_phase));
    for (int c = 0; c < 9; ++c)
      k(r, c) = ph * res.propagator(labels.at(lr), labels.at(two_qutrit[c]));
  }

  SimulatedGate gate;
  gate.channel.dim = 9;
  gate.channel.superop.resize(81, 81);
  // single Kraus operator: vec(K rho K^dag) = (conj(K) (x) K) vec(rho)
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      gate.channel.superop.block(9 * i, 9 * j, 9, 9) = std::conj(k(i, j)) * k;
  gate.phi_c = rep.phi_c;
  gate.max_leakage = res.leakage.maxCoeff();
  gate.tau = tau;
  return gate;
}

namespace {

struct LoadedInputs {
  DeviceParams device;
  TransferModel transfer;
  std::string hash_text;
};

LoadedInputs load_inputs(const ExperimentRecipe& r) {
  LoadedInputs in;
  if (r.device_config.empty()) {
    in.device = reference_device();
  } else {
    if (!fs::exists(r.device_config))
      throw config_error("device config not found: " + r.device_config);
    in.device = load_device(r.device_config);
  }
  if (r.transfer_config.empty()) {
    in.transfer = reference_transfer();
  } else {
    if (!fs::exists(r.transfer_config))
      throw config_error("transfer config not found: " + r.transfer_config);
    in.transfer = load_transfer(r.transfer_config);
  }
  in.hash_text = device_to_json(in.device) + pulse_to_json(r.pulse) +
                 transfer_to_json(in.transfer) + r.name + fmt(double(r.seed)) +
                 fmt(double(r.shots)) + fmt(double(r.randomizations)) +
                 (r.frame == Frame::kRwa ? "rwa" : "full");
  for (double v : r.amplitudes) in.hash_text += ',' + fmt(v);
  for (double v : r.taus) in.hash_text += ',' + fmt(v);
  for (double v : r.target_phases) in.hash_text += ',' + fmt(v);
  return in;
}

void need_grid(const std::vector<double>& g, const char* what) {
  if (g.empty()) throw config_error(std::string("recipe needs a non-empty ") + what);
}

SolverOptions recipe_solver(const ExperimentRecipe& r) {
  SolverOptions opt;
  opt.frame = r.frame;
  // Convergence is audited separately; the sweeps run single-step.
  opt.convergence_check = false;
  return opt;
}

void run_spectrum(const ExperimentRecipe& r, const LoadedInputs& in, Writer& w) {
  need_grid(r.amplitudes, "flux grid (amplitudes)");
  const auto pts = spectrum_sweep(in.device, r.amplitudes);
  std::vector<std::string> rows;
  for (const auto& p : pts)
    rows.push_back(fmt(p.flux_phi0) + ',' + fmt(p.omega_c_ghz) + ',' +
                   fmt(p.alpha_zz_mhz) + ',' + fmt(p.j_mhz) + ',' +
                   (p.label_ok ? "1" : "0"));
  w.csv("spectrum.csv", "flux_phi0,omega_c_GHz,alpha_zz_MHz,J_MHz,label_ok", rows);
}

void run_phase_sweep(const ExperimentRecipe& r, const LoadedInputs& in,
                     Writer& w, int threads) {
  need_grid(r.amplitudes, "amplitude grid");
  need_grid(r.taus, "tau grid");
  const SolverOptions opt = recipe_solver(r);
  std::vector<PhaseSweep> sweeps(r.amplitudes.size());
  parallel_for(static_cast<int>(r.amplitudes.size()), threads, [&](int i) {
    sweeps[i] = phase_vs_length(in.device, r.amplitudes[i], r.taus, opt,
                                r.pulse.tau_b, r.pulse.sigma);
  });
  std::vector<std::string> rows;
  json fits = json::array();
  for (size_t i = 0; i < sweeps.size(); ++i) {
    for (const auto& p : sweeps[i].points)
      rows.push_back(fmt(r.amplitudes[i]) + ',' + fmt(p.tau) + ',' +
                     fmt(p.phi_c) + ',' + fmt(p.theta1) + ',' + fmt(p.theta2) +
                     ',' + fmt(p.leakage) + ',' + (p.ok ? "1" : "0"));
    fits.push_back({{"amplitude", r.amplitudes[i]},
                    {"slope_rad_per_ns", sweeps[i].fit.slope},
                    {"intercept_rad", sweeps[i].fit.intercept},
                    {"r2", sweeps[i].fit.r2},
                    {"valid", sweeps[i].fit.valid}});
  }
  w.csv("phase_sweep.csv",
        "amplitude_phi0,tau_ns,phi_c_rad,theta1_rad,theta2_rad,leakage,ok",
        rows);
  w.text("phase_fits.json", fits.dump(2));
}

void run_leakage_sweep(const ExperimentRecipe& r, const LoadedInputs& in,
                       Writer& w, int threads) {
  need_grid(r.amplitudes, "amplitude grid");
  need_grid(r.taus, "tau grid");
  const SolverOptions opt = recipe_solver(r);
  std::vector<LeakagePoint> pts(r.amplitudes.size());
  parallel_for(static_cast<int>(r.amplitudes.size()), threads, [&](int i) {
    pts[i] = leakage_sweep(in.device, {r.amplitudes[i]}, r.taus, opt,
                           r.pulse.tau_b, r.pulse.sigma)[0];
  });
  std::vector<std::string> rows;
  for (const auto& p : pts)
    rows.push_back(fmt(p.amplitude) + ',' + fmt(p.mean) + ',' + fmt(p.stdev) +
                   ',' + std::to_string(p.n_ok));
  w.csv("leakage_sweep.csv", "amplitude_phi0,p_leak_mean,p_leak_std,n_ok", rows);
}

void run_cz_calibrate(const ExperimentRecipe& r, const LoadedInputs& in,
                      Writer& w) {
  need_grid(r.target_phases, "target phase list");
  const double amplitude =
      r.amplitudes.empty() ? r.pulse.amplitude : r.amplitudes[0];
  const SolverOptions opt = recipe_solver(r);
  std::vector<std::string> rows;
  for (double phi : r.target_phases) {
    const double tau =
        cz_calibrate(in.device, phi, amplitude, opt, r.pulse.tau_b, r.pulse.sigma);
    rows.push_back(fmt(amplitude) + ',' + fmt(phi) + ',' + fmt(tau));
  }
  w.csv("cz_calibration.csv", "amplitude_phi0,target_phase_rad,tau_ns", rows);
}

void run_qpt(const ExperimentRecipe& r, const LoadedInputs& in, Writer& w) {
  need_grid(r.target_phases, "target phase list");
  const double amplitude =
      r.amplitudes.empty() ? r.pulse.amplitude : r.amplitudes[0];
  const SolverOptions opt = recipe_solver(r);
  json summary = json::array();
  for (size_t k = 0; k < r.target_phases.size(); ++k) {
    const double phi = r.target_phases[k];
    const double tau =
        cz_calibrate(in.device, phi, amplitude, opt, r.pulse.tau_b, r.pulse.sigma);
    const SimulatedGate gate = simulate_gate_channel(in.device, amplitude, tau,
                                                     opt, r.pulse.tau_b,
                                                     r.pulse.sigma);
    QptOptions qo;
    qo.shots = r.shots;
    qo.seed = r.seed + k;
    const ProcessMatrix pm = qpt(gate.channel, qo);
    const double f = fidelity_avg(pm, cphase_unitary(phi));
    std::vector<std::string> rows;
    for (int i = 0; i < 16; ++i) {
      std::string row = fmt(pm.ptm(i, 0));
      for (int j = 1; j < 16; ++j) row += ',' + fmt(pm.ptm(i, j));
      rows.push_back(row);
    }
    char name[48];
    std::snprintf(name, sizeof name, "ptm_%02zu.csv", k);
    w.csv(name, "# rows/cols: two-qubit Pauli index 4*a+b, I X Y Z", rows);
    summary.push_back({{"target_phase_rad", phi},
                       {"tau_ns", tau},
                       {"phi_c_sim_rad", gate.phi_c},
                       {"max_leakage", gate.max_leakage},
                       {"F_avg", f},
                       {"tp_residual", pm.tp_residual},
                       {"cp_floor", pm.choi_floor},
                       {"shots", r.shots}});
  }
  w.text("qpt_summary.json", summary.dump(2));
}

void run_rb_recipe(const ExperimentRecipe& r, const LoadedInputs&, Writer& w,
                   bool interleaved) {
  if (r.rb_lengths.empty()) throw config_error("recipe needs RB sequence lengths");
  Channel noise = compose(depolarizing(r.noise_depolarizing, 9),
                          compose(leakage_exchange(r.noise_leakage, 0),
                                  leakage_exchange(r.noise_leakage, 1)));
  RbOptions opt;
  opt.lengths = r.rb_lengths;
  opt.randomizations = r.randomizations;
  opt.seed = r.seed;
  opt.shots = r.shots;
  const RBResult rb = run_rb(noise, opt);

  auto emit = [&](const char* name, const RBResult& res) {
    std::vector<std::string> rows;
    for (size_t i = 0; i < res.lengths.size(); ++i)
      rows.push_back(std::to_string(res.lengths[i]) + ',' +
                     fmt(res.zz_mean[i]) + ',' + fmt(res.zz_err[i]) + ',' +
                     fmt(res.leak_mean[i]) + ',' + fmt(res.leak_err[i]));
    w.csv(name, "N_c,mean,stderr,p_leak,p_leak_err", rows);
  };
  emit("rb.csv", rb);
  json fits;
  fits["rb"] = {{"a", rb.fit.a},       {"b", rb.fit.b},
                {"r", rb.fit.r},       {"r_err", rb.fit.r_err},
                {"p_inf", rb.leak_fit.p_inf},
                {"leak_per_step", rb.leak_fit.per_step}};
  if (interleaved) {
    const auto& group = clifford_group();
    const int cz = group.index_of(cphase_unitary(kPi));
    if (cz < 0) throw model_error("CZ not found in the Clifford group");
    RbOptions iopt = opt;
    iopt.interleaved = cz;
    iopt.seed = r.seed + 1;
    const RBResult irb = run_rb(noise, iopt);
    emit("irb.csv", irb);
    fits["irb"] = {{"a", irb.fit.a},
                   {"b", irb.fit.b},
                   {"r", irb.fit.r},
                   {"r_err", irb.fit.r_err},
                   {"p_inf", irb.leak_fit.p_inf},
                   {"leak_per_step", irb.leak_fit.per_step}};
    fits["F_interleaved"] = irb_fidelity(rb.fit.r, irb.fit.r);
  }
  w.text(interleaved ? "irb_fits.json" : "rb_fits.json", fits.dump(2));
}

void run_predistort_check(const ExperimentRecipe& r, const LoadedInputs& in,
                          Writer& w) {
  const double dt = 1.0 / r.pulse.sample_rate_gsa;
  const FilterChain chain = design_iir(in.transfer, dt);
  // Cover three times the longest settling constant.
  double tmax = 0.0;
  for (const auto& t : in.transfer.terms) tmax = std::max(tmax, t.tau);
  const double duration = 3.0 * tmax;
  const int n = static_cast<int>(duration / dt);
  std::vector<double> step(n, 1.0);
  const std::vector<double> raw = apply_transfer(in.transfer, step, dt);
  const std::vector<double> corrected =
      apply_transfer(in.transfer, apply_chain(chain, step), dt);
  const double settled = corrected.back();
  double flatness = 0.0;
  for (int i = 5; i < n; ++i)
    flatness = std::max(flatness, std::abs(corrected[i] / settled - 1.0));
  std::vector<std::string> rows;
  for (int i = 0; i < n; ++i)
    rows.push_back(fmt(i * dt) + ',' + fmt(raw[i]) + ',' + fmt(corrected[i]));
  w.csv("predistort_step.csv", "t_ns,raw_response,corrected_response", rows);
  json summary = {{"flatness_after_5_samples", flatness},
                  {"settled_level", settled},
                  {"gain", in.transfer.gain},
                  {"sections", chain.sections.size()}};
  w.text("predistort_summary.json", summary.dump(2));
}

}  // namespace

ArtifactBundle run_recipe(const ExperimentRecipe& recipe) {
  const auto t0 = std::chrono::steady_clock::now();
  static const char* kNames[] = {"spectrum",     "phase-sweep", "leakage-sweep",
                                 "cz-calibrate", "qpt",         "rb",
                                 "irb",          "predistort-check"};
  bool known = false;
  for (const char* n : kNames) known = known || recipe.name == n;
  if (!known) throw config_error("unknown recipe: " + recipe.name);
  if (recipe.out_dir.empty()) throw config_error("recipe needs an output directory");

  const LoadedInputs in = load_inputs(recipe);
  const int threads = env_threads();

  // Validate the grids the recipe will use before creating any file.
  if (recipe.name == "spectrum") need_grid(recipe.amplitudes, "flux grid");
  if (recipe.name == "phase-sweep" || recipe.name == "leakage-sweep") {
    need_grid(recipe.amplitudes, "amplitude grid");
    need_grid(recipe.taus, "tau grid");
  }
  if (recipe.name == "cz-calibrate" || recipe.name == "qpt")
    need_grid(recipe.target_phases, "target phase list");
  if ((recipe.name == "rb" || recipe.name == "irb") && recipe.rb_lengths.empty())
    throw config_error("recipe needs RB sequence lengths");

  fs::create_directories(recipe.out_dir);
  Writer w;
  w.dir = recipe.out_dir;

  if (recipe.name == "spectrum") run_spectrum(recipe, in, w);
  else if (recipe.name == "phase-sweep") run_phase_sweep(recipe, in, w, threads);
  else if (recipe.name == "leakage-sweep") run_leakage_sweep(recipe, in, w, threads);
  else if (recipe.name == "cz-calibrate") run_cz_calibrate(recipe, in, w);
  else if (recipe.name == "qpt") run_qpt(recipe, in, w);
  else if (recipe.name == "rb") run_rb_recipe(recipe, in, w, false);
  else if (recipe.name == "irb") run_rb_recipe(recipe, in, w, true);
  else run_predistort_check(recipe, in, w);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(in.hash_text)));
  json manifest = {{"tool_version", kToolVersion},
                   {"schema_version", kOutputSchemaVersion},
                   {"recipe", recipe.name},
                   {"config_hash", hash},
                   {"seed", recipe.seed},
                   {"threads", threads},
                   {"wall_time_s", wall},
                   {"outputs", w.files}};
  w.text("manifest.json", manifest.dump(2));

  ArtifactBundle bundle;
  bundle.files = w.files;
  bundle.manifest_path = w.files.back();
  return bundle;
}

}  // namespace qocsim
