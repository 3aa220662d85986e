// qocsim: desk-scale simulator and characterization toolkit for a
// two-qubit transmon processor with a flux-tunable coupler.
//
// Exit codes: 0 success, 2 invalid configuration or arguments,
// 3 numerical failure (convergence, labeling, fitting, unreachable target).

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qocsim/config.hpp"
#include "qocsim/constants.hpp"
#include "qocsim/dynamics.hpp"
#include "qocsim/errors.hpp"
#include "qocsim/readout.hpp"
#include "qocsim/recipes.hpp"

namespace {

using namespace qocsim;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

struct Common {
  std::string config;
  std::string transfer;
  std::string out = "out";
  std::uint64_t seed = 1;
  std::string frame = "rwa";
  bool predistort = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "device config JSON (default: built-in)");
  cmd->add_option("--transfer", c.transfer,
                  "flux-line transfer model JSON (default: built-in)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "random seed recorded in all outputs");
  cmd->add_option("--frame", c.frame, "propagation model: full | rwa")
      ->check(CLI::IsMember({"full", "rwa"}));
  cmd->add_flag("--predistort", c.predistort,
                "apply the IIR predistortion chain to the pulse");
}

ExperimentRecipe base_recipe(const Common& c, const std::string& name) {
  ExperimentRecipe r;
  r.name = name;
  r.device_config = c.config;
  r.transfer_config = c.transfer;
  r.out_dir = c.out;
  r.seed = c.seed;
  r.frame = c.frame == "full" ? Frame::kFull : Frame::kRwa;
  r.predistort = c.predistort;
  return r;
}

void report(const ArtifactBundle& bundle) {
  for (const auto& f : bundle.files) std::cout << f << '\n';
}

int run_mitigate(const std::string& matrix_path, const std::string& probs_path) {
  const Eigen::MatrixXd m = load_assignment_csv(matrix_path);
  std::ifstream in(probs_path);
  if (!in) throw config_error("cannot open probabilities file: " + probs_path);
  std::vector<double> vals;
  std::string cell;
  while (std::getline(in, cell, ',')) {
    std::stringstream ss(cell);
    double v;
    while (ss >> v) vals.push_back(v);
  }
  if (static_cast<long>(vals.size()) != m.rows())
    throw config_error("expected " + std::to_string(m.rows()) +
                       " probabilities, got " + std::to_string(vals.size()));
  Eigen::VectorXd p(m.rows());
  for (long i = 0; i < m.rows(); ++i) p(i) = vals[i];
  const MitigationResult res = readout_correct(m, p);
  std::printf("# state,raw,projected\n");
  for (long i = 0; i < res.raw.size(); ++i)
    std::printf("%ld,%.10g,%.10g\n", i, res.raw(i), res.projected(i));
  std::printf("# condition=%.6g ill_conditioned=%d projection_applied=%d\n",
              res.condition, int(res.ill_conditioned),
              int(res.projection_applied));
  return 0;
}

int run_simulate_cz(const Common& c, double amplitude, double tau, double tau_b,
                    double sigma) {
  const DeviceParams params =
      c.config.empty() ? reference_device() : load_device(c.config);
  FluxPulse pulse = gate_pulse(params, amplitude, tau, tau_b, sigma);
  if (c.predistort) {
    const TransferModel model =
        c.transfer.empty() ? reference_transfer() : load_transfer(c.transfer);
    pulse = apply_chain(pulse, design_iir(model, pulse.dt));
  }
  SolverOptions opt;
  opt.frame = c.frame == "full" ? Frame::kFull : Frame::kRwa;
  const PropagationResult res = time_evolve(params, pulse, opt);
  const PhaseReport rep = conditional_phase(res);

  std::filesystem::create_directories(c.out);
  const std::string wf = c.out + "/waveform.csv";
  std::ofstream wout(wf);
  wout << "t_ns,flux_phi0\n";
  for (size_t i = 0; i < pulse.samples.size(); ++i)
    wout << i * pulse.dt << ',' << pulse.samples[i] << '\n';
  std::printf("phi_c_rad=%.10g\n", rep.phi_c);
  std::printf("theta1_rad=%.10g theta2_rad=%.10g\n", rep.theta1, rep.theta2);
  std::printf("max_leakage=%.6g unitarity_defect=%.3g\n", rep.max_leakage,
              res.unitarity_defect);
  std::printf("waveform=%s\n", wf.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-qubit tunable-coupler processor simulator"};
  app.require_subcommand(1);

  Common c;
  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "static spectrum vs coupler flux");
  double fmin = 0.0, fmax = 0.45;
  int fpoints = 200;
  add_common(spectrum, c);
  spectrum->add_option("--flux-min", fmin);
  spectrum->add_option("--flux-max", fmax);
  spectrum->add_option("--points", fpoints);

  // sweep-phase / sweep-leakage
  std::vector<double> amplitudes, taus, phases;
  auto* sweep_phase =
      app.add_subcommand("sweep-phase", "conditional phase vs pulse length");
  add_common(sweep_phase, c);
  sweep_phase->add_option("--amplitude", amplitudes, "plateau flux [Phi_0]")
      ->required();
  sweep_phase->add_option("--tau", taus, "total pulse lengths [ns]")->required();

  auto* sweep_leak =
      app.add_subcommand("sweep-leakage", "leakage vs pulse amplitude");
  add_common(sweep_leak, c);
  sweep_leak->add_option("--amplitude", amplitudes, "plateau fluxes [Phi_0]")
      ->required();
  sweep_leak->add_option("--tau", taus, "total pulse lengths [ns]")->required();

  // cz-calibrate
  auto* calibrate =
      app.add_subcommand("cz-calibrate", "pulse length for a target phase");
  double cal_amp = 0.37;
  add_common(calibrate, c);
  calibrate->add_option("--amplitude", cal_amp, "plateau flux [Phi_0]");
  calibrate->add_option("--phase", phases,
                        "target phases [rad] (default: pi..3pi)");

  // qpt
  auto* qpt_cmd = app.add_subcommand("qpt", "process tomography of simulated gates");
  int shots = 0;
  add_common(qpt_cmd, c);
  qpt_cmd->add_option("--amplitude", cal_amp, "plateau flux [Phi_0]");
  qpt_cmd->add_option("--phase", phases, "target phases [rad]");
  qpt_cmd->add_option("--shots", shots, "shots per expectation (0: exact)");

  // rb / irb
  auto add_rb_opts = [&](CLI::App* cmd, std::vector<int>& lengths, int& rand,
                         double& dep, double& leak) {
    add_common(cmd, c);
    cmd->add_option("--lengths", lengths, "sequence lengths");
    cmd->add_option("--randomizations", rand, "sequences per length");
    cmd->add_option("--shots", shots, "shots per sequence (0: exact)");
    cmd->add_option("--depolarizing", dep, "per-step depolarizing probability");
    cmd->add_option("--leakage", leak, "per-step leakage exchange probability");
  };
  std::vector<int> rb_lengths = {1, 5, 10, 20, 40, 80};
  int randomizations = 30;
  double noise_dep = 0.02, noise_leak = 0.0014;
  auto* rb_cmd = app.add_subcommand("rb", "randomized benchmarking (synthetic noise)");
  add_rb_opts(rb_cmd, rb_lengths, randomizations, noise_dep, noise_leak);
  auto* irb_cmd =
      app.add_subcommand("irb", "interleaved randomized benchmarking (CZ)");
  add_rb_opts(irb_cmd, rb_lengths, randomizations, noise_dep, noise_leak);

  // mitigate
  auto* mitigate = app.add_subcommand("mitigate", "readout error mitigation");
  std::string matrix_path, probs_path;
  mitigate->add_option("--matrix", matrix_path, "assignment matrix CSV")->required();
  mitigate->add_option("--input", probs_path, "measured probabilities CSV")->required();

  // simulate-cz
  auto* sim = app.add_subcommand("simulate-cz", "propagate a single gate pulse");
  double sim_amp = 0.37, sim_tau = 42.0, sim_tau_b = 12.0,
         sim_sigma = kDefaultSigmaNs;
  add_common(sim, c);
  sim->add_option("--amplitude", sim_amp, "plateau flux [Phi_0]");
  sim->add_option("--tau", sim_tau, "total pulse length [ns]");
  sim->add_option("--tau-b", sim_tau_b, "buffer length [ns]");
  sim->add_option("--sigma", sim_sigma, "filter width [ns]");

  // predistort-check
  auto* pdc = app.add_subcommand("predistort-check",
                                 "transfer model inversion diagnostics");
  add_common(pdc, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (spectrum->parsed()) {
      ExperimentRecipe r = base_recipe(c, "spectrum");
      r.amplitudes = linspace(fmin, fmax, fpoints);
      report(run_recipe(r));
    } else if (sweep_phase->parsed() || sweep_leak->parsed()) {
      ExperimentRecipe r =
          base_recipe(c, sweep_phase->parsed() ? "phase-sweep" : "leakage-sweep");
      r.amplitudes = amplitudes;
      r.taus = taus;
      report(run_recipe(r));
    } else if (calibrate->parsed() || qpt_cmd->parsed()) {
      ExperimentRecipe r =
          base_recipe(c, calibrate->parsed() ? "cz-calibrate" : "qpt");
      r.amplitudes = {cal_amp};
      r.target_phases = phases.empty()
                            ? std::vector<double>{kPi, 1.5 * kPi, 2.0 * kPi,
                                                  2.5 * kPi, 3.0 * kPi}
                            : phases;
      r.shots = shots;
      report(run_recipe(r));
    } else if (rb_cmd->parsed() || irb_cmd->parsed()) {
      ExperimentRecipe r = base_recipe(c, rb_cmd->parsed() ? "rb" : "irb");
      r.rb_lengths = rb_lengths;
      r.randomizations = randomizations;
      r.shots = shots;
      r.noise_depolarizing = noise_dep;
      r.noise_leakage = noise_leak;
      report(run_recipe(r));
    } else if (mitigate->parsed()) {
      return run_mitigate(matrix_path, probs_path);
    } else if (sim->parsed()) {
      return run_simulate_cz(c, sim_amp, sim_tau, sim_tau_b, sim_sigma);
    } else if (pdc->parsed()) {
      report(run_recipe(base_recipe(c, "predistort-check")));
    }
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
