#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "qocsim/config.hpp"
#include "qocsim/constants.hpp"
#include "qocsim/errors.hpp"
#include "qocsim/recipes.hpp"

using namespace qocsim;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qocsim_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("device config survives a save/load round trip") {
  const DeviceParams p = reference_device();
  const fs::path dir = fresh_dir("device_rt");
  fs::create_directories(dir);
  const std::string path = (dir / "device.json").string();
  save_device(p, path);
  const DeviceParams q = load_device(path);
  CHECK(q.c_s1 == doctest::Approx(p.c_s1).epsilon(1e-12));
  CHECK(q.c_12 == doctest::Approx(p.c_12).epsilon(1e-12));
  CHECK(q.c_1c == doctest::Approx(p.c_1c).epsilon(1e-12));
  CHECK(q.e_j1 == doctest::Approx(p.e_j1).epsilon(1e-12));
  CHECK(q.e_jc == doctest::Approx(p.e_jc).epsilon(1e-12));
  CHECK(q.r == doctest::Approx(p.r).epsilon(1e-12));
  CHECK(q.idle_flux == doctest::Approx(p.idle_flux).epsilon(1e-12));
  CHECK(q.n_fock == p.n_fock);
  CHECK((q.flux_crosstalk - p.flux_crosstalk).cwiseAbs().maxCoeff() < 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("pulse, transfer and filter-chain configs round trip") {
  PulseConfig pc;
  pc.amplitude = 0.37;
  pc.tau = 42.0;
  const PulseConfig pc2 = pulse_from_json(pulse_to_json(pc));
  CHECK(pc2.amplitude == doctest::Approx(pc.amplitude));
  CHECK(pc2.tau == doctest::Approx(pc.tau));
  CHECK(pc2.tau_b == doctest::Approx(pc.tau_b));
  CHECK(pc2.sigma == doctest::Approx(pc.sigma));

  const TransferModel m = reference_transfer();
  const TransferModel m2 = transfer_from_json(transfer_to_json(m));
  REQUIRE(m2.terms.size() == m.terms.size());
  CHECK(m2.gain == doctest::Approx(m.gain));
  for (size_t i = 0; i < m.terms.size(); ++i) {
    CHECK(m2.terms[i].amplitude == doctest::Approx(m.terms[i].amplitude));
    CHECK(m2.terms[i].tau == doctest::Approx(m.terms[i].tau));
  }

  const FilterChain chain = design_iir(m, 1.0 / kDefaultSampleRateGsa);
  const FilterChain chain2 = chain_from_json(chain_to_json(chain));
  REQUIRE(chain2.sections.size() == chain.sections.size());
  CHECK(chain2.dt == doctest::Approx(chain.dt).epsilon(1e-15));
  for (size_t i = 0; i < chain.sections.size(); ++i) {
    CHECK(chain2.sections[i].b0 == doctest::Approx(chain.sections[i].b0).epsilon(1e-15));
    CHECK(chain2.sections[i].b1 == doctest::Approx(chain.sections[i].b1).epsilon(1e-15));
    CHECK(chain2.sections[i].a1 == doctest::Approx(chain.sections[i].a1).epsilon(1e-15));
  }
}

TEST_CASE("malformed config input raises config errors") {
  CHECK_THROWS_AS(device_from_json("not json at all"), config_error);
  CHECK_THROWS_AS(device_from_json("{}"), config_error);
  CHECK_THROWS_AS(device_from_json(R"({"C_s1": "eighty"})"), config_error);
  CHECK_THROWS_AS(pulse_from_json("[1,2,3]"), config_error);
  CHECK_THROWS_AS(transfer_from_json(R"({"gain": 0.98})"), config_error);
  CHECK_THROWS_AS(load_device("/nonexistent/device.json"), config_error);
}

TEST_CASE("the built-in reference device hits its calibration anchors") {
  const DeviceParams p = reference_device();
  CHECK_NOTHROW(p.validate());
  CHECK(coupler_frequency(p, p.idle_flux) == doctest::Approx(7.612).epsilon(1e-4));
  // the flux axis is calibrated so the labeled gate point is exact
  CHECK(p.flux_crosstalk(2, 2) * 0.37 == doctest::Approx(0.378).epsilon(1e-9));
}

TEST_CASE("pulse configs build the waveform they describe") {
  PulseConfig pc;
  pc.amplitude = 0.3;
  pc.tau = 40.0;
  const FluxPulse pulse = pc.build();
  CHECK(pulse.duration() == doctest::Approx(pc.tau));
  CHECK(pulse.value_at(pc.tau / 2.0) == doctest::Approx(pc.amplitude).epsilon(1e-2));
  CHECK(pulse.dt == doctest::Approx(1.0 / pc.sample_rate_gsa));
}

TEST_CASE("invalid recipes are rejected before any file is written") {
  ExperimentRecipe r;
  r.name = "no-such-recipe";
  r.out_dir = fresh_dir("invalid_recipe").string();
  CHECK_THROWS_AS(run_recipe(r), config_error);
  CHECK(!fs::exists(r.out_dir));

  r.name = "spectrum";  // valid name, but the flux grid is empty
  CHECK_THROWS_AS(run_recipe(r), config_error);
  CHECK(!fs::exists(r.out_dir));

  r.amplitudes = {0.1};
  r.out_dir.clear();
  CHECK_THROWS_AS(run_recipe(r), config_error);

  r.name = "cz-calibrate";  // needs target phases
  r.out_dir = fresh_dir("invalid_recipe").string();
  CHECK_THROWS_AS(run_recipe(r), config_error);
  CHECK(!fs::exists(r.out_dir));
}

TEST_CASE("the spectrum recipe writes a well-formed CSV and manifest") {
  ExperimentRecipe r;
  r.name = "spectrum";
  r.amplitudes = {0.0, 0.15, 0.3};
  r.seed = 7;
  const fs::path dir = fresh_dir("spectrum_recipe");
  r.out_dir = dir.string();
  const ArtifactBundle bundle = run_recipe(r);
  REQUIRE(bundle.files.size() == 2);
  CHECK(fs::path(bundle.manifest_path).filename() == "manifest.json");

  const std::string csv = slurp(dir / "spectrum.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "flux_phi0,omega_c_GHz,alpha_zz_MHz,J_MHz,label_ok");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) {
      ++rows;
      CHECK(line.back() == '1');  // all three points label cleanly
    }
  CHECK(rows == 3);

  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("tool_version").get<std::string>() == kToolVersion);
  CHECK(manifest.at("schema_version").get<int>() == kOutputSchemaVersion);
  CHECK(manifest.at("recipe").get<std::string>() == "spectrum");
  CHECK(manifest.at("seed").get<std::uint64_t>() == 7);
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  // the outputs list covers everything written except the manifest itself
  CHECK(manifest.at("outputs").size() == bundle.files.size() - 1);
  CHECK(manifest.at("outputs")[0].get<std::string>() ==
        (dir / "spectrum.csv").string());
  fs::remove_all(dir);
}

TEST_CASE("recipes are deterministic in the seed") {
  ExperimentRecipe r;
  r.name = "rb";
  r.rb_lengths = {1, 2, 4, 8};
  r.randomizations = 3;
  r.shots = 200;
  r.seed = 99;
  const fs::path d1 = fresh_dir("rb_det_1"), d2 = fresh_dir("rb_det_2");
  r.out_dir = d1.string();
  run_recipe(r);
  r.out_dir = d2.string();
  run_recipe(r);
  CHECK(slurp(d1 / "rb.csv") == slurp(d2 / "rb.csv"));
  CHECK(slurp(d1 / "rb_fits.json") == slurp(d2 / "rb_fits.json"));

  r.seed = 100;  // a different seed changes the sampled data
  const fs::path d3 = fresh_dir("rb_det_3");
  r.out_dir = d3.string();
  run_recipe(r);
  CHECK(slurp(d1 / "rb.csv") != slurp(d3 / "rb.csv"));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("gate calibration is monotone in the target phase") {
  const DeviceParams p = reference_device();
  SolverOptions opt;
  opt.frame = Frame::kRwa;
  opt.convergence_check = false;
  const double t1 = cz_calibrate(p, kPi / 2.0, 0.37, opt);
  const double t2 = cz_calibrate(p, kPi, 0.37, opt);
  const double t3 = cz_calibrate(p, 1.5 * kPi, 0.37, opt);
  CHECK(t1 < t2);
  CHECK(t2 < t3);
  CHECK(t2 == doctest::Approx(42.5).epsilon(0.05));
}

TEST_CASE("unreachable calibration targets raise a range error") {
  const DeviceParams p = reference_device();
  SolverOptions opt;
  opt.frame = Frame::kRwa;
  opt.convergence_check = false;
  // near-idle amplitude: the residual ZZ rate cannot reach pi by 200 ns
  CHECK_THROWS_AS(cz_calibrate(p, kPi, 0.02, opt), qocsim::range_error);
}

TEST_CASE("the simulated gate channel is physical and hits its phase") {
  const DeviceParams p = reference_device();
  SolverOptions opt;
  opt.frame = Frame::kRwa;
  opt.convergence_check = false;
  const SimulatedGate gate = simulate_gate_channel(p, 0.37, 42.5, opt);
  CHECK(gate.channel.dim == 9);
  CHECK_NOTHROW(gate.channel.validate());
  double phi = gate.phi_c;
  phi -= kTwoPi * std::round((phi - kPi) / kTwoPi);
  CHECK(phi == doctest::Approx(kPi).epsilon(0.02));
  CHECK(gate.max_leakage < 0.02);
  // trace retained on a computational preparation = 1 - leakage
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(9, 9);
  rho(4, 4) = 1.0;  // |11>
  const double kept = gate.channel.apply(rho).trace().real();
  CHECK(kept <= 1.0 + 1e-9);
  CHECK(kept >= 1.0 - gate.max_leakage - 1e-6);
}

TEST_CASE("conditional-phase target unitaries") {
  CHECK(cphase_unitary(0.0).isApprox(Eigen::Matrix4cd::Identity(), 1e-15));
  Eigen::Matrix4cd cz = Eigen::Matrix4cd::Identity();
  cz(3, 3) = -1.0;
  CHECK(cphase_unitary(kPi).isApprox(cz, 1e-12));
}

TEST_CASE("content hash matches the FNV-1a reference vectors") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}
