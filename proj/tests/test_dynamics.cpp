#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "qocsim/config.hpp"
#include "qocsim/constants.hpp"
#include "qocsim/device.hpp"
#include "qocsim/dynamics.hpp"
#include "qocsim/errors.hpp"

using namespace qocsim;

namespace {

SolverOptions rwa_opts(bool check = false) {
  SolverOptions o;
  o.frame = Frame::kRwa;
  o.convergence_check = check;
  return o;
}

// Static cross-Kerr rate [GHz] of the reduced model, computed directly
// from its labeled eigenenergies -- the oracle for the reduced-frame
// dynamic phase accumulation.
double rwa_alpha_zz_ghz(const DeviceParams& p, double flux) {
  const HamiltonianModel m = build_rwa_hamiltonian(p, flux, 3);
  const auto labels = label_states(
      m, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  return level_energy(m, labels, {1, 1, 0}) -
         level_energy(m, labels, {1, 0, 0}) -
         level_energy(m, labels, {0, 1, 0});
}

}  // namespace

TEST_CASE("conditional phase formula: closed-form unitaries") {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  PhaseReport rep = conditional_phase(u);
  CHECK(rep.phi_c == doctest::Approx(0.0));
  CHECK(rep.theta1 == doctest::Approx(0.0));
  CHECK(rep.theta2 == doctest::Approx(0.0));

  u(3, 3) = -1.0;  // ideal CZ
  rep = conditional_phase(u);
  CHECK(std::abs(rep.phi_c) == doctest::Approx(kPi));
  CHECK(rep.cphase_distance < 1e-12);

  // Z (x) I on qubit 1: phi_c invariant, theta1 shifts by pi
  Eigen::Matrix4cd z1 = Eigen::Matrix4cd::Identity();
  z1(2, 2) = -1.0;
  z1(3, 3) = -1.0;
  rep = conditional_phase((z1 * u).eval());
  CHECK(std::abs(rep.phi_c) == doctest::Approx(kPi));
  CHECK(std::abs(rep.theta1) == doctest::Approx(kPi));
}

TEST_CASE("conditional phase is exactly invariant under single-qubit Z") {
  // a generic phase-diagonal unitary with small off-diagonal dirt
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  u(0, 0) = std::polar(1.0, 0.13);
  u(1, 1) = std::polar(0.99, -0.74);
  u(2, 2) = std::polar(0.98, 2.11);
  u(3, 3) = std::polar(0.97, 1.02);
  const PhaseReport base = conditional_phase(u);
  for (double a : {0.3, -1.2}) {
    for (double b : {0.9, 2.4}) {
      Eigen::Matrix4cd z = Eigen::Matrix4cd::Zero();
      z(0, 0) = 1.0;
      z(1, 1) = std::polar(1.0, b);
      z(2, 2) = std::polar(1.0, a);
      z(3, 3) = std::polar(1.0, a + b);
      const PhaseReport rep = conditional_phase((z * u).eval());
      CHECK(rep.phi_c == doctest::Approx(base.phi_c).epsilon(1e-12));
    }
  }
}

TEST_CASE("near-vanishing diagonal raises a phase error") {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  u(1, 1) = 0.05;
  CHECK_THROWS_AS(conditional_phase(u), phase_error);
}

TEST_CASE("a pulse parked at the idle bias accumulates only the idle ZZ phase") {
  const DeviceParams p = reference_device();
  const double tau = 40.0;

  SUBCASE("reduced frame") {
    const PropagationResult res =
        time_evolve(p, gate_pulse(p, p.idle_flux, tau), rwa_opts(true));
    const PhaseReport rep = conditional_phase(res);
    // U = exp(-i 2 pi H t), so phi_c = -2 pi alpha_zz tau
    const double want = -kTwoPi * rwa_alpha_zz_ghz(p, p.idle_flux) * tau;
    CHECK(rep.phi_c == doctest::Approx(want).epsilon(0.01));
    CHECK(rep.max_leakage < 1e-4);
    CHECK(std::abs(rep.theta1) < 1e-3);
    CHECK(std::abs(rep.theta2) < 1e-3);
  }

  SUBCASE("full frame") {
    SolverOptions o;
    o.frame = Frame::kFull;
    o.step_ns = 0.02;  // zero excursion: the interaction picture is exact
    const PropagationResult res =
        time_evolve(p, gate_pulse(p, p.idle_flux, tau), o);
    const PhaseReport rep = conditional_phase(res);
    const double want = -kTwoPi * 1e-3 * alpha_zz(p, p.idle_flux) * tau;
    CHECK(rep.phi_c == doctest::Approx(want).epsilon(0.01));
    CHECK(rep.max_leakage < 1e-4);
  }
}

TEST_CASE("propagator restricted to the computational block is consistent") {
  const DeviceParams p = reference_device();
  SolverOptions o = rwa_opts();
  o.full_propagator = true;
  o.step_ns = 0.0005;
  const PropagationResult res = time_evolve(p, gate_pulse(p, 0.37, 42.0), o);
  CHECK(res.unitarity_defect < 1e-8);
  for (int c = 0; c < 4; ++c) {
    const double n2 = res.block.col(c).squaredNorm();
    CHECK(n2 <= 1.0 + 1e-9);
    CHECK(res.leakage(c) == doctest::Approx(1.0 - n2).epsilon(1e-9));
    CHECK(res.leakage(c) >= -1e-9);
  }
  // the tracked states account for nearly all of the leaked population
  for (int c = 0; c < 4; ++c)
    CHECK(res.leak_pops.col(c).sum() >= res.leakage(c) - 1e-3);
}

TEST_CASE("plateau extension adds the static plateau ZZ phase (reduced)") {
  const DeviceParams p = reference_device();
  const double amp = 0.37;
  const SolverOptions o = rwa_opts();
  const PhaseReport a = conditional_phase(time_evolve(p, gate_pulse(p, amp, 50.0), o));
  const PhaseReport b = conditional_phase(time_evolve(p, gate_pulse(p, amp, 58.0), o));
  double dphi = b.phi_c - a.phi_c;
  dphi -= kTwoPi * std::round((dphi - 2.0) / kTwoPi);  // nearest branch to ~2 rad
  const double want = kTwoPi * rwa_alpha_zz_ghz(p, amp) * 8.0;
  CHECK(std::abs(dphi) == doctest::Approx(std::abs(want)).epsilon(0.01));
}

TEST_CASE("full and reduced models agree on the nominal gate pulse's phase") {
  const DeviceParams p = reference_device();
  const PhaseReport r1 =
      conditional_phase(time_evolve(p, gate_pulse(p, 0.37, 38.0), rwa_opts()));
  SolverOptions of;
  of.frame = Frame::kFull;
  of.convergence_check = false;
  of.step_ns = 0.002;
  const PhaseReport r2 =
      conditional_phase(time_evolve(p, gate_pulse(p, 0.37, 38.0), of));
  const double u1 = r1.phi_c - kTwoPi * std::floor(r1.phi_c / kTwoPi);
  const double u2 = r2.phi_c - kTwoPi * std::floor(r2.phi_c / kTwoPi);
  CHECK(u1 == doctest::Approx(u2).epsilon(0.05));
}

TEST_CASE("phase sweep unwraps and fits a line at the gate amplitude") {
  const DeviceParams p = reference_device();
  const std::vector<double> taus = {38, 42, 46, 50, 54, 58, 62};
  const PhaseSweep sweep = phase_vs_length(p, 0.37, taus, rwa_opts());
  REQUIRE(sweep.points.size() == taus.size());
  for (const auto& pt : sweep.points) CHECK(pt.ok);
  REQUIRE(sweep.fit.valid);
  CHECK(sweep.fit.r2 > 0.999);
  // slope tracks the reduced model's own static plateau cross-Kerr rate
  const double want = kTwoPi * std::abs(rwa_alpha_zz_ghz(p, 0.37));
  CHECK(std::abs(sweep.fit.slope) == doctest::Approx(want).epsilon(0.02));
  // unwrapped phases are strictly monotone over the plateau range
  for (size_t i = 1; i < sweep.points.size(); ++i)
    CHECK((sweep.points[i].phi_c - sweep.points[i - 1].phi_c) *
              sweep.fit.slope > 0.0);
}

TEST_CASE("idle-bias sweep recovers the idle rate; single point has no fit") {
  const DeviceParams p = reference_device();
  const PhaseSweep sweep =
      phase_vs_length(p, p.idle_flux, {40, 60, 80}, rwa_opts());
  REQUIRE(sweep.fit.valid);
  const double want = -kTwoPi * rwa_alpha_zz_ghz(p, p.idle_flux);
  CHECK(std::abs(sweep.fit.slope - want) < 0.05 * std::abs(want));

  const PhaseSweep single = phase_vs_length(p, p.idle_flux, {40}, rwa_opts());
  CHECK(!single.fit.valid);
}

TEST_CASE("dynamic single-qubit phases are linear in the conditional phase") {
  const DeviceParams p = reference_device();
  const DynamicPhaseFit fit =
      dynamic_phase_linearity(p, 0.37, {38, 46, 54, 62, 70}, rwa_opts());
  REQUIRE(fit.q1.valid);
  REQUIRE(fit.q2.valid);
  CHECK(fit.q1.r2 > 0.99);
  CHECK(fit.q2.r2 > 0.99);
}

TEST_CASE("leakage grows steeply past the gate amplitude") {
  const DeviceParams p = reference_device();
  const std::vector<double> taus = {38, 46};
  const auto pts =
      leakage_sweep(p, {p.idle_flux, 0.30, 0.44}, taus, rwa_opts());
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].mean < 1e-4);       // parked at the idle bias
  CHECK(pts[1].mean < 0.01);       // well below the gate point
  CHECK(pts[2].mean > 0.02);       // past the coupler-qubit resonance
  CHECK(pts[1].mean < pts[2].mean);
  CHECK(pts[2].n_ok == 2);
}

TEST_CASE("coarse integration steps fail the convergence check") {
  const DeviceParams p = reference_device();
  SolverOptions o = rwa_opts(true);
  o.step_ns = 0.05;
  CHECK_THROWS_AS(time_evolve(p, gate_pulse(p, 0.37, 38.0), o),
                  convergence_error);
}

TEST_CASE("gate pulses reject impossible lengths") {
  const DeviceParams p = reference_device();
  CHECK_THROWS_AS(gate_pulse(p, 0.3, 10.0, 12.0), std::invalid_argument);
}

TEST_CASE("line fit statistics") {
  const LinearFit f = fit_line({1, 2, 3, 4}, {2.0, 4.0, 6.0, 8.0});
  REQUIRE(f.valid);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(0.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(!fit_line({1.0}, {2.0}).valid);
}
