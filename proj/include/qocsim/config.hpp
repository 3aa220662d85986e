#pragma once

#include <string>

#include "qocsim/device.hpp"
#include "qocsim/pulse.hpp"

namespace qocsim {

// Analytic description of a flat-top Gaussian flux pulse as written to or
// read from a config file. `tau` is the total length including both
// zero-amplitude buffers; `amplitude` is the plateau flux relative to the
// static bias, in Phi_0.
struct PulseConfig {
  double amplitude = 0.0;
  double tau = 0.0;
  double tau_b = 12.0;
  double sigma = kDefaultSigmaNs;
  double sample_rate_gsa = kDefaultSampleRateGsa;

  FluxPulse build() const;
};

// JSON (de)serialization. Field names follow the device's electrical
// parameter sheet: C_s1, C_s2, C_sc, C_12, C_1c, C_2c in fF; E_J1, E_J2,
// E_Jc in GHz; r; idle_flux in Phi_0; optional flux_crosstalk (3x3,
// row-major) and n_fock. Loaders throw config_error on missing or
// malformed fields.
DeviceParams load_device(const std::string& path);
void save_device(const DeviceParams& params, const std::string& path);
std::string device_to_json(const DeviceParams& params);
DeviceParams device_from_json(const std::string& text);

PulseConfig load_pulse(const std::string& path);
void save_pulse(const PulseConfig& pulse, const std::string& path);
std::string pulse_to_json(const PulseConfig& pulse);
PulseConfig pulse_from_json(const std::string& text);

TransferModel load_transfer(const std::string& path);
void save_transfer(const TransferModel& model, const std::string& path);
std::string transfer_to_json(const TransferModel& model);
TransferModel transfer_from_json(const std::string& text);

std::string chain_to_json(const FilterChain& chain);
FilterChain chain_from_json(const std::string& text);

// Built-in parameter set of the reference two-qubit device used throughout
// the test suite: the electrical parameters above with the flux axis
// calibrated so that the labeled amplitude matches the measured gate
// point, and the idle bias solved for a 7.612 GHz coupler frequency.
DeviceParams reference_device();

// Built-in flux-line transfer model with eight settling terms spanning
// time constants from 10 ns to 10 us, all undershooting (negative
// amplitudes), and a DC gain of 0.98.
TransferModel reference_transfer();

}  // namespace qocsim
