#include "qocsim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qocsim/errors.hpp"

namespace qocsim {

namespace {

using json = nlohmann::json;

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

json read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw config_error(std::string("cannot open ") + what + " file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), what);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write file: " + path);
  out << text << '\n';
  if (!out) throw config_error("write failed: " + path);
}

double need(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw config_error(std::string("missing or non-numeric field '") + key + "'");
  return j[key].get<double>();
}

json device_json(const DeviceParams& p) {
  json j;
  j["C_s1"] = p.c_s1 * 1e15;  // stored in fF
  j["C_s2"] = p.c_s2 * 1e15;
  j["C_sc"] = p.c_sc * 1e15;
  j["C_12"] = p.c_12 * 1e15;
  j["C_1c"] = p.c_1c * 1e15;
  j["C_2c"] = p.c_2c * 1e15;
  j["E_J1"] = p.e_j1;
  j["E_J2"] = p.e_j2;
  j["E_Jc"] = p.e_jc;
  j["r"] = p.r;
  j["idle_flux"] = p.idle_flux;
  j["n_fock"] = p.n_fock;
  json xt = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) xt.push_back(p.flux_crosstalk(i, k));
  j["flux_crosstalk"] = xt;
  return j;
}

DeviceParams device_from(const json& j) {
  DeviceParams p;
  p.c_s1 = need(j, "C_s1") * 1e-15;
  p.c_s2 = need(j, "C_s2") * 1e-15;
  p.c_sc = need(j, "C_sc") * 1e-15;
  p.c_12 = need(j, "C_12") * 1e-15;
  p.c_1c = need(j, "C_1c") * 1e-15;
  p.c_2c = need(j, "C_2c") * 1e-15;
  p.e_j1 = need(j, "E_J1");
  p.e_j2 = need(j, "E_J2");
  p.e_jc = need(j, "E_Jc");
  p.r = need(j, "r");
  p.idle_flux = need(j, "idle_flux");
  if (j.contains("n_fock")) p.n_fock = static_cast<int>(need(j, "n_fock"));
  if (j.contains("flux_crosstalk")) {
    const json& xt = j["flux_crosstalk"];
    if (!xt.is_array() || xt.size() != 9)
      throw config_error("flux_crosstalk must be a 9-element row-major array");
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        if (!xt[3 * i + k].is_number())
          throw config_error("flux_crosstalk entries must be numeric");
        p.flux_crosstalk(i, k) = xt[3 * i + k].get<double>();
      }
  }
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string("device config rejected: ") + e.what());
  }
  return p;
}

json pulse_json(const PulseConfig& p) {
  json j;
  j["amplitude"] = p.amplitude;
  j["tau"] = p.tau;
  j["tau_b"] = p.tau_b;
  j["sigma"] = p.sigma;
  j["sample_rate_GSa"] = p.sample_rate_gsa;
  return j;
}

PulseConfig pulse_from(const json& j) {
  PulseConfig p;
  p.amplitude = need(j, "amplitude");
  p.tau = need(j, "tau");
  if (j.contains("tau_b")) p.tau_b = need(j, "tau_b");
  if (j.contains("sigma")) p.sigma = need(j, "sigma");
  if (j.contains("sample_rate_GSa")) p.sample_rate_gsa = need(j, "sample_rate_GSa");
  if (p.tau < 2.0 * p.tau_b)
    throw config_error("pulse config rejected: tau shorter than the buffers");
  if (p.sample_rate_gsa <= 0.0 || p.sigma <= 0.0 || p.tau_b < 0.0)
    throw config_error("pulse config rejected: non-positive timing parameter");
  return p;
}

json transfer_json(const TransferModel& m) {
  json j;
  j["gain"] = m.gain;
  json terms = json::array();
  for (const auto& t : m.terms)
    terms.push_back(json{{"amplitude", t.amplitude}, {"tau", t.tau}});
  j["terms"] = terms;
  return j;
}

TransferModel transfer_from(const json& j) {
  TransferModel m;
  m.gain = need(j, "gain");
  if (!j.contains("terms") || !j["terms"].is_array())
    throw config_error("transfer model needs a 'terms' array");
  for (const json& t : j["terms"]) {
    TransferModel::Term term;
    term.amplitude = need(t, "amplitude");
    term.tau = need(t, "tau");
    m.terms.push_back(term);
  }
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string("transfer model rejected: ") + e.what());
  }
  return m;
}

json chain_json(const FilterChain& c) {
  json j;
  j["dt"] = c.dt;
  json secs = json::array();
  for (const auto& s : c.sections)
    secs.push_back(json{{"b0", s.b0}, {"b1", s.b1}, {"a1", s.a1}});
  j["sections"] = secs;
  return j;
}

FilterChain chain_from(const json& j) {
  FilterChain c;
  c.dt = need(j, "dt");
  if (c.dt <= 0.0) throw config_error("filter chain rejected: dt must be positive");
  if (!j.contains("sections") || !j["sections"].is_array())
    throw config_error("filter chain needs a 'sections' array");
  for (const json& s : j["sections"]) {
    IirSection sec;
    sec.b0 = need(s, "b0");
    sec.b1 = need(s, "b1");
    sec.a1 = need(s, "a1");
    if (std::abs(sec.a1) >= 1.0)
      throw config_error("filter chain rejected: unstable section (|a1| >= 1)");
    c.sections.push_back(sec);
  }
  return c;
}

}  // namespace

FluxPulse PulseConfig::build() const {
  return flat_top_gaussian(amplitude, tau - 2.0 * tau_b, tau_b, sigma,
                           1.0 / sample_rate_gsa);
}

DeviceParams load_device(const std::string& path) {
  return device_from(read_file(path, "device"));
}
void save_device(const DeviceParams& params, const std::string& path) {
  write_file(path, device_json(params).dump(2));
}
std::string device_to_json(const DeviceParams& params) {
  return device_json(params).dump(2);
}
DeviceParams device_from_json(const std::string& text) {
  return device_from(parse(text, "device"));
}

PulseConfig load_pulse(const std::string& path) {
  return pulse_from(read_file(path, "pulse"));
}
void save_pulse(const PulseConfig& pulse, const std::string& path) {
  write_file(path, pulse_json(pulse).dump(2));
}
std::string pulse_to_json(const PulseConfig& pulse) {
  return pulse_json(pulse).dump(2);
}
PulseConfig pulse_from_json(const std::string& text) {
  return pulse_from(parse(text, "pulse"));
}

TransferModel load_transfer(const std::string& path) {
  return transfer_from(read_file(path, "transfer"));
}
void save_transfer(const TransferModel& model, const std::string& path) {
  write_file(path, transfer_json(model).dump(2));
}
std::string transfer_to_json(const TransferModel& model) {
  return transfer_json(model).dump(2);
}
TransferModel transfer_from_json(const std::string& text) {
  return transfer_from(parse(text, "transfer"));
}

std::string chain_to_json(const FilterChain& chain) {
  return chain_json(chain).dump(2);
}
FilterChain chain_from_json(const std::string& text) {
  return chain_from(parse(text, "filter chain"));
}

DeviceParams reference_device() {
  DeviceParams p;
  p.c_s1 = 77.8e-15;
  p.c_s2 = 77.8e-15;
  p.c_sc = 60.4e-15;
  p.c_12 = 0.46e-15;
  p.c_1c = 6.4e-15;
  p.c_2c = 6.4e-15;
  p.e_j1 = 15.3;
  p.e_j2 = 17.49;
  p.e_jc = 37.3;
  p.r = 1.0 / 1.71;
  // Flux-axis calibration: the coupler line is scaled so that the labeled
  // gate-point amplitude 0.37 Phi_0 maps onto the physical flux 0.378 Phi_0
  // where the simulated conditional-phase rate reproduces the measured one.
  p.flux_crosstalk(2, 2) = 0.378 / 0.37;
  // Labeled bias where the dressed coupler frequency is 7.612 GHz.
  p.idle_flux = 0.225796199;
  p.n_fock = 8;
  return p;
}

TransferModel reference_transfer() {
  TransferModel m;
  m.gain = 0.98;
  const double amps[8] = {-0.05, -0.04, -0.035, -0.03,
                          -0.025, -0.02, -0.015, -0.01};
  for (int k = 0; k < 8; ++k)
    m.terms.push_back({amps[k], 10.0 * std::pow(1000.0, k / 7.0)});
  return m;
}

}  // namespace qocsim
