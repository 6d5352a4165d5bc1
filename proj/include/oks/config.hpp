/**
 * @file config.hpp
 * @brief Experiment configuration: flat `key = value` text with unit-suffixed keys.
 *
 * Blank lines and lines starting with '#' are ignored; a trailing '# ...' on a
 * value line is a comment. Every key is optional and defaults to the
 * laboratory operating point. Unknown keys, malformed values and duplicate
 * keys are errors that name the offending line and key.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "oks/errors.hpp"
#include "oks/kerr.hpp"
#include "oks/pulse.hpp"
#include "oks/simulation.hpp"
#include "oks/timebin.hpp"
#include "oks/tomography.hpp"

namespace oks {

struct ExperimentConfig {
  // Kerr medium
  double probe_wavelength_nm = 710.0;
  double kerr_n2_m2_per_W = 6.2e-20;
  double kerr_length_mm = 8.0;
  double kerr_transmission = 0.82;
  double efficiency_cap = kDefaultEfficiencyCap;

  // Pump
  double pump_energy_nJ = 840.0;
  double pump_angle_deg = 45.0;
  PulseShape pump_shape = PulseShape::sinc2;
  double pump_fwhm_ps = 1.15;
  double e_pi_nJ = 840.0;

  // Probe
  PulseShape probe_shape = PulseShape::gaussian;
  double probe_fwhm_ps = 0.27;
  bool probe_convolution = true;

  // Pump-induced noise. A negative rate means "calibrate from noise_snr_at_ref".
  double noise_snr_at_ref = 9.2;
  double noise_rate_at_ref_cps = -1.0;
  double noise_ref_energy_nJ = 840.0;
  double noise_exponent = 3.0;
  bool noise_follows_pump = true;

  // Detection
  double mean_photon_number = 0.75;
  double characterization_mean_photon_number = 1.17;
  double channel_efficiency = 0.11;
  double rep_rate_Hz = 1000.0;
  double gate_ns = 2.0;
  double dark_rate_cps = 0.0;
  double bin_separation_ps = 4.3;

  // Single-bin scans
  double analyzer_angle_deg = 90.0;
  double scan_integration_time_s = 1.0;
  double delay_min_ps = -3.0;
  double delay_max_ps = 3.0;
  double delay_step_ps = 0.01;
  double scan_delay_peak_phase_pi = 0.4;
  double quadrature_step_fs = 1.0;
  double angle_min_deg = 0.0;
  double angle_max_deg = 180.0;
  double angle_step_deg = 1.0;
  double energy_min_nJ = 400.0;
  double energy_max_nJ = 1200.0;
  double energy_step_nJ = 20.0;

  // Tomography
  double tomography_energy_nJ = 840.0;
  double tomography_integration_time_s = 30.0;
  int mc_trials = 500;
  int histogram_bins = 50;
  ProjectionMode projection = ProjectionMode::alternating;
  double threshold_single_photon = 2.0 / 3.0;
  double threshold_operating = 0.70;

  std::uint64_t seed = 12345;

  // -------------------------------------------------------------------------
  // Derived module configurations

  KerrMediumConfig medium() const {
    KerrMediumConfig m;
    m.n2 = kerr_n2_m2_per_W;
    m.length_eff = kerr_length_mm * 1e-3;
    m.probe_wavelength = probe_wavelength_nm * 1e-9;
    m.transmission = kerr_transmission;
    m.efficiency_cap = efficiency_cap;
    return m;
  }

  PumpConfig pump(double energy_nJ) const {
    PumpConfig p;
    p.energy = energy_nJ;
    p.polarization_angle = pump_angle_deg * std::numbers::pi / 180.0;
    p.envelope = {pump_shape, pump_fwhm_ps, 0.0, 1.0};
    p.e_pi = e_pi_nJ;
    return p;
  }
  PumpConfig pump() const { return pump(pump_energy_nJ); }

  PulseEnvelope probe() const { return {probe_shape, probe_fwhm_ps, 0.0, 1.0}; }

  DetectionConfig detection(double integration_time_s, double mean_photons) const {
    DetectionConfig d;
    d.mean_photon_number = mean_photons;
    d.channel_efficiency = channel_efficiency;
    d.rep_rate = rep_rate_Hz;
    d.gate = gate_ns;
    d.integration_time = integration_time_s;
    d.dark_rate = dark_rate_cps;
    return d;
  }

  double analyzer_angle() const { return analyzer_angle_deg * std::numbers::pi / 180.0; }

  /// Noise model with rate_at_ref either given or calibrated so that the
  /// single-bin characterization at noise_ref_energy reaches noise_snr_at_ref.
  NoiseModelConfig noise() const {
    NoiseModelConfig n;
    n.ref_energy = noise_ref_energy_nJ;
    n.exponent = noise_exponent;
    n.pump_pol_following = noise_follows_pump;
    if (noise_rate_at_ref_cps >= 0.0) {
      n.rate_at_ref = noise_rate_at_ref_cps;
    } else {
      const PumpConfig at_ref = pump(noise_ref_energy_nJ);
      const double signal = characterization_signal_rate(
          characterization_mean_photon_number, detection(1.0, characterization_mean_photon_number), medium(), at_ref);
      n.rate_at_ref = calibrate_noise_rate(noise_snr_at_ref, signal, n, at_ref, analyzer_angle());
    }
    return n;
  }

  ChannelSetup tomography_setup() const {
    return {detection(tomography_integration_time_s, mean_photon_number), pump(tomography_energy_nJ), noise(),
            medium()};
  }

  QuadratureOptions quadrature() const { return {quadrature_step_fs * 1e-3, 5.0}; }

  ThresholdConfig thresholds() const {
    ThresholdConfig t;
    t.single_photon_bound = threshold_single_photon;
    t.operating_bound = threshold_operating;
    t.operating_mean_photon = 0.75;
    t.operating_efficiency = 0.11;
    return t;
  }

  ReconstructionOptions reconstruction() const {
    ReconstructionOptions r;
    r.projection = projection;
    return r;
  }

  /// Throws InputError when any derived module configuration is invalid.
  void validate() const {
    medium().validate();
    pump().validate();
    probe().validate();
    detection(tomography_integration_time_s, mean_photon_number).validate();
    if (!(characterization_mean_photon_number >= 0.0)) throw InputError("characterization_mean_photon_number < 0");
    if (!(bin_separation_ps > 0.0)) throw InputError("bin_separation_ps must be positive");
    if (!(scan_integration_time_s > 0.0) || !(tomography_integration_time_s > 0.0)) {
      throw InputError("integration times must be positive");
    }
    if (!(quadrature_step_fs > 0.0)) throw InputError("quadrature_step_fs must be positive");
    if (!(scan_delay_peak_phase_pi >= 0.0)) throw InputError("scan_delay_peak_phase_pi must be nonnegative");
    if (!(tomography_energy_nJ >= 0.0)) throw InputError("tomography_energy_nJ must be nonnegative");
    if (mc_trials != 0 && mc_trials < 100) throw InputError("mc_trials must be 0 or at least 100");
    if (histogram_bins < 3) throw InputError("histogram_bins must be at least 3");
    noise().validate();
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InputError("expected a finite number, got '" + std::string(text) + "'");
  }
  return v;
}

template <typename Int>
Int parse_integer(std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError("expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InputError("expected true/false, got '" + std::string(text) + "'");
}

inline PulseShape parse_shape(std::string_view text) {
  auto s = parse_pulse_shape(text);
  if (!s) throw InputError("expected gaussian or sinc2, got '" + std::string(text) + "'");
  return *s;
}

struct ConfigKey {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<nlohmann::ordered_json(const ExperimentConfig&)> get;
};

template <typename T>
ConfigKey number_key(std::string name, T ExperimentConfig::*member) {
  return {std::move(name),
          [member](ExperimentConfig& c, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*member = parse_double(v);
            } else {
              c.*member = parse_integer<T>(v);
            }
          },
          [member](const ExperimentConfig& c) { return nlohmann::ordered_json(c.*member); }};
}

inline ConfigKey bool_key(std::string name, bool ExperimentConfig::*member) {
  return {std::move(name), [member](ExperimentConfig& c, std::string_view v) { c.*member = parse_bool(v); },
          [member](const ExperimentConfig& c) { return nlohmann::ordered_json(c.*member); }};
}

inline ConfigKey shape_key(std::string name, PulseShape ExperimentConfig::*member) {
  return {std::move(name), [member](ExperimentConfig& c, std::string_view v) { c.*member = parse_shape(v); },
          [member](const ExperimentConfig& c) { return nlohmann::ordered_json(std::string(to_string(c.*member))); }};
}

}  // namespace detail

/// Every recognized key, in the order used for echoing.
inline const std::vector<detail::ConfigKey>& config_keys() {
  using C = ExperimentConfig;
  using namespace detail;
  static const std::vector<ConfigKey> keys = {
      number_key("probe_wavelength_nm", &C::probe_wavelength_nm),
      number_key("kerr_n2_m2_per_W", &C::kerr_n2_m2_per_W),
      number_key("kerr_length_mm", &C::kerr_length_mm),
      number_key("kerr_transmission", &C::kerr_transmission),
      number_key("efficiency_cap", &C::efficiency_cap),
      number_key("pump_energy_nJ", &C::pump_energy_nJ),
      number_key("pump_angle_deg", &C::pump_angle_deg),
      shape_key("pump_shape", &C::pump_shape),
      number_key("pump_fwhm_ps", &C::pump_fwhm_ps),
      number_key("e_pi_nJ", &C::e_pi_nJ),
      shape_key("probe_shape", &C::probe_shape),
      number_key("probe_fwhm_ps", &C::probe_fwhm_ps),
      bool_key("probe_convolution", &C::probe_convolution),
      number_key("noise_snr_at_ref", &C::noise_snr_at_ref),
      number_key("noise_rate_at_ref_cps", &C::noise_rate_at_ref_cps),
      number_key("noise_ref_energy_nJ", &C::noise_ref_energy_nJ),
      number_key("noise_exponent", &C::noise_exponent),
      bool_key("noise_follows_pump", &C::noise_follows_pump),
      number_key("mean_photon_number", &C::mean_photon_number),
      number_key("characterization_mean_photon_number", &C::characterization_mean_photon_number),
      number_key("channel_efficiency", &C::channel_efficiency),
      number_key("rep_rate_Hz", &C::rep_rate_Hz),
      number_key("gate_ns", &C::gate_ns),
      number_key("dark_rate_cps", &C::dark_rate_cps),
      number_key("bin_separation_ps", &C::bin_separation_ps),
      number_key("analyzer_angle_deg", &C::analyzer_angle_deg),
      number_key("scan_integration_time_s", &C::scan_integration_time_s),
      number_key("delay_min_ps", &C::delay_min_ps),
      number_key("delay_max_ps", &C::delay_max_ps),
      number_key("delay_step_ps", &C::delay_step_ps),
      number_key("scan_delay_peak_phase_pi", &C::scan_delay_peak_phase_pi),
      number_key("quadrature_step_fs", &C::quadrature_step_fs),
      number_key("angle_min_deg", &C::angle_min_deg),
      number_key("angle_max_deg", &C::angle_max_deg),
      number_key("angle_step_deg", &C::angle_step_deg),
      number_key("energy_min_nJ", &C::energy_min_nJ),
      number_key("energy_max_nJ", &C::energy_max_nJ),
      number_key("energy_step_nJ", &C::energy_step_nJ),
      number_key("tomography_energy_nJ", &C::tomography_energy_nJ),
      number_key("tomography_integration_time_s", &C::tomography_integration_time_s),
      number_key("mc_trials", &C::mc_trials),
      number_key("histogram_bins", &C::histogram_bins),
      {"projection",
       [](C& c, std::string_view v) {
         auto mode = parse_projection_mode(v);
         if (!mode) throw InputError("expected alternating or clip, got '" + std::string(v) + "'");
         c.projection = *mode;
       },
       [](const C& c) { return nlohmann::ordered_json(std::string(to_string(c.projection))); }},
      number_key("threshold_single_photon", &C::threshold_single_photon),
      number_key("threshold_operating", &C::threshold_operating),
      number_key("seed", &C::seed),
  };
  return keys;
}

/// Parses configuration text on top of the defaults, then validates the result.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::vector<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));

    const auto& keys = config_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.name == key; });
    if (it == keys.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'", line_no, key);
    }
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'", line_no, key);
    }
    seen.push_back(key);
    try {
      it->set(cfg, value);
    } catch (const InputError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ", key '" + key + "': " + e.what(), line_no, key);
    }
  }
  try {
    cfg.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// All effective settings, in key order.
inline nlohmann::ordered_json config_echo(const ExperimentConfig& cfg) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& k : config_keys()) out[k.name] = k.get(cfg);
  return out;
}

}  // namespace oks
