/**
 * @file scenarios.hpp
 * @brief The four experiment scenarios (delay, angle and energy scans of the
 *        shutter; process tomography of the conversion channel) and their
 *        CSV / JSON output formats.
 *
 * All randomness derives from the configured seed: scenario s, point k samples
 * from derive_seed(seed, s, k). With `noiseless` set, counts are the expected
 * values and no sampling takes place.
 */
#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oks/config.hpp"
#include "oks/kerr.hpp"
#include "oks/pulse.hpp"
#include "oks/simulation.hpp"
#include "oks/timebin.hpp"
#include "oks/tomography.hpp"

namespace oks {

enum class Scenario : std::uint64_t { scan_delay = 1, scan_angle = 2, scan_energy = 3, tomography = 4 };

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> metadata;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw InputError("no column '" + std::string(name) + "'");
  }

  std::optional<double> meta(std::string_view name) const {
    for (const auto& [k, v] : metadata) {
      if (k == name) return v;
    }
    return std::nullopt;
  }
};

/// min, min + step, ... up to max (inclusive, with 1e-9 relative slack).
inline std::vector<double> linear_range(double min, double max, double step, const std::string& what) {
  if (!(step > 0.0) || !(max >= min) || !std::isfinite(min) || !std::isfinite(max)) {
    throw ConfigError("empty " + what + " range", 0, what);
  }
  const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = min + static_cast<double>(k) * step;
  return out;
}

namespace detail {

inline double draw(double mean, bool noiseless, std::uint64_t seed, Scenario s, std::size_t k,
                   std::uint64_t stream = 0) {
  if (noiseless) return mean;
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(s), (k << 8) | stream));
  return static_cast<double>(sample_poisson(mean, rng));
}

}  // namespace detail

/// Pump-delay scan of the single-bin shutter at the calibrated timing phase.
/// Columns: delay_ps, eta, signal_counts, noise_counts. Metadata carries the
/// FWHM of the reported trace and of both the convolved and instantaneous-probe
/// variants.
inline Table run_scan_delay(const ExperimentConfig& cfg, bool noiseless) {
  const auto delays = linear_range(cfg.delay_min_ps, cfg.delay_max_ps, cfg.delay_step_ps, "delay");
  // The timing scan runs at its own peak phase; express it as the equivalent energy.
  const PumpConfig pump = cfg.pump(cfg.e_pi_nJ * cfg.scan_delay_peak_phase_pi);
  const KerrMediumConfig medium = cfg.medium();
  const NoiseModelConfig noise = cfg.noise();
  const DetectionConfig det = cfg.detection(cfg.scan_integration_time_s, cfg.characterization_mean_photon_number);

  const Trace convolved = delay_scan(pump, cfg.probe(), delays, cfg.quadrature());
  const Trace instantaneous = delay_scan(pump, std::nullopt, delays);
  const Trace& trace = cfg.probe_convolution ? convolved : instantaneous;

  const double signal_per_eta = det.rep_rate * det.integration_time * det.mean_photon_number * det.channel_efficiency;
  const double noise_mean =
      noise_rate(noise, pump.energy, cfg.analyzer_angle(), pump.polarization_angle) * det.integration_time;

  Table t;
  t.columns = {"delay_ps", "eta", "signal_counts", "noise_counts"};
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double eta = medium.efficiency_cap * trace[k].y;
    t.rows.push_back({trace[k].x, eta, detail::draw(signal_per_eta * eta, noiseless, cfg.seed, Scenario::scan_delay, k, 0),
                      detail::draw(noise_mean, noiseless, cfg.seed, Scenario::scan_delay, k, 1)});
  }
  t.metadata = {{"measured_fwhm_ps", measured_fwhm(trace)},
                {"fwhm_convolved_ps", measured_fwhm(convolved)},
                {"fwhm_instantaneous_ps", measured_fwhm(instantaneous)},
                {"pump_fwhm_ps", cfg.pump_fwhm_ps},
                {"peak_phase_rad", peak_phase_from_energy(pump)}};
  return t;
}

/// Pump-polarization scan at zero delay. Columns: theta_deg, eta, noise_counts.
inline Table run_scan_angle(const ExperimentConfig& cfg, bool noiseless) {
  const auto angles = linear_range(cfg.angle_min_deg, cfg.angle_max_deg, cfg.angle_step_deg, "angle");
  const KerrMediumConfig medium = cfg.medium();
  const NoiseModelConfig noise = cfg.noise();
  const double phase = peak_phase_from_energy(cfg.pump());

  Table t;
  t.columns = {"theta_deg", "eta", "noise_counts"};
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double theta = angles[k] * std::numbers::pi / 180.0;
    const double eta = medium.efficiency_cap * shutter_efficiency(theta, phase);
    const double noise_mean =
        noise_rate(noise, cfg.pump_energy_nJ, cfg.analyzer_angle(), theta) * cfg.scan_integration_time_s;
    t.rows.push_back({angles[k], eta, detail::draw(noise_mean, noiseless, cfg.seed, Scenario::scan_angle, k)});
  }
  t.metadata = {{"pump_energy_nJ", cfg.pump_energy_nJ}, {"peak_phase_rad", phase}};
  return t;
}

/// Pump-energy scan at optimal delay and angle. Columns: energy_nJ, eta,
/// noise_counts, snr. The snr column uses expected (fitted) peak and noise
/// counts, so it does not fluctuate with the sampled counts.
inline Table run_scan_energy(const ExperimentConfig& cfg, bool noiseless) {
  const auto energies = linear_range(cfg.energy_min_nJ, cfg.energy_max_nJ, cfg.energy_step_nJ, "energy");
  const KerrMediumConfig medium = cfg.medium();
  const NoiseModelConfig noise = cfg.noise();
  const DetectionConfig det = cfg.detection(cfg.scan_integration_time_s, cfg.characterization_mean_photon_number);

  Table t;
  t.columns = {"energy_nJ", "eta", "noise_counts", "snr"};
  for (std::size_t k = 0; k < energies.size(); ++k) {
    const PumpConfig pump = cfg.pump(energies[k]);
    const double eta = conversion_efficiency(medium, pump);
    const double signal_mean = characterization_signal_rate(det.mean_photon_number, det, medium, pump) * det.integration_time;
    const double noise_mean =
        noise_rate(noise, pump.energy, cfg.analyzer_angle(), pump.polarization_angle) * det.integration_time;
    const double ratio =
        noise_mean > 0.0 ? snr(signal_mean + noise_mean, noise_mean) : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({energies[k], eta, detail::draw(noise_mean, noiseless, cfg.seed, Scenario::scan_energy, k), ratio});
  }
  t.metadata = {{"noise_rate_at_ref_cps", noise.rate_at_ref}};
  return t;
}

struct TomographyReport {
  ProcessTensor chi;
  double f_proc = 0.0;
  double f_avg = 0.0;
  double f_proc_fwhm = 0.0;
  double f_avg_fwhm = 0.0;
  ThresholdReport thresholds;
  std::uint64_t seed = 0;
  TomographyDataset dataset;
};

/// Reconstructs `data` when given, otherwise simulates the 36 settings. In
/// noiseless mode the channel is reconstructed from exact probabilities and no
/// Monte-Carlo resampling is done.
inline TomographyReport run_tomography(const ExperimentConfig& cfg, bool noiseless,
                                       const std::optional<TomographyDataset>& data = std::nullopt) {
  const ChannelSetup setup = cfg.tomography_setup();
  const std::uint64_t sim_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(Scenario::tomography), 0);
  const std::uint64_t mc_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(Scenario::tomography), 1);

  TomographyReport r;
  r.seed = cfg.seed;
  if (data) {
    r.dataset = *data;
    r.chi = reconstruct_chi(r.dataset, cfg.reconstruction());
  } else if (noiseless) {
    r.dataset = simulate_dataset(setup, sim_seed, CountMode::expected);
    r.chi = reconstruct_chi(expected_probabilities(setup), cfg.reconstruction());
  } else {
    r.dataset = simulate_dataset(setup, sim_seed, CountMode::poisson);
    r.chi = reconstruct_chi(r.dataset, cfg.reconstruction());
  }
  r.f_proc = process_fidelity(ProcessTensor::identity(), r.chi);
  r.f_avg = average_fidelity(r.f_proc);

  if (!noiseless && cfg.mc_trials > 0) {
    UncertaintyOptions opt;
    opt.histogram_bins = static_cast<std::size_t>(cfg.histogram_bins);
    opt.reconstruction = cfg.reconstruction();
    const UncertaintySummary u = poisson_uncertainty(r.dataset, static_cast<std::size_t>(cfg.mc_trials), mc_seed, opt);
    r.f_proc_fwhm = u.f_proc.fwhm;
    r.f_avg_fwhm = u.f_avg.fwhm;
  }
  r.thresholds = threshold_check(r.f_avg, cfg.mean_photon_number, cfg.channel_efficiency, cfg.thresholds());
  return r;
}

// ---------------------------------------------------------------------------
// Output formats

/// Shortest round-trip decimal representation, independent of locale.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

/// Header row, one row per point, then `# key=value` metadata lines.
inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += '\n';
  }
  for (const auto& [k, v] : t.metadata) out += "# " + k + "=" + format_number(v) + '\n';
  return out;
}

namespace detail {

inline nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Table& t, std::uint64_t seed) {
  nlohmann::ordered_json out;
  out["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (double v : row) r.push_back(detail::json_number(v));
    rows.push_back(std::move(r));
  }
  out["rows"] = std::move(rows);
  auto meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.metadata) meta[k] = detail::json_number(v);
  out["metadata"] = std::move(meta);
  out["seed"] = seed;
  return out;
}

inline nlohmann::ordered_json to_json(const BoundVerdict& b) {
  nlohmann::ordered_json out;
  out["bound"] = b.bound;
  out["verdict"] = std::string(to_string(b.verdict));
  return out;
}

/// Report keys, in order: chi_real, chi_imag, f_proc, f_avg, f_proc_fwhm,
/// f_avg_fwhm, thresholds, seed, config_echo.
inline nlohmann::ordered_json to_json(const TomographyReport& r, const ExperimentConfig& cfg) {
  nlohmann::ordered_json out;
  auto re = nlohmann::ordered_json::array();
  auto im = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < 4; ++i) {
    auto rr = nlohmann::ordered_json::array();
    auto ri = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < 4; ++j) {
      rr.push_back(r.chi.matrix()(i, j).real());
      ri.push_back(r.chi.matrix()(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  out["chi_real"] = std::move(re);
  out["chi_imag"] = std::move(im);
  out["f_proc"] = r.f_proc;
  out["f_avg"] = r.f_avg;
  out["f_proc_fwhm"] = r.f_proc_fwhm;
  out["f_avg_fwhm"] = r.f_avg_fwhm;
  nlohmann::ordered_json th;
  th["single_photon"] = to_json(r.thresholds.single_photon);
  th["operating"] = r.thresholds.operating ? to_json(*r.thresholds.operating) : nlohmann::ordered_json(nullptr);
  th["passes"] = r.thresholds.passes();
  out["thresholds"] = std::move(th);
  out["seed"] = r.seed;
  out["config_echo"] = config_echo(cfg);
  return out;
}

// Dataset CSV: header `prep,analyzer,counts,duration_s`, one row per record.

inline std::string dataset_to_csv(const TomographyDataset& d) {
  std::string out = "prep,analyzer,counts,duration_s\n";
  for (const auto& r : d.records) {
    out += std::string(to_string(r.prep)) + "," + std::string(to_string(r.analyzer)) + "," +
           std::to_string(r.counts) + "," + format_number(r.duration) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json dataset_to_json(const TomographyDataset& d) {
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : d.records) {
    nlohmann::ordered_json j;
    j["prep"] = std::string(to_string(r.prep));
    j["analyzer"] = std::string(to_string(r.analyzer));
    j["counts"] = r.counts;
    j["duration_s"] = r.duration;
    records.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["records"] = std::move(records);
  return out;
}

namespace detail {

inline MubLabel label_field(std::string_view text, int line) {
  auto l = parse_mub_label(trim(text));
  if (!l) throw ConfigError("dataset line " + std::to_string(line) + ": bad label '" + std::string(text) + "'", line);
  return *l;
}

}  // namespace detail

inline TomographyDataset dataset_from_csv(std::string_view text) {
  TomographyDataset d;
  int line_no = 0;
  bool header = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      if (line != "prep,analyzer,counts,duration_s") {
        throw ConfigError("dataset line " + std::to_string(line_no) + ": expected header prep,analyzer,counts,duration_s",
                          line_no);
      }
      header = false;
      continue;
    }
    std::array<std::string_view, 4> f{};
    std::size_t start = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto comma = i < 3 ? line.find(',', start) : line.size();
      if (comma == std::string_view::npos) {
        throw ConfigError("dataset line " + std::to_string(line_no) + ": expected 4 fields", line_no);
      }
      f[i] = detail::trim(line.substr(start, comma - start));
      start = comma + 1;
    }
    try {
      d.records.push_back({detail::label_field(f[0], line_no), detail::label_field(f[1], line_no),
                           detail::parse_integer<std::uint64_t>(f[2]), detail::parse_double(f[3])});
    } catch (const InputError& e) {
      throw ConfigError("dataset line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return d;
}

inline TomographyDataset dataset_from_json(std::string_view text) {
  TomographyDataset d;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& r : j.at("records")) {
      auto prep = parse_mub_label(r.at("prep").get<std::string>());
      auto an = parse_mub_label(r.at("analyzer").get<std::string>());
      if (!prep || !an) throw ConfigError("dataset record with an unknown label");
      d.records.push_back({*prep, *an, r.at("counts").get<std::uint64_t>(), r.value("duration_s", 0.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dataset JSON: ") + e.what());
  }
  return d;
}

}  // namespace oks
