/**
 * @file kerr.hpp
 * @brief Optical Kerr shutter: nonlinear phase, shutter efficiency, the
 *        shutter as a Jones element, energy response and pump-induced noise.
 *
 * Pump energy is converted to phase through a calibration constant e_pi (the
 * energy at which the probe sees a phase of pi at optimal delay) rather than
 * through n2 and an absolute irradiance; nonlinear_phase() keeps the
 * first-principles relation available for configuration checks.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "oks/errors.hpp"
#include "oks/polarization.hpp"
#include "oks/pulse.hpp"

namespace oks {

inline constexpr double kDefaultEfficiencyCap = 0.97;

struct KerrMediumConfig {
  double n2 = 6.2e-20;                ///< m^2/W
  double length_eff = 8e-3;           ///< m
  double probe_wavelength = 710e-9;   ///< m
  double transmission = 0.82;         ///< unitless, (0, 1]
  /// Flat factor on the ideal shutter efficiency; the residual rotation
  /// imperfection seen at full phase.
  double efficiency_cap = kDefaultEfficiencyCap;

  void validate() const {
    if (!(n2 > 0.0) || !(length_eff > 0.0) || !(probe_wavelength > 0.0)) {
      throw InputError("Kerr medium parameters must be positive");
    }
    if (!(transmission > 0.0 && transmission <= 1.0)) throw InputError("transmission must lie in (0, 1]");
    if (!(efficiency_cap >= 0.0 && efficiency_cap <= 1.0)) throw InputError("efficiency cap must lie in [0, 1]");
  }
};

struct PumpConfig {
  double energy = 840.0;                                  ///< nJ
  double polarization_angle = std::numbers::pi / 4.0;     ///< rad, relative to probe H
  PulseEnvelope envelope{PulseShape::sinc2, 1.15, 0.0, 1.0};
  double e_pi = 840.0;                                    ///< nJ giving a peak phase of pi

  void validate() const {
    if (!(energy >= 0.0)) throw InputError("pump energy must be nonnegative");
    if (!(e_pi > 0.0)) throw InputError("e_pi must be positive");
    envelope.validate();
  }
};

struct NoiseModelConfig {
  double rate_at_ref = 0.0;     ///< counts/s at ref_energy, analyzer parallel to the pump
  double ref_energy = 840.0;    ///< nJ
  double exponent = 3.0;        ///< power-law exponent b
  bool pump_pol_following = true;

  void validate() const {
    if (!(rate_at_ref >= 0.0)) throw InputError("noise rate must be nonnegative");
    if (!(ref_energy > 0.0)) throw InputError("noise reference energy must be positive");
    if (!(exponent >= 1.0)) throw InputError("noise exponent must be >= 1");
  }
};

/// Cross-phase-modulation phase 2 pi n2 L I / lambda.
inline double nonlinear_phase(const KerrMediumConfig& medium, double intensity) {
  if (intensity < 0.0) throw InputError("intensity must be nonnegative");
  return 2.0 * std::numbers::pi * medium.n2 * medium.length_eff * intensity / medium.probe_wavelength;
}

/// Inverse of nonlinear_phase.
inline double intensity_for_phase(const KerrMediumConfig& medium, double phase) {
  if (phase < 0.0) throw InputError("phase must be nonnegative");
  return phase * medium.probe_wavelength / (2.0 * std::numbers::pi * medium.n2 * medium.length_eff);
}

/// Ideal shutter transmission between crossed polarizers: sin^2(2 theta) sin^2(dphi / 2).
inline double shutter_efficiency(double theta, double delta_phi) {
  const double a = std::sin(2.0 * theta);
  const double b = std::sin(0.5 * delta_phi);
  return a * a * b * b;
}

/// Induced birefringence: a retarder of retardance delta_phi whose axis follows
/// the pump polarization.
inline OpticalElement oks_element(double theta, double delta_phi) {
  return retarder(theta, delta_phi);
}

inline double peak_phase_from_energy(const PumpConfig& pump) {
  pump.validate();
  return std::numbers::pi * (pump.energy / pump.e_pi);
}

/// Shutter efficiency including the medium's flat imperfection factor, at the
/// peak phase implied by the pump energy.
inline double conversion_efficiency(const KerrMediumConfig& medium, const PumpConfig& pump) {
  return medium.efficiency_cap * shutter_efficiency(pump.polarization_angle, peak_phase_from_energy(pump));
}

/// eta(delay) = sin^2(2 theta) sin^2(dphi_eff(delay) / 2). `probe` = nullopt
/// selects the instantaneous-probe limit.
inline Trace delay_scan(const PumpConfig& pump, const std::optional<PulseEnvelope>& probe,
                        std::span<const double> delays, const QuadratureOptions& quad = {}) {
  if (delays.empty()) throw InputError("delay list is empty");
  const double peak = peak_phase_from_energy(pump);
  Trace trace;
  trace.reserve(delays.size());
  for (double tau : delays) {
    const double phase = probe ? effective_phase_vs_delay(pump.envelope, *probe, peak, tau, quad)
                               : instantaneous_phase_vs_delay(pump.envelope, peak, tau);
    trace.push_back({tau, shutter_efficiency(pump.polarization_angle, phase)});
  }
  return trace;
}

/// Fraction of the pump-induced noise transmitted by an analyzer.
/// With pump_pol_following the noise is linearly polarized along the pump, so
/// a linear analyzer passes cos^2(analyzer - pump).
inline double noise_analyzer_factor(const NoiseModelConfig& noise, double analyzer_angle, double pump_angle) {
  if (!noise.pump_pol_following) return 1.0;
  const double c = std::cos(analyzer_angle - pump_angle);
  return c * c;
}

/// Same factor for any of the six tomography analyzers (1/2 for R and L).
inline double noise_analyzer_factor(const NoiseModelConfig& noise, MubLabel analyzer, double pump_angle) {
  if (!noise.pump_pol_following) return 1.0;
  return projection_probability(analyzer, PolarizationState::linear(pump_angle));
}

inline double noise_energy_scale(const NoiseModelConfig& noise, double energy) {
  if (energy < 0.0) throw InputError("pump energy must be nonnegative");
  return std::pow(energy / noise.ref_energy, noise.exponent);
}

/// Pump-induced (SPM) noise rate: rate_at_ref (E / E_ref)^b, times the analyzer factor.
inline double noise_rate(const NoiseModelConfig& noise, double energy, double analyzer_angle, double pump_angle) {
  return noise.rate_at_ref * noise_energy_scale(noise, energy) * noise_analyzer_factor(noise, analyzer_angle, pump_angle);
}

inline double noise_rate(const NoiseModelConfig& noise, double energy, MubLabel analyzer, double pump_angle) {
  return noise.rate_at_ref * noise_energy_scale(noise, energy) * noise_analyzer_factor(noise, analyzer, pump_angle);
}

/// Signal-to-noise ratio: fitted peak counts of the shutter signal over the
/// pump-only noise counts recorded in the same gate. The peak counts include
/// the noise floor, as in eta = (N_peak - N_noise) / N_input.
inline double snr(double signal_counts, double noise_counts) {
  if (!(noise_counts > 0.0)) throw InputError("SNR undefined for zero noise counts");
  return signal_counts / noise_counts;
}

}  // namespace oks
