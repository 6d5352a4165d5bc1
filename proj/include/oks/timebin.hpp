/**
 * @file timebin.hpp
 * @brief Polarization <-> time-bin conversion through the Kerr shutter and
 *        photon-counting detection.
 *
 * Preparation: a birefringent crystal sends H to the early bin and V to the
 * late bin; a polarizer at 45 deg (50% loss) and a half-wave plate at 22.5 deg
 * leave both bins H co-polarized.
 *
 * Conversion back: the shutter acts on the late bin only. With efficiency eta
 * the coherent part of the output follows the Kraus operator
 *
 *   K0 = |H><e| + sqrt(eta) |V><l|
 *
 * and the unrotated remainder of the late bin, which leaves the recombination
 * crystal in a temporal mode distinguishable from the qubit but inside the
 * detection gate, contributes (1 - eta) p_late |H><H| incoherently.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "oks/errors.hpp"
#include "oks/kerr.hpp"
#include "oks/polarization.hpp"

namespace oks {

using DensityMatrix = Matrix2c;

inline DensityMatrix pure_density(const PolarizationState& s) {
  const Vector2c v = s.vector();
  return v * v.adjoint();
}

struct TimeBinState {
  cdouble amp_early{};
  cdouble amp_late{};
  PolarizationState pol_early{1.0, 0.0};
  PolarizationState pol_late{1.0, 0.0};
  double bin_separation = 4.3;  ///< ps

  double early_weight() const { return std::norm(amp_early) * pol_early.norm_squared(); }
  double late_weight() const { return std::norm(amp_late) * pol_late.norm_squared(); }
  double norm_squared() const { return early_weight() + late_weight(); }
};

namespace detail {

// Writes v as amp * pol with pol unit-norm and its largest component real
// positive. A zero vector becomes amp 0 with pol H.
inline void factor_bin(const PolarizationState& v, cdouble& amp, PolarizationState& pol) {
  const double n = std::sqrt(v.norm_squared());
  if (n == 0.0) {
    amp = 0.0;
    pol = PolarizationState(1.0, 0.0);
    return;
  }
  const cdouble lead = std::abs(v.amp_h()) >= std::abs(v.amp_v()) ? v.amp_h() : v.amp_v();
  const cdouble phase = lead / std::abs(lead);
  amp = n * phase;
  pol = v.scaled(1.0 / (n * phase));
}

// H-polarized amplitude carried by one bin. Conversion is defined for
// horizontally co-polarized bins only.
inline cdouble horizontal_amplitude(cdouble amp, const PolarizationState& pol) {
  const double off = std::norm(amp) * std::norm(pol.amp_v());
  if (off > 1e-9) throw InputError("time bins must be horizontally co-polarized for conversion");
  return amp * pol.amp_h();
}

inline void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("conversion efficiency must lie in [0, 1]");
}

}  // namespace detail

/// Preparation chain: birefringent split, diagonal polarizer, half-wave plate.
inline TimeBinState prepare_timebin(const PolarizationState& s, double separation) {
  if (!s.is_normalized(1e-9)) throw InputError("prepare_timebin requires a normalized state");
  if (!(separation > 0.0)) throw InputError("bin separation must be positive");

  const OpticalElement diagonal = linear_polarizer(std::numbers::pi / 4.0);
  const OpticalElement rotate_to_h = half_waveplate(std::numbers::pi / 8.0);
  const OpticalElement chain = compose(rotate_to_h, diagonal);

  const PolarizationState early = apply(chain, PolarizationState(s.amp_h(), 0.0));
  const PolarizationState late = apply(chain, PolarizationState(0.0, s.amp_v()));

  TimeBinState tb;
  tb.bin_separation = separation;
  detail::factor_bin(early, tb.amp_early, tb.pol_early);
  detail::factor_bin(late, tb.amp_late, tb.pol_late);
  return tb;
}

/// Time-bin -> polarization through the shutter. Returns the (unnormalized)
/// output density operator; its trace equals the input norm.
inline DensityMatrix convert_to_polarization(const TimeBinState& tb, double eta) {
  detail::check_eta(eta);
  const cdouble e = detail::horizontal_amplitude(tb.amp_early, tb.pol_early);
  const cdouble l = detail::horizontal_amplitude(tb.amp_late, tb.pol_late);

  const Vector2c coherent(e, std::sqrt(eta) * l);
  DensityMatrix rho = coherent * coherent.adjoint();
  rho(0, 0) += (1.0 - eta) * std::norm(l);
  return rho;
}

struct TimeBinConversion {
  TimeBinState state;
  double leakage = 0.0;  ///< weight of the unrotated late-bin remainder
};

/// Polarization -> time-bin: birefringent split, then the shutter rotates the
/// late (V) bin onto H.
inline TimeBinConversion convert_to_timebin(const PolarizationState& s, double eta, double separation = 4.3) {
  if (!s.is_normalized(1e-9)) throw InputError("convert_to_timebin requires a normalized state");
  detail::check_eta(eta);
  if (!(separation > 0.0)) throw InputError("bin separation must be positive");

  TimeBinConversion out;
  out.state.bin_separation = separation;
  out.state.amp_early = s.amp_h();
  out.state.amp_late = std::sqrt(eta) * s.amp_v();
  out.leakage = (1.0 - eta) * std::norm(s.amp_v());
  return out;
}

/// Tr(|m><m| rho).
inline double detection_probability(const DensityMatrix& rho, MubLabel analyzer) {
  if (rho.trace().real() > 1.0 + 1e-12) throw InputError("density operator trace exceeds one");
  const Vector2c m = mub_state(analyzer).vector();
  return (m.adjoint() * rho * m)(0, 0).real();
}

/// Normalized output of the full prepare -> convert qubit channel.
inline DensityMatrix timebin_channel_output(const PolarizationState& input, double eta, double separation = 4.3) {
  const TimeBinState tb = prepare_timebin(input, separation);
  const DensityMatrix rho = convert_to_polarization(tb, eta);
  return rho / tb.norm_squared();
}

// ---------------------------------------------------------------------------
// Detection

struct DetectionConfig {
  double mean_photon_number = 0.75;  ///< photons per pulse in the time-bin qubit
  double channel_efficiency = 0.11;
  double rep_rate = 1000.0;          ///< Hz
  double gate = 2.0;                 ///< ns
  double integration_time = 1.0;     ///< s
  double dark_rate = 0.0;            ///< counts/s

  void validate() const {
    if (!(mean_photon_number >= 0.0) || !(rep_rate >= 0.0) || !(gate >= 0.0) || !(dark_rate >= 0.0) ||
        !(integration_time >= 0.0)) {
      throw InputError("detection parameters must be nonnegative");
    }
    if (!(channel_efficiency > 0.0 && channel_efficiency <= 1.0)) {
      throw InputError("channel efficiency must lie in (0, 1]");
    }
  }
};

struct CountRecord {
  MubLabel prep = MubLabel::H;
  MubLabel analyzer = MubLabel::H;
  std::uint64_t counts = 0;
  double duration = 0.0;  ///< s
};

/// Per-stream seed derived from a top-level seed; streams are independent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_a), static_cast<std::uint32_t>(stream_a >> 32),
                    static_cast<std::uint32_t>(stream_b), static_cast<std::uint32_t>(stream_b >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

inline std::uint64_t sample_poisson(double mean, std::mt19937_64& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InputError("Poisson mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

enum class CountMode {
  poisson,   ///< sample from a Poisson law with the expected mean
  expected,  ///< round the expected mean (noiseless mode)
};

/// Expected detected counts for one (prep, analyzer) setting:
///
///   rep T [ <n> eff p_detect + noise_rate / rep + dark_rate gate ]
///
/// The noise rate is already a per-second detected rate at the laser
/// repetition rate, so it enters per pulse as noise_rate / rep. Dark counts
/// are continuous and are scaled by the gate width.
inline double expected_counts(MubLabel prep, MubLabel analyzer, const DetectionConfig& det, const PumpConfig& pump,
                              const NoiseModelConfig& noise, const KerrMediumConfig& medium) {
  det.validate();
  noise.validate();
  const double eta = conversion_efficiency(medium, pump);
  const DensityMatrix rho = timebin_channel_output(mub_state(prep), eta);
  const double p_detect = detection_probability(rho, analyzer);
  const double pulses = det.rep_rate * det.integration_time;
  const double noise_per_pulse =
      det.rep_rate > 0.0 ? noise_rate(noise, pump.energy, analyzer, pump.polarization_angle) / det.rep_rate : 0.0;
  const double dark_per_pulse = det.dark_rate * det.gate * 1e-9;
  return pulses * (det.mean_photon_number * det.channel_efficiency * p_detect + noise_per_pulse + dark_per_pulse);
}

inline CountRecord simulate_counts(MubLabel prep, MubLabel analyzer, const DetectionConfig& det,
                                   const PumpConfig& pump, const NoiseModelConfig& noise,
                                   const KerrMediumConfig& medium, std::uint64_t rng_seed,
                                   CountMode mode = CountMode::poisson) {
  if (!(det.integration_time > 0.0)) throw InputError("integration time must be positive");
  const double mean = expected_counts(prep, analyzer, det, pump, noise, medium);
  CountRecord rec{prep, analyzer, 0, det.integration_time};
  if (mode == CountMode::expected) {
    rec.counts = static_cast<std::uint64_t>(std::llround(mean));
  } else {
    std::mt19937_64 rng(rng_seed);
    rec.counts = sample_poisson(mean, rng);
  }
  return rec;
}

}  // namespace oks
