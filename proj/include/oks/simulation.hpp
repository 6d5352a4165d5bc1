/**
 * @file simulation.hpp
 * @brief End-to-end experiment simulation: noise calibration, the 36-setting
 *        tomography run, and fidelity as a function of pump energy.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oks/kerr.hpp"
#include "oks/timebin.hpp"
#include "oks/tomography.hpp"

namespace oks {

/// Everything that determines the detected counts of one tomography setting.
struct ChannelSetup {
  DetectionConfig detection;
  PumpConfig pump;
  NoiseModelConfig noise;
  KerrMediumConfig medium;
};

/// Signal rate (counts/s) of the single-bin shutter characterization: an
/// H-polarized probe pulse rotated into a V analyzer.
inline double characterization_signal_rate(double mean_photon_number, const DetectionConfig& det,
                                           const KerrMediumConfig& medium, const PumpConfig& pump) {
  return det.rep_rate * mean_photon_number * det.channel_efficiency * conversion_efficiency(medium, pump);
}

/// Noise rate at the reference energy (analyzer parallel to the pump) that
/// makes (signal + noise) / noise equal `target_snr` in the characterization
/// geometry (pump at `pump.energy`, analyzer at `analyzer_angle`).
inline double calibrate_noise_rate(double target_snr, double signal_rate, const NoiseModelConfig& shape,
                                   const PumpConfig& pump, double analyzer_angle) {
  if (!(target_snr > 1.0)) throw InputError("target SNR must exceed 1");
  NoiseModelConfig unit = shape;
  unit.rate_at_ref = 1.0;
  const double per_unit = noise_rate(unit, pump.energy, analyzer_angle, pump.polarization_angle);
  if (!(per_unit > 1e-12)) throw InputError("analyzer blocks all noise; SNR calibration impossible");
  return signal_rate / ((target_snr - 1.0) * per_unit);
}

/// The 36 records of one tomography run. Setting (s, m) samples with seed
/// derive_seed(seed, 6 s + m).
inline TomographyDataset simulate_dataset(const ChannelSetup& setup, std::uint64_t seed,
                                          CountMode mode = CountMode::poisson) {
  TomographyDataset data;
  data.records.reserve(36);
  for (MubLabel s : kMubLabels) {
    for (MubLabel m : kMubLabels) {
      const std::uint64_t setting = index_of(s) * 6 + index_of(m);
      data.records.push_back(simulate_counts(s, m, setup.detection, setup.pump, setup.noise, setup.medium,
                                             derive_seed(seed, setting), mode));
    }
  }
  return data;
}

/// Exact outcome probabilities of the simulated channel, including noise, with
/// the same per-basis normalization used on counts.
inline ProbabilityTable expected_probabilities(const ChannelSetup& setup) {
  std::array<std::array<double, 6>, 6> raw{};
  for (MubLabel s : kMubLabels) {
    for (MubLabel m : kMubLabels) {
      raw[index_of(s)][index_of(m)] =
          expected_counts(s, m, setup.detection, setup.pump, setup.noise, setup.medium);
    }
  }
  ProbabilityTable p{};
  for (MubLabel s : kMubLabels) {
    for (MubLabel m : kMubLabels) {
      const double total = raw[index_of(s)][index_of(m)] + raw[index_of(s)][index_of(orthogonal(m))];
      if (!(total > 0.0)) throw ReconstructionError("no expected counts in an analyzer basis");
      p[index_of(s)][index_of(m)] = raw[index_of(s)][index_of(m)] / total;
    }
  }
  return p;
}

struct EnergyFidelityPoint {
  double energy = 0.0;  ///< nJ
  double eta = 0.0;
  double f_proc = 0.0;
  double f_avg = 0.0;
};

/// Full simulate -> reconstruct -> fidelity chain at each pump energy. Energy
/// point k uses seed derive_seed(seed, k, 1).
inline std::vector<EnergyFidelityPoint> fidelity_vs_energy(std::span<const double> energies,
                                                           const ChannelSetup& setup, std::uint64_t seed,
                                                           CountMode mode = CountMode::poisson,
                                                           const ReconstructionOptions& opt = {}) {
  if (energies.empty()) throw InputError("energy list is empty");
  std::vector<EnergyFidelityPoint> trace;
  trace.reserve(energies.size());
  for (std::size_t k = 0; k < energies.size(); ++k) {
    ChannelSetup at = setup;
    at.pump.energy = energies[k];
    const TomographyDataset data = simulate_dataset(at, derive_seed(seed, k, 1), mode);
    const double f_proc = process_fidelity(ProcessTensor::identity(), reconstruct_chi(data, opt));
    trace.push_back({energies[k], conversion_efficiency(at.medium, at.pump), f_proc, average_fidelity(f_proc)});
  }
  return trace;
}

}  // namespace oks
