#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oks/kerr.hpp"
#include "oks/simulation.hpp"

using namespace oks;
using std::numbers::pi;

namespace {

// Crossed-polarizer transmission of an H probe through an element, computed
// with explicit 2x2 arithmetic: |<V| M |H>|^2 = |M(1,0)|^2.
double crossed_transmission(const OpticalElement& e) { return std::norm(e.matrix()(1, 0)); }

// Retarder written out element by element: R(t) diag(1, exp(-i d)) R(-t).
std::complex<double> retarder_vh(double t, double d) {
  const std::complex<double> e = std::polar(1.0, -d);
  return std::sin(t) * std::cos(t) * (1.0 - e);
}

}  // namespace

TEST(NonlinearPhase, LinearAndInvertible) {
  const KerrMediumConfig m;
  EXPECT_EQ(nonlinear_phase(m, 0.0), 0.0);
  EXPECT_NEAR(nonlinear_phase(m, 2e14), 2.0 * nonlinear_phase(m, 1e14), 1e-12);
  const double i_pi = intensity_for_phase(m, pi);
  // Independent evaluation of the inverse: lambda / (2 n2 L).
  EXPECT_NEAR(i_pi, 710e-9 / (2.0 * 6.2e-20 * 8e-3), 1e-6 * i_pi);
  EXPECT_NEAR(nonlinear_phase(m, i_pi), pi, 1e-12);
  EXPECT_THROW(nonlinear_phase(m, -1.0), InputError);
}

TEST(ShutterEfficiency, Examples) {
  EXPECT_NEAR(shutter_efficiency(pi / 4, pi), 1.0, 1e-15);
  EXPECT_EQ(shutter_efficiency(0.0, 1.3), 0.0);
  EXPECT_NEAR(shutter_efficiency(pi / 4, pi / 2), 0.5, 1e-15);
}

TEST(OksElement, Examples) {
  EXPECT_TRUE(equal_up_to_phase(apply(oks_element(0.7, 0.0), PolarizationState(0.3, 0.4)), PolarizationState(0.3, 0.4)));
  EXPECT_TRUE(equal_up_to_phase(apply(oks_element(pi / 4, pi), mub_state(MubLabel::H)), mub_state(MubLabel::V)));
}

TEST(OksElement, ClosedFormOnGrid) {
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double theta = pi * i / 19.0;
      const double dphi = 2.0 * pi * j / 19.0;
      const auto e = oks_element(theta, dphi);
      EXPECT_TRUE(e.is_unitary());
      EXPECT_NEAR(crossed_transmission(e), shutter_efficiency(theta, dphi), 1e-12);
      EXPECT_NEAR(std::abs(e.matrix()(1, 0) - retarder_vh(theta, dphi)), 0.0, 1e-14);
    }
  }
}

TEST(PeakPhase, Calibration) {
  PumpConfig p;
  EXPECT_NEAR(peak_phase_from_energy(p), pi, 1e-15);
  p.energy = 0.0;
  EXPECT_EQ(peak_phase_from_energy(p), 0.0);
  p.energy = 420.0;
  EXPECT_NEAR(peak_phase_from_energy(p), pi / 2, 1e-15);
  EXPECT_NEAR(shutter_efficiency(p.polarization_angle, peak_phase_from_energy(p)), 0.5, 1e-12);
  p.e_pi = 0.0;
  EXPECT_THROW(peak_phase_from_energy(p), InputError);
}

TEST(ConversionEfficiency, CapAtOperatingPoint) {
  EXPECT_DOUBLE_EQ(conversion_efficiency(KerrMediumConfig{}, PumpConfig{}), 0.97);
}

TEST(DelayScan, ExamplesAndNarrowing) {
  PumpConfig pump;
  std::vector<double> delays;
  for (int k = -300; k <= 300; ++k) delays.push_back(k * 0.01);

  const auto inst = delay_scan(pump, std::nullopt, delays);
  EXPECT_NEAR(inst[300].y, 1.0, 1e-12);
  EXPECT_NEAR(delay_scan(pump, std::nullopt, std::vector<double>{40.0})[0].y, 0.0, 1e-6);

  pump.energy = 0.9 * pump.e_pi;
  const PulseEnvelope probe{PulseShape::gaussian, 0.27, 0.0, 1.0};
  EXPECT_LT(measured_fwhm(delay_scan(pump, probe, delays)), 1.15);
  EXPECT_LT(measured_fwhm(delay_scan(pump, std::nullopt, delays)), 1.15);
  EXPECT_THROW(delay_scan(pump, std::nullopt, std::vector<double>{}), InputError);
}

TEST(DelayScan, FullPhaseGaussianKeepsPumpWidth) {
  // At a pi peak, sin^2(phi/2) = 1/2 exactly where phi = pi/2, the pump half max.
  PumpConfig pump;
  pump.envelope = {PulseShape::gaussian, 1.15, 0.0, 1.0};
  std::vector<double> delays;
  for (int k = -300; k <= 300; ++k) delays.push_back(k * 0.01);
  EXPECT_NEAR(measured_fwhm(delay_scan(pump, std::nullopt, delays)), 1.15, 0.0115);
}

TEST(NoiseRate, Examples) {
  NoiseModelConfig n;
  n.rate_at_ref = 40.0;
  EXPECT_NEAR(noise_rate(n, 840.0, 0.3, 0.3), 40.0, 1e-12);
  EXPECT_NEAR(noise_rate(n, 840.0, 0.3 + pi / 2, 0.3), 0.0, 1e-12);
  EXPECT_NEAR(noise_rate(n, 1680.0, 0.3, 0.3), 320.0, 1e-9);
  n.pump_pol_following = false;
  EXPECT_NEAR(noise_rate(n, 840.0, 0.3 + pi / 2, 0.3), 40.0, 1e-12);
  EXPECT_THROW(noise_rate(n, -1.0, 0.0, 0.0), InputError);
}

TEST(NoiseRate, MubAnalyzersMatchLinearProjection) {
  NoiseModelConfig n;
  n.rate_at_ref = 1.0;
  EXPECT_NEAR(noise_rate(n, 840.0, MubLabel::D, pi / 4), 1.0, 1e-12);
  EXPECT_NEAR(noise_rate(n, 840.0, MubLabel::A, pi / 4), 0.0, 1e-12);
  EXPECT_NEAR(noise_rate(n, 840.0, MubLabel::H, pi / 4), 0.5, 1e-12);
  EXPECT_NEAR(noise_rate(n, 840.0, MubLabel::R, pi / 4), 0.5, 1e-12);
  EXPECT_NEAR(noise_rate(n, 840.0, MubLabel::V, 0.2), noise_rate(n, 840.0, pi / 2, 0.2), 1e-12);
}

TEST(Snr, Examples) {
  EXPECT_NEAR(snr(920.0, 100.0), 9.2, 1e-12);
  EXPECT_EQ(snr(5.0, 5.0), 1.0);
  EXPECT_THROW(snr(5.0, 0.0), InputError);
}

TEST(NoiseCalibration, HitsTargetSnr) {
  const KerrMediumConfig medium;
  const PumpConfig pump;
  DetectionConfig det;
  det.mean_photon_number = 1.17;
  const double signal = characterization_signal_rate(1.17, det, medium, pump);
  EXPECT_NEAR(signal, 1000.0 * 1.17 * 0.11 * 0.97, 1e-9);

  NoiseModelConfig n;
  n.rate_at_ref = calibrate_noise_rate(9.2, signal, n, pump, pi / 2);
  const double noise = noise_rate(n, pump.energy, pi / 2, pump.polarization_angle);
  EXPECT_NEAR(snr(signal + noise, noise), 9.2, 1e-12);
  EXPECT_THROW(calibrate_noise_rate(1.0, signal, n, pump, pi / 2), InputError);
  EXPECT_THROW(calibrate_noise_rate(9.2, signal, n, pump, pump.polarization_angle + pi / 2), InputError);
}

// Properties.

TEST(KerrProperties, EfficiencyPeriodicAndBounded) {
  for (int i = 0; i <= 90; ++i) {
    const double theta = pi * i / 90.0;
    for (int j = 0; j <= 40; ++j) {
      const double dphi = 2.0 * pi * j / 40.0;
      const double eta = shutter_efficiency(theta, dphi);
      EXPECT_GE(eta, 0.0);
      EXPECT_LE(eta, 1.0);
      EXPECT_NEAR(eta, shutter_efficiency(theta + pi / 2, dphi), 1e-12);
      EXPECT_NEAR(eta, shutter_efficiency(theta + pi, dphi), 1e-12);
    }
  }
}

TEST(KerrProperties, OksElementUnitaryEverywhere) {
  for (int i = 0; i < 37; ++i) {
    for (int j = 0; j < 37; ++j) EXPECT_TRUE(oks_element(0.1 * i - 1.5, 0.2 * j).is_unitary());
  }
}

TEST(KerrProperties, DelayScanSymmetricAboutPeak) {
  PumpConfig pump;
  const PulseEnvelope probe{PulseShape::gaussian, 0.27, 0.0, 1.0};
  std::vector<double> delays;
  for (int k = -150; k <= 150; ++k) delays.push_back(k * 0.02);
  const auto trace = delay_scan(pump, probe, delays);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    EXPECT_NEAR(trace[k].y, trace[trace.size() - 1 - k].y, 1e-9);
    EXPECT_GE(trace[k].y, 0.0);
    EXPECT_LE(trace[k].y, 1.0);
  }
}
