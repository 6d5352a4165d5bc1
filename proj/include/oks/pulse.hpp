/**
 * @file pulse.hpp
 * @brief Temporal intensity envelopes, FWHM analysis and pump-probe overlap.
 *
 * Times are in picoseconds throughout. Two envelope shapes are supported:
 *
 *  - gaussian: I(t) = I0 exp(-4 ln2 (t - c)^2 / w^2)
 *  - sinc2:    I(t) = I0 sinc^2(k (t - c)), the temporal intensity of a
 *              top-hat spectrum, with k = 2 x_half / w where sinc^2(x_half) = 1/2
 *
 * so that in both cases the intensity FWHM equals w.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "oks/errors.hpp"

namespace oks {

enum class PulseShape { gaussian, sinc2 };

constexpr std::string_view to_string(PulseShape shape) {
  return shape == PulseShape::gaussian ? "gaussian" : "sinc2";
}

inline std::optional<PulseShape> parse_pulse_shape(std::string_view text) {
  if (text == "gaussian") return PulseShape::gaussian;
  if (text == "sinc2") return PulseShape::sinc2;
  return std::nullopt;
}

struct PulseEnvelope {
  PulseShape shape = PulseShape::gaussian;
  double fwhm = 1.0;            ///< ps
  double center = 0.0;          ///< ps
  double peak_intensity = 1.0;  ///< W/m^2

  void validate() const {
    if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw InputError("pulse fwhm must be positive");
    if (!(peak_intensity >= 0.0)) throw InputError("pulse peak intensity must be nonnegative");
  }
};

namespace detail {

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

inline double solve_sinc2_half_max() {
  // sinc^2 is monotone decreasing on (0, pi), crossing 1/2 once.
  auto f = [](double x) { return sinc(x) * sinc(x) - 0.5; };
  std::uintmax_t iterations = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.5, 3.0, boost::math::tools::eps_tolerance<double>(),
                                                    iterations);
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// The x > 0 at which sinc^2(x) = 1/2 (about 1.39156).
inline double sinc2_half_max_argument() {
  static const double value = detail::solve_sinc2_half_max();
  return value;
}

inline double intensity_at(const PulseEnvelope& pulse, double t) {
  const double dt = t - pulse.center;
  switch (pulse.shape) {
    case PulseShape::gaussian:
      return pulse.peak_intensity * std::exp(-4.0 * std::numbers::ln2 * dt * dt / (pulse.fwhm * pulse.fwhm));
    case PulseShape::sinc2: {
      const double k = 2.0 * sinc2_half_max_argument() / pulse.fwhm;
      const double s = detail::sinc(k * dt);
      return pulse.peak_intensity * s * s;
    }
  }
  return 0.0;
}

struct TracePoint {
  double x = 0.0;
  double y = 0.0;
};

using Trace = std::vector<TracePoint>;

/// Full width at half maximum of a sampled curve, linearly interpolating the
/// half-max crossings on either side of the global maximum. `trace` must be
/// sorted by x.
inline double measured_fwhm(std::span<const TracePoint> trace) {
  if (trace.size() < 3) throw AnalysisError("trace too short for a FWHM");
  auto peak = std::max_element(trace.begin(), trace.end(),
                               [](const TracePoint& a, const TracePoint& b) { return a.y < b.y; });
  const double half = 0.5 * peak->y;
  if (!(peak->y > 0.0)) throw AnalysisError("trace has no positive maximum");

  const std::size_t ipeak = static_cast<std::size_t>(peak - trace.begin());
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const TracePoint& a = trace[inside];
    const TracePoint& b = trace[outside];
    return a.x + (half - a.y) * (b.x - a.x) / (b.y - a.y);
  };

  std::optional<double> left;
  for (std::size_t i = ipeak; i > 0; --i) {
    if (trace[i - 1].y < half) {
      left = crossing(i, i - 1);
      break;
    }
  }
  std::optional<double> right;
  for (std::size_t i = ipeak; i + 1 < trace.size(); ++i) {
    if (trace[i + 1].y < half) {
      right = crossing(i, i + 1);
      break;
    }
  }
  if (!left || !right) throw AnalysisError("trace does not cross half maximum on both sides");
  return *right - *left;
}

struct QuadratureOptions {
  double step = 1e-3;              ///< ps (1 fs)
  double half_width_factor = 5.0;  ///< window = +/- factor * (fwhm_pump + fwhm_probe)
};

/// Phase seen by a finite-duration probe when the pump is delayed by `delay`:
///
///   peak_phase * ∫ I_pump(t - delay) I_probe(t) dt / (I_pump,peak ∫ I_probe(t) dt)
///
/// evaluated with the trapezoidal rule on a grid symmetric about the probe center.
inline double effective_phase_vs_delay(const PulseEnvelope& pump, const PulseEnvelope& probe,
                                       double peak_phase, double delay, const QuadratureOptions& quad = {}) {
  if (peak_phase < 0.0) throw InputError("peak phase must be nonnegative");
  pump.validate();
  probe.validate();
  if (!(quad.step > 0.0) || !(quad.half_width_factor > 0.0)) throw InputError("bad quadrature options");
  if (pump.peak_intensity == 0.0) return 0.0;

  const double half_width = quad.half_width_factor * (pump.fwhm + probe.fwhm);
  const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * half_width / quad.step));
  const double h = 2.0 * half_width / static_cast<double>(intervals);

  double overlap = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = probe.center - half_width + h * static_cast<double>(i);
    const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
    const double q = intensity_at(probe, t);
    overlap += w * intensity_at(pump, t - delay) * q;
    norm += w * q;
  }
  if (norm == 0.0) return 0.0;
  return peak_phase * overlap / (pump.peak_intensity * norm);
}

/// Delta-function probe limit of effective_phase_vs_delay: the pump profile itself.
inline double instantaneous_phase_vs_delay(const PulseEnvelope& pump, double peak_phase, double delay,
                                           double probe_center = 0.0) {
  if (peak_phase < 0.0) throw InputError("peak phase must be nonnegative");
  pump.validate();
  if (pump.peak_intensity == 0.0) return 0.0;
  return peak_phase * intensity_at(pump, probe_center - delay) / pump.peak_intensity;
}

}  // namespace oks
