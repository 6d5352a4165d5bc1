/**
 * @file polarization.hpp
 * @brief Jones-calculus states and elements for a single polarization qubit.
 *
 * Basis convention: |H> = (1, 0), |V> = (0, 1). The six tomography states are
 *   D = (H + V)/sqrt2,  A = (H - V)/sqrt2,  R = (H + iV)/sqrt2,  L = (H - iV)/sqrt2.
 *
 * Retarder convention: an element with fast axis at angle t (from H) and
 * retardance d leaves the fast-axis component unchanged and multiplies the
 * slow-axis component by exp(-i d):
 *
 *   J(t, d) = P_t + exp(-i d) P_t⊥,   P_t = u u^T,  u = (cos t, sin t).
 *
 * Under this convention the half-wave plate is the real reflection
 * [[cos 2t, sin 2t], [sin 2t, -cos 2t]] and a quarter-wave plate at pi/4 maps
 * H to R up to a global phase. Only probabilities are observable, so the sign
 * choice never changes a measured quantity.
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "oks/errors.hpp"

namespace oks {

using cdouble = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

/// Labels of the three mutually unbiased polarization bases.
enum class MubLabel { H, V, D, A, R, L };

inline constexpr std::array<MubLabel, 6> kMubLabels{MubLabel::H, MubLabel::V, MubLabel::D,
                                                    MubLabel::A, MubLabel::R, MubLabel::L};

constexpr std::string_view to_string(MubLabel label) {
  switch (label) {
    case MubLabel::H: return "H";
    case MubLabel::V: return "V";
    case MubLabel::D: return "D";
    case MubLabel::A: return "A";
    case MubLabel::R: return "R";
    case MubLabel::L: return "L";
  }
  return "?";
}

constexpr std::size_t index_of(MubLabel label) { return static_cast<std::size_t>(label); }

inline std::optional<MubLabel> parse_mub_label(std::string_view text) {
  for (MubLabel label : kMubLabels) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

/// The other member of the label's basis (H<->V, D<->A, R<->L).
constexpr MubLabel orthogonal(MubLabel label) {
  switch (label) {
    case MubLabel::H: return MubLabel::V;
    case MubLabel::V: return MubLabel::H;
    case MubLabel::D: return MubLabel::A;
    case MubLabel::A: return MubLabel::D;
    case MubLabel::R: return MubLabel::L;
    case MubLabel::L: return MubLabel::R;
  }
  return label;
}

/// Basis index 0 = {H,V}, 1 = {D,A}, 2 = {R,L}.
constexpr std::size_t basis_of(MubLabel label) { return index_of(label) / 2; }

/// Two-component Jones vector in the H/V basis. Not necessarily normalized:
/// lossy elements produce sub-normalized states.
class PolarizationState {
 public:
  constexpr PolarizationState() = default;
  constexpr PolarizationState(cdouble amp_h, cdouble amp_v) : h_(amp_h), v_(amp_v) {}
  explicit PolarizationState(const Vector2c& vec) : h_(vec(0)), v_(vec(1)) {}

  /// Linear polarization at `angle` radians from H.
  static PolarizationState linear(double angle) { return {std::cos(angle), std::sin(angle)}; }

  constexpr cdouble amp_h() const { return h_; }
  constexpr cdouble amp_v() const { return v_; }

  Vector2c vector() const { return Vector2c(h_, v_); }

  double norm_squared() const { return std::norm(h_) + std::norm(v_); }

  bool is_normalized(double tol = 1e-12) const { return std::abs(norm_squared() - 1.0) <= tol; }

  PolarizationState normalized() const {
    const double n = std::sqrt(norm_squared());
    if (n == 0.0) throw InputError("cannot normalize a zero polarization state");
    return {h_ / n, v_ / n};
  }

  /// <this|other>
  cdouble overlap(const PolarizationState& other) const {
    return std::conj(h_) * other.h_ + std::conj(v_) * other.v_;
  }

  PolarizationState scaled(cdouble factor) const { return {h_ * factor, v_ * factor}; }

 private:
  cdouble h_{};
  cdouble v_{};
};

/// States compared up to a global phase: |<a|b>| = |a||b| within `tol`.
inline bool equal_up_to_phase(const PolarizationState& a, const PolarizationState& b,
                              double tol = 1e-12) {
  const double na = std::sqrt(a.norm_squared());
  const double nb = std::sqrt(b.norm_squared());
  if (std::abs(na - nb) > tol) return false;
  if (na == 0.0) return true;
  return std::abs(std::abs(a.overlap(b)) - na * nb) <= tol;
}

inline PolarizationState mub_state(MubLabel label) {
  using std::numbers::sqrt2;
  constexpr double r = 1.0 / sqrt2;
  constexpr cdouble i{0.0, 1.0};
  switch (label) {
    case MubLabel::H: return {1.0, 0.0};
    case MubLabel::V: return {0.0, 1.0};
    case MubLabel::D: return {r, r};
    case MubLabel::A: return {r, -r};
    case MubLabel::R: return {r, i * r};
    case MubLabel::L: return {r, -i * r};
  }
  throw InputError("unknown polarization label");
}

inline PolarizationState mub_state(std::string_view label) {
  auto parsed = parse_mub_label(label);
  if (!parsed) throw InputError("unknown polarization label '" + std::string(label) + "'");
  return mub_state(*parsed);
}

/// 2x2 complex Jones operator.
class OpticalElement {
 public:
  OpticalElement() : m_(Matrix2c::Identity()) {}
  explicit OpticalElement(const Matrix2c& m) : m_(m) {}

  static OpticalElement identity() { return OpticalElement(); }

  const Matrix2c& matrix() const { return m_; }

  bool is_unitary(double tol = 1e-12) const {
    return ((m_ * m_.adjoint()) - Matrix2c::Identity()).cwiseAbs().maxCoeff() <= tol;
  }
  bool is_hermitian(double tol = 1e-12) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }
  bool is_projector(double tol = 1e-12) const {
    return (m_ * m_ - m_).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  Matrix2c m_;
};

/// second ∘ first: the element equivalent to passing through `first`, then `second`.
inline OpticalElement compose(const OpticalElement& second, const OpticalElement& first) {
  return OpticalElement(second.matrix() * first.matrix());
}

inline PolarizationState apply(const OpticalElement& element, const PolarizationState& state) {
  return PolarizationState(Vector2c(element.matrix() * state.vector()));
}

/// Linear retarder: fast axis at `axis_angle`, slow axis delayed by `retardance`.
inline OpticalElement retarder(double axis_angle, double retardance) {
  const double c = std::cos(axis_angle);
  const double s = std::sin(axis_angle);
  Matrix2c fast;
  fast << c * c, c * s, c * s, s * s;
  const Matrix2c slow = Matrix2c::Identity() - fast;
  return OpticalElement(fast + std::polar(1.0, -retardance) * slow);
}

inline OpticalElement half_waveplate(double axis_angle) {
  // Closed form of retarder(axis, pi); avoids exp(-i pi) rounding.
  const double c = std::cos(2.0 * axis_angle);
  const double s = std::sin(2.0 * axis_angle);
  Matrix2c m;
  m << c, s, s, -c;
  return OpticalElement(m);
}

inline OpticalElement quarter_waveplate(double axis_angle) {
  return retarder(axis_angle, std::numbers::pi / 2.0);
}

/// Projector onto linear polarization (cos t, sin t).
inline OpticalElement linear_polarizer(double pass_angle) {
  const double c = std::cos(pass_angle);
  const double s = std::sin(pass_angle);
  Matrix2c m;
  m << c * c, c * s, c * s, s * s;
  return OpticalElement(m);
}

/// |<m|s>|^2 for a normalized state.
inline double projection_probability(MubLabel analyzer, const PolarizationState& state) {
  if (!state.is_normalized(1e-9)) {
    throw InputError("projection_probability requires a normalized state");
  }
  return std::norm(mub_state(analyzer).overlap(state));
}

}  // namespace oks
