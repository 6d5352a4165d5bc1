/**
 * @file tomography.hpp
 * @brief Single-qubit quantum process tomography in the Pauli basis.
 *
 * A channel is written E(rho) = sum_ij chi_ij s_i rho s_j with
 * s = {1, X, Y, Z}. Trace preservation reads sum_ij chi_ij s_j s_i = 1, which
 * also fixes Tr chi = 1; the identity channel is chi = e_00 e_00^T.
 *
 * Reconstruction takes the 6 x 6 table of preparation/analysis outcomes,
 * normalizes each basis pair of outcomes to a probability, solves the linear
 * model p(m|s) = sum_ij chi_ij <m|s_i|s><s|s_j|m> in least squares over a
 * Hermitian parametrization of chi, and then projects onto the CPTP set.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oks/errors.hpp"
#include "oks/polarization.hpp"
#include "oks/timebin.hpp"

namespace oks {

using Matrix4c = Eigen::Matrix4cd;

enum class PauliLabel { I, X, Y, Z };

inline constexpr std::array<PauliLabel, 4> kPauliLabels{PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z};

constexpr std::string_view to_string(PauliLabel p) {
  switch (p) {
    case PauliLabel::I: return "I";
    case PauliLabel::X: return "X";
    case PauliLabel::Y: return "Y";
    case PauliLabel::Z: return "Z";
  }
  return "?";
}

inline const Matrix2c& pauli(std::size_t index) {
  static const std::array<Matrix2c, 4> basis = [] {
    std::array<Matrix2c, 4> b;
    const cdouble i{0.0, 1.0};
    b[0] << 1.0, 0.0, 0.0, 1.0;
    b[1] << 0.0, 1.0, 1.0, 0.0;
    b[2] << 0.0, -i, i, 0.0;
    b[3] << 1.0, 0.0, 0.0, -1.0;
    return b;
  }();
  return basis.at(index);
}

inline const Matrix2c& pauli(PauliLabel p) { return pauli(static_cast<std::size_t>(p)); }

namespace detail {

inline Matrix4c hermitian_part(const Matrix4c& m) { return 0.5 * (m + m.adjoint()); }

// Linear map chi -> sum_ij chi_ij s_j s_i as a 4 x 16 matrix on column-major
// vec(chi), producing column-major vec of the 2 x 2 result.
inline const Eigen::Matrix<cdouble, 4, 16>& tp_map() {
  static const Eigen::Matrix<cdouble, 4, 16> map = [] {
    Eigen::Matrix<cdouble, 4, 16> t;
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 4; ++i) {
        const Matrix2c prod = pauli(static_cast<std::size_t>(j)) * pauli(static_cast<std::size_t>(i));
        t.col(j * 4 + i) = Eigen::Map<const Eigen::Vector4cd>(prod.data());
      }
    }
    return t;
  }();
  return map;
}

inline const Eigen::Matrix<cdouble, 16, 4>& tp_map_pinv() {
  static const Eigen::Matrix<cdouble, 16, 4> pinv = [] {
    const auto& t = tp_map();
    const Eigen::Matrix4cd gram = t * t.adjoint();
    return Eigen::Matrix<cdouble, 16, 4>(t.adjoint() * gram.inverse());
  }();
  return pinv;
}

}  // namespace detail

/// 4 x 4 process matrix indexed by Pauli labels {I, X, Y, Z}.
class ProcessTensor {
 public:
  ProcessTensor() : chi_(Matrix4c::Zero()) {}
  explicit ProcessTensor(const Matrix4c& chi) : chi_(chi) {}

  static ProcessTensor identity() {
    Matrix4c chi = Matrix4c::Zero();
    chi(0, 0) = 1.0;
    return ProcessTensor(chi);
  }

  /// Unitary channel U rho U^dagger, U = s_k.
  static ProcessTensor pauli_channel(PauliLabel p) {
    Matrix4c chi = Matrix4c::Zero();
    const auto k = static_cast<Eigen::Index>(p);
    chi(k, k) = 1.0;
    return ProcessTensor(chi);
  }

  const Matrix4c& matrix() const { return chi_; }
  cdouble operator()(PauliLabel i, PauliLabel j) const {
    return chi_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  bool is_hermitian(double tol = 1e-10) const { return (chi_ - chi_.adjoint()).cwiseAbs().maxCoeff() <= tol; }

  Eigen::Vector4d eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(detail::hermitian_part(chi_), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double min_eigenvalue() const { return eigenvalues().minCoeff(); }

  /// sum_ij chi_ij s_j s_i as a 2 x 2 matrix.
  Matrix2c trace_map() const {
    const Eigen::Vector4cd v = detail::tp_map() * Eigen::Map<const Eigen::Matrix<cdouble, 16, 1>>(chi_.data());
    return Eigen::Map<const Matrix2c>(v.data());
  }

  /// Frobenius norm of sum_ij chi_ij s_j s_i - 1.
  double trace_preservation_residual() const { return (trace_map() - Matrix2c::Identity()).norm(); }

 private:
  Matrix4c chi_;
};

/// sum_ij chi_ij s_i rho s_j.
inline DensityMatrix channel_apply(const ProcessTensor& chi, const DensityMatrix& rho) {
  if (!chi.is_hermitian(1e-9)) throw InputError("process matrix must be Hermitian");
  DensityMatrix out = DensityMatrix::Zero();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const cdouble c = chi.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (c == cdouble{}) continue;
      out += c * pauli(i) * rho * pauli(j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data

/// Outcome probabilities indexed [prep][analyzer] in MubLabel order.
using ProbabilityTable = std::array<std::array<double, 6>, 6>;

struct TomographyDataset {
  std::vector<CountRecord> records;

  /// Exactly one record for each of the 36 (prep, analyzer) pairs.
  void validate() const {
    if (records.size() != 36) {
      throw ReconstructionError("tomography dataset needs 36 records, got " + std::to_string(records.size()));
    }
    std::array<bool, 36> seen{};
    for (const auto& r : records) {
      const std::size_t k = index_of(r.prep) * 6 + index_of(r.analyzer);
      if (seen[k]) {
        throw ReconstructionError("duplicate record for prep " + std::string(to_string(r.prep)) + ", analyzer " +
                                  std::string(to_string(r.analyzer)));
      }
      seen[k] = true;
    }
  }

  std::uint64_t counts(MubLabel prep, MubLabel analyzer) const {
    for (const auto& r : records) {
      if (r.prep == prep && r.analyzer == analyzer) return r.counts;
    }
    throw ReconstructionError("missing record for prep " + std::string(to_string(prep)) + ", analyzer " +
                              std::string(to_string(analyzer)));
  }
};

/// p(m|s) = N(m|s) / (N(m|s) + N(m_perp|s)): each analyzer basis is normalized
/// separately, which cancels per-prep intensity drift.
inline ProbabilityTable estimate_probabilities(const TomographyDataset& data) {
  data.validate();
  std::array<std::array<double, 6>, 6> raw{};
  for (const auto& r : data.records) raw[index_of(r.prep)][index_of(r.analyzer)] = static_cast<double>(r.counts);

  ProbabilityTable p{};
  for (MubLabel s : kMubLabels) {
    for (MubLabel m : kMubLabels) {
      const double n = raw[index_of(s)][index_of(m)];
      const double total = n + raw[index_of(s)][index_of(orthogonal(m))];
      if (!(total > 0.0)) {
        throw ReconstructionError("zero total counts for prep " + std::string(to_string(s)) + " in the basis of " +
                                  std::string(to_string(m)));
      }
      p[index_of(s)][index_of(m)] = n / total;
    }
  }
  return p;
}

/// Exact outcome probabilities of a channel given as a process matrix.
inline ProbabilityTable forward_probabilities(const ProcessTensor& chi) {
  ProbabilityTable p{};
  for (MubLabel s : kMubLabels) {
    const DensityMatrix out = channel_apply(chi, pure_density(mub_state(s)));
    for (MubLabel m : kMubLabels) {
      const Vector2c v = mub_state(m).vector();
      p[index_of(s)][index_of(m)] = (v.adjoint() * out * v)(0, 0).real();
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Reconstruction

enum class ProjectionMode {
  /// Alternating (Dykstra) projection onto PSD ∩ {trace preserving}: the
  /// Frobenius-nearest CPTP process matrix.
  alternating,
  /// Spectral clipping, unit-trace renormalization and a scalar rescale of the
  /// trace map. Cheaper; trace preservation holds only approximately.
  clip,
};

constexpr std::string_view to_string(ProjectionMode mode) {
  return mode == ProjectionMode::alternating ? "alternating" : "clip";
}

inline std::optional<ProjectionMode> parse_projection_mode(std::string_view text) {
  if (text == "alternating") return ProjectionMode::alternating;
  if (text == "clip") return ProjectionMode::clip;
  return std::nullopt;
}

struct ReconstructionOptions {
  ProjectionMode projection = ProjectionMode::alternating;
  double tp_tolerance = 1e-11;
  int max_iterations = 200000;
};

namespace detail {

// Real 16-parameter Hermitian basis of 4 x 4 matrices: diagonal units, then
// symmetric and antisymmetric pairs for i < j.
inline const std::array<Matrix4c, 16>& hermitian_basis() {
  static const std::array<Matrix4c, 16> basis = [] {
    std::array<Matrix4c, 16> b;
    std::size_t k = 0;
    for (int i = 0; i < 4; ++i) {
      b[k] = Matrix4c::Zero();
      b[k++](i, i) = 1.0;
    }
    const cdouble im{0.0, 1.0};
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        b[k] = Matrix4c::Zero();
        b[k](i, j) = 1.0;
        b[k++](j, i) = 1.0;
        b[k] = Matrix4c::Zero();
        b[k](i, j) = im;
        b[k++](j, i) = -im;
      }
    }
    return b;
  }();
  return basis;
}

using DesignMatrix = Eigen::Matrix<double, 36, 16>;

inline const DesignMatrix& design_matrix() {
  static const DesignMatrix a = [] {
    DesignMatrix m;
    const auto& basis = hermitian_basis();
    for (MubLabel s : kMubLabels) {
      const Vector2c ket_s = mub_state(s).vector();
      for (MubLabel an : kMubLabels) {
        const Vector2c ket_m = mub_state(an).vector();
        // c_ij = <m|s_i|s><s|s_j|m>
        Matrix4c c;
        for (int i = 0; i < 4; ++i) {
          const cdouble left = (ket_m.adjoint() * pauli(static_cast<std::size_t>(i)) * ket_s)(0, 0);
          for (int j = 0; j < 4; ++j) {
            const cdouble right = (ket_s.adjoint() * pauli(static_cast<std::size_t>(j)) * ket_m)(0, 0);
            c(i, j) = left * right;
          }
        }
        const auto row = static_cast<Eigen::Index>(index_of(s) * 6 + index_of(an));
        for (std::size_t k = 0; k < 16; ++k) {
          m(row, static_cast<Eigen::Index>(k)) = basis[k].cwiseProduct(c).sum().real();
        }
      }
    }
    return m;
  }();
  return a;
}

inline Matrix4c project_psd(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(m));
  const Eigen::Vector4d clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix4c project_trace_preserving(const Matrix4c& m) {
  using Vec16 = Eigen::Matrix<cdouble, 16, 1>;
  const Vec16 x = Eigen::Map<const Vec16>(m.data());
  const Eigen::Vector4cd target(1.0, 0.0, 0.0, 1.0);
  const Vec16 y = x - tp_map_pinv() * (tp_map() * x - target);
  return hermitian_part(Eigen::Map<const Matrix4c>(y.data()));
}

inline Matrix4c project_clip(const Matrix4c& m) {
  Matrix4c p = project_psd(m);
  const double tr = p.trace().real();
  if (!(tr > 0.0)) throw ReconstructionError("process matrix has no positive spectrum");
  p /= tr;
  const Matrix2c t = ProcessTensor(p).trace_map();
  const double scale = t.trace().real() / t.squaredNorm();
  return p * scale;
}

inline Matrix4c project_alternating(const Matrix4c& m, const ReconstructionOptions& opt) {
  Matrix4c x = hermitian_part(m);
  Matrix4c correction = Matrix4c::Zero();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Matrix4c y = project_trace_preserving(x);
    const Matrix4c z = project_psd(y + correction);
    correction = y + correction - z;
    x = z;
    if (ProcessTensor(z).trace_preservation_residual() <= opt.tp_tolerance) return z;
  }
  throw ReconstructionError("CPTP projection did not converge");
}

}  // namespace detail

/// Projects a Hermitian estimate onto the CPTP set.
inline ProcessTensor project_cptp(const ProcessTensor& chi, const ReconstructionOptions& opt = {}) {
  return ProcessTensor(opt.projection == ProjectionMode::alternating ? detail::project_alternating(chi.matrix(), opt)
                                                                     : detail::project_clip(chi.matrix()));
}

/// Unconstrained least-squares estimate (Hermitian, not yet projected).
inline ProcessTensor linear_inversion(const ProbabilityTable& p) {
  const auto& a = detail::design_matrix();
  Eigen::Matrix<double, 36, 1> b;
  for (std::size_t s = 0; s < 6; ++s) {
    for (std::size_t m = 0; m < 6; ++m) {
      if (!std::isfinite(p[s][m])) throw ReconstructionError("non-finite probability");
      b(static_cast<Eigen::Index>(s * 6 + m)) = p[s][m];
    }
  }
  if (b.isZero(0.0)) throw ReconstructionError("all-zero tomography data");
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 16) throw ReconstructionError("tomography design matrix is rank deficient");
  const Eigen::Matrix<double, 16, 1> x = qr.solve(b);

  Matrix4c chi = Matrix4c::Zero();
  const auto& basis = detail::hermitian_basis();
  for (std::size_t k = 0; k < 16; ++k) chi += x(static_cast<Eigen::Index>(k)) * basis[k];
  return ProcessTensor(chi);
}

inline ProcessTensor reconstruct_chi(const ProbabilityTable& p, const ReconstructionOptions& opt = {}) {
  return project_cptp(linear_inversion(p), opt);
}

inline ProcessTensor reconstruct_chi(const TomographyDataset& data, const ReconstructionOptions& opt = {}) {
  return reconstruct_chi(estimate_probabilities(data), opt);
}

// ---------------------------------------------------------------------------
// Figures of merit

namespace detail {

// Eigenvalues below 1e-12 count as zero.
inline Matrix4c psd_sqrt(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(m));
  Eigen::Vector4d ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < 4; ++k) ev(k) = ev(k) < 1e-12 ? 0.0 : std::sqrt(ev(k));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix4c unit_trace_psd(const ProcessTensor& chi, const char* which) {
  if (!chi.is_hermitian(1e-9)) throw InputError(std::string(which) + " process matrix is not Hermitian");
  const double tr = chi.matrix().trace().real();
  if (!(tr > 0.0)) throw InputError(std::string(which) + " process matrix has nonpositive trace");
  const Matrix4c m = chi.matrix() / tr;
  if (ProcessTensor(m).min_eigenvalue() < -1e-9) {
    throw InputError(std::string(which) + " process matrix is not positive semidefinite");
  }
  return m;
}

}  // namespace detail

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 of the unit-trace matrices.
inline double process_fidelity(const ProcessTensor& chi_ideal, const ProcessTensor& chi_exp) {
  const Matrix4c a = detail::unit_trace_psd(chi_ideal, "ideal");
  const Matrix4c b = detail::unit_trace_psd(chi_exp, "experimental");
  const Matrix4c sa = detail::psd_sqrt(a);
  const Matrix4c inner = sa * b * sa;
  const double root_trace = detail::psd_sqrt(inner).trace().real();
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

/// Qubit average fidelity (2 F_proc + 1) / 3.
inline double average_fidelity(double f_proc) {
  if (!(f_proc >= 0.0 && f_proc <= 1.0)) throw InputError("process fidelity must lie in [0, 1]");
  return (2.0 * f_proc + 1.0) / 3.0;
}

// ---------------------------------------------------------------------------
// Classical thresholds

enum class Verdict { pass, fail, boundary };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::boundary: return "boundary";
  }
  return "?";
}

/// Classical average-fidelity bounds. The operating-point bound is a
/// configured constant valid for one (mean photon number, efficiency) pair.
struct ThresholdConfig {
  double single_photon_bound = 2.0 / 3.0;
  double operating_bound = 0.70;
  double operating_mean_photon = 0.75;
  double operating_efficiency = 0.11;
  double match_tolerance = 1e-9;
  double boundary_tolerance = 1e-12;
};

struct BoundVerdict {
  double bound = 0.0;
  Verdict verdict = Verdict::fail;
};

struct ThresholdReport {
  BoundVerdict single_photon;
  std::optional<BoundVerdict> operating;  ///< absent when no bound is configured for the inputs

  bool passes() const {
    return single_photon.verdict == Verdict::pass && (!operating || operating->verdict == Verdict::pass);
  }
};

/// Strict comparison: f_avg equal to a bound (within tolerance) is flagged as
/// boundary, never pass.
inline BoundVerdict compare_to_bound(double f_avg, double bound, double tol = 1e-12) {
  if (std::abs(f_avg - bound) <= tol) return {bound, Verdict::boundary};
  return {bound, f_avg > bound ? Verdict::pass : Verdict::fail};
}

inline ThresholdReport threshold_check(double f_avg, double mean_photon, double efficiency,
                                       const ThresholdConfig& cfg = {}) {
  if (!(f_avg >= 0.0 && f_avg <= 1.0)) throw InputError("average fidelity must lie in [0, 1]");
  if (!(mean_photon >= 0.0)) throw InputError("mean photon number must be nonnegative");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InputError("efficiency must lie in (0, 1]");

  ThresholdReport report;
  report.single_photon = compare_to_bound(f_avg, cfg.single_photon_bound, cfg.boundary_tolerance);
  if (std::abs(mean_photon - cfg.operating_mean_photon) <= cfg.match_tolerance &&
      std::abs(efficiency - cfg.operating_efficiency) <= cfg.match_tolerance) {
    report.operating = compare_to_bound(f_avg, cfg.operating_bound, cfg.boundary_tolerance);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Poisson Monte-Carlo uncertainty

struct DistributionSummary {
  double mean = 0.0;
  double fwhm = 0.0;
};

/// Width at half maximum of a histogram of `samples` over [min, max], between
/// the outermost half-max crossings, interpolated linearly between bin
/// centers. Zero for a degenerate sample.
inline double histogram_fwhm(std::span<const double> samples, std::size_t bins = 50) {
  if (samples.empty()) throw InputError("no samples");
  if (bins < 3) throw InputError("need at least 3 histogram bins");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  if (hi - lo <= 1e-15 * scale) return 0.0;

  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> hist(bins, 0.0);
  for (double v : samples) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    hist[std::min(k, bins - 1)] += 1.0;
  }
  const double half = 0.5 * *std::max_element(hist.begin(), hist.end());
  auto center = [&](std::size_t k) { return lo + (static_cast<double>(k) + 0.5) * width; };
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    return center(inside) + (half - hist[inside]) * (center(outside) - center(inside)) / (hist[outside] - hist[inside]);
  };

  // Outermost half-max crossings: bin noise inside the peak cannot truncate the width.
  std::size_t first = 0;
  while (hist[first] < half) ++first;
  std::size_t last = bins - 1;
  while (hist[last] < half) --last;
  const double left = first == 0 ? lo : crossing(first, first - 1);
  const double right = last == bins - 1 ? hi : crossing(last, last + 1);
  return right - left;
}

struct UncertaintyOptions {
  std::size_t histogram_bins = 50;
  ReconstructionOptions reconstruction{};
  ProcessTensor ideal = ProcessTensor::identity();
};

struct UncertaintySummary {
  DistributionSummary f_proc;
  DistributionSummary f_avg;
  std::size_t trials = 0;
};

/// Resamples every count from a Poisson law with mean equal to the observed
/// count, reconstructs each trial, and summarizes the fidelity distributions.
/// Trial k draws from its own seed derive_seed(seed, k), so the result does not
/// depend on evaluation order.
inline UncertaintySummary poisson_uncertainty(const TomographyDataset& data, std::size_t trials, std::uint64_t seed,
                                              const UncertaintyOptions& opt = {}) {
  if (trials < 100) throw InputError("poisson_uncertainty needs at least 100 trials");
  data.validate();

  std::vector<double> f_proc(trials);
  std::vector<double> f_avg(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    TomographyDataset resampled = data;
    for (auto& r : resampled.records) r.counts = sample_poisson(static_cast<double>(r.counts), rng);
    const ProcessTensor chi = reconstruct_chi(resampled, opt.reconstruction);
    f_proc[k] = process_fidelity(opt.ideal, chi);
    f_avg[k] = average_fidelity(f_proc[k]);
  }

  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  UncertaintySummary out;
  out.trials = trials;
  out.f_proc = {mean(f_proc), histogram_fwhm(f_proc, opt.histogram_bins)};
  out.f_avg = {mean(f_avg), histogram_fwhm(f_avg, opt.histogram_bins)};
  return out;
}

}  // namespace oks
