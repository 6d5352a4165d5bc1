#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oks/simulation.hpp"
#include "oks/tomography.hpp"

using namespace oks;

namespace {

using C = std::complex<double>;

// Random channel from a Haar-ish isometry V (2r x 2): Kraus K_a = rows 2a..2a+1.
std::vector<Matrix2c> random_kraus(std::mt19937_64& rng, int rank) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd g(2 * rank, 2);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) g(i, j) = C(n(rng), n(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  const Eigen::MatrixXcd v = qr.householderQ() * Eigen::MatrixXcd::Identity(2 * rank, 2);
  std::vector<Matrix2c> k;
  for (int a = 0; a < rank; ++a) k.push_back(v.block(2 * a, 0, 2, 2));
  return k;
}

// chi_ij = sum_a c_ai conj(c_aj), with K_a = sum_i c_ai s_i and c_ai = Tr(s_i K_a) / 2.
Matrix4c chi_from_kraus(const std::vector<Matrix2c>& kraus) {
  Matrix4c chi = Matrix4c::Zero();
  for (const auto& k : kraus) {
    Eigen::Vector4cd c;
    for (std::size_t i = 0; i < 4; ++i) c(static_cast<Eigen::Index>(i)) = 0.5 * (pauli(i) * k).trace();
    chi += c * c.adjoint();
  }
  return chi;
}

Matrix2c kraus_apply(const std::vector<Matrix2c>& kraus, const Matrix2c& rho) {
  Matrix2c out = Matrix2c::Zero();
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

ProbabilityTable kraus_probabilities(const std::vector<Matrix2c>& kraus) {
  ProbabilityTable p{};
  for (MubLabel s : kMubLabels) {
    const Matrix2c out = kraus_apply(kraus, pure_density(mub_state(s)));
    for (MubLabel m : kMubLabels) {
      const Vector2c v = mub_state(m).vector();
      p[index_of(s)][index_of(m)] = (v.adjoint() * out * v)(0, 0).real();
    }
  }
  return p;
}

TomographyDataset dataset_from(const ProbabilityTable& p, double scale) {
  TomographyDataset d;
  for (MubLabel s : kMubLabels) {
    for (MubLabel m : kMubLabels) {
      d.records.push_back({s, m, static_cast<std::uint64_t>(std::llround(scale * p[index_of(s)][index_of(m)])), 1.0});
    }
  }
  return d;
}

double max_abs(const Matrix4c& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ChannelApply, Examples) {
  const DensityMatrix h = pure_density(mub_state(MubLabel::H));
  EXPECT_LE((channel_apply(ProcessTensor::identity(), h) - h).cwiseAbs().maxCoeff(), 1e-15);
  const DensityMatrix v = pure_density(mub_state(MubLabel::V));
  EXPECT_LE((channel_apply(ProcessTensor::pauli_channel(PauliLabel::X), h) - v).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ChannelApply, MatchesKrausSumOnRandomChannels) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const auto kraus = random_kraus(rng, 1 + k % 4);
    const ProcessTensor chi(chi_from_kraus(kraus));
    EXPECT_LE(chi.trace_preservation_residual(), 1e-12);
    const DensityMatrix mixed = 0.5 * DensityMatrix::Identity();
    const DensityMatrix out = channel_apply(chi, mixed);
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
    EXPECT_LE((out - kraus_apply(kraus, mixed)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix2c>(out).eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(ReconstructChi, IdentityAndPauliX) {
  const ProcessTensor id = reconstruct_chi(forward_probabilities(ProcessTensor::identity()));
  EXPECT_NEAR(id(PauliLabel::I, PauliLabel::I).real(), 1.0, 1e-6);
  Matrix4c rest = id.matrix();
  rest(0, 0) = 0.0;
  EXPECT_LE(max_abs(rest), 1e-6);

  const ProcessTensor x = reconstruct_chi(forward_probabilities(ProcessTensor::pauli_channel(PauliLabel::X)));
  EXPECT_LE(max_abs(x.matrix() - ProcessTensor::pauli_channel(PauliLabel::X).matrix()), 1e-6);
}

TEST(ReconstructChi, RandomCptpChannelsFromKrausOracle) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    const auto kraus = random_kraus(rng, 1 + k % 4);
    const Matrix4c truth = chi_from_kraus(kraus);
    for (auto mode : {ProjectionMode::alternating, ProjectionMode::clip}) {
      ReconstructionOptions opt;
      opt.projection = mode;
      const ProcessTensor chi = reconstruct_chi(kraus_probabilities(kraus), opt);
      EXPECT_LE(max_abs(chi.matrix() - truth), 1e-6) << "channel " << k << " " << to_string(mode);
    }
  }
}

TEST(ReconstructChi, CountsRoundTripThroughNormalization) {
  // Per-basis normalization means unequal per-prep totals do not bias the estimate.
  std::mt19937_64 rng(43);
  const auto kraus = random_kraus(rng, 2);
  auto data = dataset_from(kraus_probabilities(kraus), 1e9);
  for (auto& r : data.records) {
    if (r.prep == MubLabel::D) r.counts *= 3;
  }
  const ProcessTensor chi = reconstruct_chi(data);
  EXPECT_LE(max_abs(chi.matrix() - chi_from_kraus(kraus)), 1e-6);
}

TEST(ReconstructChi, Errors) {
  TomographyDataset zero = dataset_from(forward_probabilities(ProcessTensor::identity()), 0.0);
  EXPECT_THROW(reconstruct_chi(zero), ReconstructionError);

  TomographyDataset missing = dataset_from(forward_probabilities(ProcessTensor::identity()), 1000.0);
  missing.records.pop_back();
  EXPECT_THROW(reconstruct_chi(missing), ReconstructionError);

  TomographyDataset duplicate = dataset_from(forward_probabilities(ProcessTensor::identity()), 1000.0);
  duplicate.records.back() = duplicate.records.front();
  EXPECT_THROW(reconstruct_chi(duplicate), ReconstructionError);

  ProbabilityTable nan{};
  nan[0][0] = std::nan("");
  EXPECT_THROW(linear_inversion(nan), ReconstructionError);
  EXPECT_THROW(linear_inversion(ProbabilityTable{}), ReconstructionError);
}

TEST(ProcessFidelity, Examples) {
  const auto id = ProcessTensor::identity();
  EXPECT_NEAR(process_fidelity(id, id), 1.0, 1e-12);
  EXPECT_NEAR(process_fidelity(id, ProcessTensor::pauli_channel(PauliLabel::X)), 0.0, 1e-12);

  Matrix4c mix = Matrix4c::Zero();
  mix(0, 0) = 0.74;
  for (int k = 1; k < 4; ++k) mix(k, k) = 0.26 / 3.0;
  // Rank-1 ideal: F = Tr(chi_ideal chi) = chi_00.
  EXPECT_NEAR(process_fidelity(id, ProcessTensor(mix)), (id.matrix() * mix).trace().real(), 1e-12);
  EXPECT_NEAR(process_fidelity(id, ProcessTensor(mix)), 0.74, 1e-12);

  Matrix4c bad = Matrix4c::Zero();
  bad(0, 0) = 1.0;
  bad(1, 1) = -0.5;
  EXPECT_THROW(process_fidelity(id, ProcessTensor(bad)), InputError);
}

TEST(AverageFidelity, Examples) {
  EXPECT_NEAR(average_fidelity(0.740), 0.8267, 5e-5);
  EXPECT_EQ(average_fidelity(1.0), 1.0);
  EXPECT_NEAR(average_fidelity(0.0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(average_fidelity(1.1), InputError);
}

TEST(ThresholdCheck, Examples) {
  const auto pass = threshold_check(0.827, 0.75, 0.11);
  EXPECT_EQ(pass.single_photon.verdict, Verdict::pass);
  ASSERT_TRUE(pass.operating.has_value());
  EXPECT_EQ(pass.operating->verdict, Verdict::pass);
  EXPECT_TRUE(pass.passes());

  EXPECT_EQ(threshold_check(0.66, 0.75, 0.11).single_photon.verdict, Verdict::fail);
  EXPECT_EQ(threshold_check(0.70, 0.75, 0.11).operating->verdict, Verdict::boundary);
  EXPECT_FALSE(threshold_check(0.70, 0.75, 0.11).passes());

  // No operating bound is configured away from (0.75, 0.11).
  EXPECT_FALSE(threshold_check(0.9, 0.5, 0.11).operating.has_value());
  EXPECT_THROW(threshold_check(1.2, 0.75, 0.11), InputError);
}

TEST(HistogramFwhm, GaussianSample) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(200000);
  for (auto& v : x) v = n(rng);
  EXPECT_NEAR(histogram_fwhm(x, 50), 2.0 * std::sqrt(2.0 * std::log(2.0)), 0.1);
  EXPECT_EQ(histogram_fwhm(std::vector<double>(10, 0.3)), 0.0);
  EXPECT_THROW(histogram_fwhm(std::vector<double>{}), InputError);
}

TEST(PoissonUncertainty, DeterministicAndConcentrating) {
  const auto p = expected_probabilities(ChannelSetup{DetectionConfig{}, PumpConfig{}, NoiseModelConfig{}, KerrMediumConfig{}});
  const auto small = dataset_from(p, 1e3);
  const auto large = dataset_from(p, 1e6);
  const auto a = poisson_uncertainty(small, 200, 9);
  const auto b = poisson_uncertainty(small, 200, 9);
  EXPECT_EQ(a.f_proc.mean, b.f_proc.mean);
  EXPECT_EQ(a.f_proc.fwhm, b.f_proc.fwhm);
  EXPECT_LT(poisson_uncertainty(large, 200, 9).f_proc.fwhm, a.f_proc.fwhm);
  EXPECT_THROW(poisson_uncertainty(small, 99, 9), InputError);
}

TEST(PoissonUncertainty, OperatingPointWidthIsPercentLevel) {
  DetectionConfig det;
  det.integration_time = 30.0;
  const PumpConfig pump;
  const KerrMediumConfig medium;
  NoiseModelConfig noise;
  const double signal = characterization_signal_rate(1.17, det, medium, pump);
  noise.rate_at_ref = calibrate_noise_rate(9.2, signal, noise, pump, std::numbers::pi / 2);
  const ChannelSetup setup{det, pump, noise, medium};
  const auto data = simulate_dataset(setup, 77);
  const auto u = poisson_uncertainty(data, 500, 78);
  EXPECT_GT(u.f_proc.fwhm, 0.0025);
  EXPECT_LT(u.f_proc.fwhm, 0.04);
}

// Properties.

TEST(TomographyProperties, ProjectionYieldsCptp) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (int k = 0; k < 40; ++k) {
    auto p = kraus_probabilities(random_kraus(rng, 1 + k % 4));
    for (auto& row : p) {
      for (auto& v : row) v = std::clamp(v + jitter(rng), 0.0, 1.0);
    }
    const ProcessTensor raw = linear_inversion(p);
    const ProcessTensor chi = project_cptp(raw);
    EXPECT_TRUE(chi.is_hermitian(1e-10));
    EXPECT_GE(chi.min_eigenvalue(), -1e-10);
    EXPECT_LE(chi.trace_preservation_residual(), 1e-8);

    ReconstructionOptions clip;
    clip.projection = ProjectionMode::clip;
    const ProcessTensor clipped = project_cptp(raw, clip);
    EXPECT_TRUE(clipped.is_hermitian(1e-10));
    EXPECT_GE(clipped.min_eigenvalue(), -1e-10);
    // The scalar rescale can only lower the residual of the unit-trace clip.
    const ProcessTensor unit(clipped.matrix() / clipped.matrix().trace().real());
    EXPECT_LE(clipped.trace_preservation_residual(), unit.trace_preservation_residual() + 1e-15);
    EXPECT_NEAR(clipped.matrix().trace().real(), 1.0, 0.05);
  }
}

TEST(TomographyProperties, FidelityBoundsSymmetryAndIdentity) {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 50; ++k) {
    const ProcessTensor a(chi_from_kraus(random_kraus(rng, 1 + k % 4)));
    const ProcessTensor b(chi_from_kraus(random_kraus(rng, 1 + (k + 1) % 4)));
    const double fab = process_fidelity(a, b);
    EXPECT_GE(fab, 0.0);
    EXPECT_LE(fab, 1.0);
    EXPECT_NEAR(fab, process_fidelity(b, a), 1e-6);
    EXPECT_NEAR(process_fidelity(a, a), 1.0, 1e-9);
    EXPECT_LT(fab, 1.0 - 1e-9);
  }
}

TEST(TomographyProperties, AverageFidelityAffineAndMonotone) {
  double previous = average_fidelity(0.0);
  for (int k = 1; k <= 100; ++k) {
    const double f = k / 100.0;
    const double avg = average_fidelity(f);
    EXPECT_GT(avg, previous);
    EXPECT_NEAR(avg - average_fidelity(f - 0.01), 0.02 / 3.0, 1e-12);
    previous = avg;
  }
}

TEST(TomographyProperties, MonteCarloSeedDeterministic) {
  const auto data = dataset_from(forward_probabilities(ProcessTensor::identity()), 500.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = poisson_uncertainty(data, 100, seed);
    const auto b = poisson_uncertainty(data, 100, seed);
    EXPECT_EQ(a.f_avg.mean, b.f_avg.mean);
    EXPECT_EQ(a.f_avg.fwhm, b.f_avg.fwhm);
  }
}
