#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace l12ds {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class MatrixKind {
  GaussianNormalized,  ///< i.i.d. N(0,1) entries, columns scaled to unit norm
  GaussianRaw,         ///< i.i.d. N(0, 1/m) entries
  OversampledDCT,      ///< cos(2*pi*xi_j*i/F)/sqrt(m), one xi_j ~ U[0,1] per row
};

struct MatrixSpec {
  MatrixKind kind = MatrixKind::GaussianNormalized;
  Index rows = 0;
  Index cols = 0;
  int refinement = 1;  ///< F; only meaningful for OversampledDCT
};

struct SenseMatrix {
  MatrixXd entries;
  MatrixKind kind = MatrixKind::GaussianNormalized;
  int refinement = 1;
  std::uint64_t seed = 0;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

enum class SignalScheme {
  UnitEnergyGaussian,  ///< N(0,1) nonzeros, then ||x0||_2 = 1
  UniformInflated,     ///< xi*(1+|c|), xi ~ U(-1,1), c ~ N(0,1)
};

struct GroundTruth {
  VectorXd x0;
  std::vector<Index> support;  ///< sorted ascending
  SignalScheme scheme = SignalScheme::UnitEnergyGaussian;
};

struct GaussianNoise {
  double sigma = 0.0;
};

/// Symmetric alpha-stable law with characteristic function
/// exp(i*location*w - scale^alpha * |w|^alpha).
struct StableNoise {
  double alpha = 1.0;
  double scale = 0.0;
  double location = 0.0;
};

struct UniformNoise {
  double half_width = 0.0;
};

using NoiseLaw = std::variant<GaussianNoise, StableNoise, UniformNoise>;

struct NoiseSpec {
  NoiseLaw law = GaussianNoise{};
  std::uint64_t seed = 0;
};

/// The scale parameter of a law: sigma, gamma or the uniform half-width.
double noise_level(const NoiseLaw& law);
/// "gaussian", "sas" or "uniform".
std::string noise_kind_name(const NoiseLaw& law);
std::string matrix_kind_name(MatrixKind kind);
MatrixKind parse_matrix_kind(const std::string& name);
std::string signal_scheme_name(SignalScheme scheme);  ///< "unit_energy_gaussian", "uniform_inflated"
SignalScheme parse_signal_scheme(const std::string& name);
/// Throws ParameterError when the law's parameters are out of range. A zero
/// Gaussian or uniform level is accepted and yields noiseless measurements.
void validate(const NoiseLaw& law);

struct MeasurementEnsemble {
  SenseMatrix matrix;
  GroundTruth truth;
  VectorXd noise;
  VectorXd b;
  NoiseLaw noise_law = GaussianNoise{};
  std::uint64_t noise_seed = 0;
};

SenseMatrix gen_matrix(const MatrixSpec& spec, std::uint64_t seed);
GroundTruth gen_signal(Index n, Index s, SignalScheme scheme, std::uint64_t seed);
VectorXd gen_noise(Index m, const NoiseSpec& spec);

/// One draw from the standardized symmetric alpha-stable law
/// (Chambers-Mallows-Stuck with skewness zero), from a uniform angle in
/// (-pi/2, pi/2) and a unit exponential.
double cms_symmetric_stable(double alpha, double angle, double exponential);

/// b = A*x0 + e.
MeasurementEnsemble assemble(SenseMatrix matrix, GroundTruth truth, VectorXd noise,
                             NoiseLaw law = GaussianNoise{}, std::uint64_t noise_seed = 0);

/// Draws matrix, signal and noise from independent streams of one trial seed.
MeasurementEnsemble make_ensemble(const MatrixSpec& matrix, Index sparsity, SignalScheme scheme,
                                  const NoiseLaw& noise, std::uint64_t seed);

/// Maximum absolute normalized inner product between distinct columns.
double coherence(const MatrixXd& a);

/// Mean of ||A^T e||_inf over `trials` independent (A, e) draws; trial k uses
/// seed base_seed + k.
double residual_correlation_stat(const MatrixSpec& matrix, const NoiseLaw& noise, int trials,
                                 std::uint64_t base_seed = 0);

}  // namespace l12ds
