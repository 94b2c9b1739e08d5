#include "l12ds/ensemble.hpp"

#include "l12ds/errors.hpp"
#include "l12ds/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace l12ds {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double noise_level(const NoiseLaw& law) {
  return std::visit(overloaded{[](const GaussianNoise& g) { return g.sigma; },
                               [](const StableNoise& s) { return s.scale; },
                               [](const UniformNoise& u) { return u.half_width; }},
                    law);
}

std::string noise_kind_name(const NoiseLaw& law) {
  return std::visit(overloaded{[](const GaussianNoise&) { return std::string("gaussian"); },
                               [](const StableNoise&) { return std::string("sas"); },
                               [](const UniformNoise&) { return std::string("uniform"); }},
                    law);
}

std::string matrix_kind_name(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::GaussianNormalized:
      return "gaussian_normalized";
    case MatrixKind::GaussianRaw:
      return "gaussian";
    case MatrixKind::OversampledDCT:
      return "dct";
  }
  return "unknown";
}

MatrixKind parse_matrix_kind(const std::string& name) {
  if (name == "gaussian_normalized") return MatrixKind::GaussianNormalized;
  if (name == "gaussian") return MatrixKind::GaussianRaw;
  if (name == "dct") return MatrixKind::OversampledDCT;
  throw ParameterError("unknown matrix kind '" + name + "'");
}

std::string signal_scheme_name(SignalScheme scheme) {
  return scheme == SignalScheme::UnitEnergyGaussian ? "unit_energy_gaussian" : "uniform_inflated";
}

SignalScheme parse_signal_scheme(const std::string& name) {
  if (name == "unit_energy_gaussian") return SignalScheme::UnitEnergyGaussian;
  if (name == "uniform_inflated") return SignalScheme::UniformInflated;
  throw ParameterError("unknown signal scheme '" + name + "'");
}

void validate(const NoiseLaw& law) {
  std::visit(overloaded{[](const GaussianNoise& g) {
                          if (!(g.sigma >= 0.0)) throw ParameterError("gaussian noise needs sigma >= 0");
                        },
                        [](const StableNoise& s) {
                          if (!(s.alpha > 0.0 && s.alpha <= 2.0))
                            throw ParameterError("stable noise needs 0 < alpha <= 2");
                          if (!(s.scale > 0.0)) throw ParameterError("stable noise needs scale > 0");
                          if (!std::isfinite(s.location))
                            throw ParameterError("stable noise location must be finite");
                        },
                        [](const UniformNoise& u) {
                          if (!(u.half_width >= 0.0))
                            throw ParameterError("uniform noise needs half-width >= 0");
                        }},
             law);
}

SenseMatrix gen_matrix(const MatrixSpec& spec, std::uint64_t seed) {
  const Index m = spec.rows;
  const Index n = spec.cols;
  if (m < 1 || n <= m) {
    throw DimensionError("sensing matrix must satisfy 1 <= m < n (got m=" + std::to_string(m) +
                         ", n=" + std::to_string(n) + ")");
  }
  SenseMatrix out;
  out.kind = spec.kind;
  out.refinement = spec.refinement;
  out.seed = seed;
  out.entries.resize(m, n);

  Rng rng(seed, Stream::Matrix);
  switch (spec.kind) {
    case MatrixKind::GaussianNormalized: {
      // Row-major draw order keeps the stream layout independent of storage.
      for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n; ++i) out.entries(j, i) = rng.normal();
      for (Index i = 0; i < n; ++i) {
        const double norm = out.entries.col(i).norm();
        out.entries.col(i) /= norm;
      }
      break;
    }
    case MatrixKind::GaussianRaw: {
      const double sd = 1.0 / std::sqrt(static_cast<double>(m));
      for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n; ++i) out.entries(j, i) = sd * rng.normal();
      break;
    }
    case MatrixKind::OversampledDCT: {
      if (spec.refinement < 1) throw ParameterError("DCT refinement factor must be >= 1");
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      const double f = static_cast<double>(spec.refinement);
      for (Index j = 0; j < m; ++j) {
        const double xi = rng.uniform();
        // Column i carries frequency i = 0..n-1; column 0 is constant.
        for (Index i = 0; i < n; ++i) {
          out.entries(j, i) =
              scale * std::cos(2.0 * std::numbers::pi * xi * static_cast<double>(i) / f);
        }
      }
      break;
    }
  }
  return out;
}

GroundTruth gen_signal(Index n, Index s, SignalScheme scheme, std::uint64_t seed) {
  if (n < 1) throw DimensionError("signal length must be positive");
  if (s < 1 || s > n) {
    throw ParameterError("sparsity must satisfy 1 <= s <= n (got s=" + std::to_string(s) +
                         ", n=" + std::to_string(n) + ")");
  }
  GroundTruth out;
  out.scheme = scheme;
  out.x0 = VectorXd::Zero(n);

  // Partial Fisher-Yates shuffle for a uniformly random s-subset.
  Rng support_rng(seed, Stream::Support);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < s; ++i) {
    const auto j = i + static_cast<Index>(support_rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  out.support.assign(perm.begin(), perm.begin() + s);
  std::sort(out.support.begin(), out.support.end());

  Rng rng(seed, Stream::Signal);
  switch (scheme) {
    case SignalScheme::UnitEnergyGaussian: {
      double norm = 0.0;
      do {
        for (Index i : out.support) out.x0(i) = rng.normal();
        norm = out.x0.norm();
      } while (norm == 0.0);
      out.x0 /= norm;
      break;
    }
    case SignalScheme::UniformInflated: {
      for (Index i : out.support) {
        double xi;
        do {
          xi = rng.uniform(-1.0, 1.0);
        } while (xi == -1.0 || xi == 0.0);
        const double c = rng.normal();
        out.x0(i) = xi * (1.0 + std::abs(c));
      }
      break;
    }
  }
  return out;
}

double cms_symmetric_stable(double alpha, double angle, double exponential) {
  if (alpha == 1.0) return std::tan(angle);
  const double a = alpha * angle;
  return std::sin(a) / std::pow(std::cos(angle), 1.0 / alpha) *
         std::pow(std::cos(angle - a) / exponential, (1.0 - alpha) / alpha);
}

VectorXd gen_noise(Index m, const NoiseSpec& spec) {
  if (m < 1) throw DimensionError("noise length must be positive");
  validate(spec.law);
  Rng rng(spec.seed, Stream::Noise);
  VectorXd e(m);
  std::visit(overloaded{[&](const GaussianNoise& g) {
                          for (Index j = 0; j < m; ++j) e(j) = g.sigma * rng.normal();
                        },
                        [&](const StableNoise& s) {
                          for (Index j = 0; j < m; ++j) {
                            const double angle = std::numbers::pi * (rng.uniform_open() - 0.5);
                            const double w = rng.exponential();
                            e(j) = s.location + s.scale * cms_symmetric_stable(s.alpha, angle, w);
                          }
                        },
                        [&](const UniformNoise& u) {
                          for (Index j = 0; j < m; ++j) e(j) = u.half_width * (2.0 * rng.uniform() - 1.0);
                        }},
             spec.law);
  return e;
}

MeasurementEnsemble assemble(SenseMatrix matrix, GroundTruth truth, VectorXd noise, NoiseLaw law,
                             std::uint64_t noise_seed) {
  if (truth.x0.size() != matrix.cols()) {
    throw DimensionError("signal length " + std::to_string(truth.x0.size()) +
                         " does not match matrix columns " + std::to_string(matrix.cols()));
  }
  if (noise.size() != matrix.rows()) {
    throw DimensionError("noise length " + std::to_string(noise.size()) +
                         " does not match matrix rows " + std::to_string(matrix.rows()));
  }
  MeasurementEnsemble out;
  out.b = matrix.entries * truth.x0;
  out.b += noise;
  out.matrix = std::move(matrix);
  out.truth = std::move(truth);
  out.noise = std::move(noise);
  out.noise_law = law;
  out.noise_seed = noise_seed;
  return out;
}

MeasurementEnsemble make_ensemble(const MatrixSpec& matrix, Index sparsity, SignalScheme scheme,
                                  const NoiseLaw& noise, std::uint64_t seed) {
  auto a = gen_matrix(matrix, seed);
  auto truth = gen_signal(matrix.cols, sparsity, scheme, seed);
  auto e = gen_noise(matrix.rows, NoiseSpec{noise, seed});
  return assemble(std::move(a), std::move(truth), std::move(e), noise, seed);
}

double coherence(const MatrixXd& a) {
  if (a.cols() < 2) throw DimensionError("coherence needs at least two columns");
  const VectorXd norms = a.colwise().norm();
  if ((norms.array() == 0.0).any()) throw DegenerateMatrixError("coherence of a matrix with a zero column");
  const MatrixXd normalized = a * norms.cwiseInverse().asDiagonal();
  MatrixXd gram = normalized.transpose() * normalized;
  gram.diagonal().setZero();
  return std::min(1.0, gram.cwiseAbs().maxCoeff());
}

double residual_correlation_stat(const MatrixSpec& matrix, const NoiseLaw& noise, int trials,
                                 std::uint64_t base_seed) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  double sum = 0.0;
  for (int k = 0; k < trials; ++k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    const auto a = gen_matrix(matrix, seed);
    const auto e = gen_noise(matrix.rows, NoiseSpec{noise, seed});
    sum += (a.entries.transpose() * e).cwiseAbs().maxCoeff();
  }
  return sum / trials;
}

}  // namespace l12ds
