#include "l12ds/ensemble.hpp"
#include "l12ds/errors.hpp"
#include "l12ds/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace l12ds;

namespace {

// Asymptotic Kolmogorov survival function for the two-sample statistic.
double ks_p_value(double d, std::size_t n1, std::size_t n2) {
  const double ne = static_cast<double>(n1) * n2 / static_cast<double>(n1 + n2);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int j = 1; j <= 100; ++j) p += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lam * lam);
  return std::clamp(p, 0.0, 1.0);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("gaussian normalized columns have unit norm") {
  for (Index m : {1, 3, 8, 40}) {
    for (Index n : {2, 16, 100}) {
      if (n <= m) continue;
      const auto a = gen_matrix({MatrixKind::GaussianNormalized, m, n, 1}, 1);
      for (Index j = 0; j < n; ++j) CHECK(std::abs(a.entries.col(j).norm() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  for (auto kind : {MatrixKind::GaussianNormalized, MatrixKind::GaussianRaw, MatrixKind::OversampledDCT}) {
    const MatrixSpec spec{kind, 12, 30, 5};
    const auto e1 = make_ensemble(spec, 4, SignalScheme::UniformInflated, StableNoise{1.3, 0.1, 0.0}, 77);
    const auto e2 = make_ensemble(spec, 4, SignalScheme::UniformInflated, StableNoise{1.3, 0.1, 0.0}, 77);
    CHECK(e1.matrix.entries == e2.matrix.entries);
    CHECK(e1.truth.x0 == e2.truth.x0);
    CHECK(e1.noise == e2.noise);
    CHECK(e1.b == e2.b);
    const auto e3 = make_ensemble(spec, 4, SignalScheme::UniformInflated, StableNoise{1.3, 0.1, 0.0}, 78);
    CHECK(e1.matrix.entries != e3.matrix.entries);
  }
}

TEST_CASE("dct entries follow the cosine construction") {
  const auto a = gen_matrix({MatrixKind::OversampledDCT, 6, 9, 4}, 3);
  // every row is cos(2 pi xi k / F) / sqrt(m) for k = 0..n-1, so column 0 is constant
  for (Index i = 0; i < 6; ++i) {
    CHECK(a.entries(i, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
    const double c1 = a.entries(i, 1) * std::sqrt(6.0);
    const double c2 = a.entries(i, 2) * std::sqrt(6.0);
    CHECK(c2 == doctest::Approx(2.0 * c1 * c1 - 1.0).epsilon(1e-12));
  }
}

TEST_CASE("unit energy signal") {
  const auto g = gen_signal(16, 3, SignalScheme::UnitEnergyGaussian, 5);
  CHECK(std::abs(g.x0.norm() - 1.0) <= 1e-12);
  CHECK((g.x0.array() != 0.0).count() == 3);
  CHECK(g.support.size() == 3);
  CHECK(std::is_sorted(g.support.begin(), g.support.end()));

  const auto dense = gen_signal(16, 16, SignalScheme::UnitEnergyGaussian, 5);
  CHECK(dense.support.size() == 16);
  CHECK((dense.x0.array() != 0.0).count() == 16);

  CHECK_THROWS_AS(gen_signal(16, 0, SignalScheme::UnitEnergyGaussian, 5), ParameterError);
  CHECK_THROWS_AS(gen_signal(16, 17, SignalScheme::UnitEnergyGaussian, 5), ParameterError);
}

TEST_CASE("uniform inflated magnitudes match direct sampling") {
  std::vector<double> lib;
  for (std::uint64_t seed = 0; lib.size() < 10000; ++seed) {
    const auto g = gen_signal(256, 8, SignalScheme::UniformInflated, seed);
    for (Index i : g.support) {
      CHECK(std::abs(g.x0(i)) > 0.0);
      lib.push_back(std::abs(g.x0(i)));
    }
  }
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> nrm;
  std::vector<double> ref(10000);
  for (auto& v : ref) v = std::abs(u(gen)) * (1.0 + std::abs(nrm(gen)));
  const double d = ks_statistic(lib, ref);
  CHECK(ks_p_value(d, lib.size(), ref.size()) > 0.01);
}

TEST_CASE("noise laws") {
  SUBCASE("uniform is bounded") {
    const auto e = gen_noise(100000, {UniformNoise{0.1}, 4});
    CHECK(e.cwiseAbs().maxCoeff() <= 0.1);
    CHECK(e.cwiseAbs().maxCoeff() > 0.09);
  }
  SUBCASE("stable alpha=2 is gaussian with variance 2 gamma^2") {
    const double gamma = 0.3;
    const auto e = gen_noise(1000000, {StableNoise{2.0, gamma, 0.0}, 9});
    const double mean = e.mean();
    const double var = (e.array() - mean).square().sum() / (e.size() - 1);
    CHECK(std::abs(var / (2.0 * gamma * gamma) - 1.0) < 0.05);
  }
  SUBCASE("stable alpha=1 empirical characteristic function") {
    const auto e = gen_noise(1000000, {StableNoise{1.0, 1.0, 0.0}, 10});
    for (double w : {0.5, 1.0, 2.0}) {
      std::complex<double> ecf{0.0, 0.0};
      for (Index i = 0; i < e.size(); ++i) ecf += std::polar(1.0, w * e(i));
      ecf /= static_cast<double>(e.size());
      CHECK(std::abs(ecf - std::exp(-std::abs(w))) < 0.02);
    }
  }
  SUBCASE("zero gaussian level is noiseless") {
    CHECK(gen_noise(20, {GaussianNoise{0.0}, 1}).isZero(0.0));
  }
  SUBCASE("invalid laws are rejected") {
    CHECK_THROWS_AS(validate(NoiseLaw{GaussianNoise{-1.0}}), ParameterError);
    CHECK_THROWS_AS(validate(NoiseLaw{StableNoise{2.5, 1.0, 0.0}}), ParameterError);
    CHECK_THROWS_AS(validate(NoiseLaw{StableNoise{0.0, 1.0, 0.0}}), ParameterError);
  }
}

TEST_CASE("cms transform at alpha=1 is the cauchy quantile") {
  for (double th : {-1.2, -0.3, 0.0, 0.7, 1.5}) CHECK(cms_symmetric_stable(1.0, th, 0.8) == doctest::Approx(std::tan(th)));
}

TEST_CASE("assemble forms b = A x0 + e") {
  const auto a = gen_matrix({MatrixKind::GaussianRaw, 7, 11, 1}, 2);
  const auto t = gen_signal(11, 3, SignalScheme::UnitEnergyGaussian, 2);
  const VectorXd e = gen_noise(7, {GaussianNoise{0.1}, 2});

  auto en = assemble(a, t, e);
  const VectorXd clean = a.entries * t.x0;
  CHECK((en.b - (clean + e)).cwiseAbs().maxCoeff() == 0.0);

  auto quiet = assemble(a, t, VectorXd::Zero(7));
  CHECK(quiet.b == a.entries * t.x0);

  GroundTruth zero{VectorXd::Zero(11), {}, SignalScheme::UnitEnergyGaussian};
  CHECK(assemble(a, zero, e).b == e);

  CHECK_THROWS_AS(assemble(a, t, VectorXd::Zero(6)), DimensionError);
}

TEST_CASE("coherence") {
  CHECK(coherence(MatrixXd::Identity(5, 5)) == doctest::Approx(0.0));

  MatrixXd two(2, 2);
  two << 1.0, 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
  CHECK(coherence(two) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  const MatrixXd a = gen_matrix({MatrixKind::GaussianRaw, 10, 20, 1}, 8).entries;
  const double mu = coherence(a);
  MatrixXd b = a.rowwise().reverse();
  CHECK(coherence(b) == doctest::Approx(mu).epsilon(1e-14));
  MatrixXd c = a;
  c.col(3) *= -2.5;
  c.col(7) *= 0.1;
  CHECK(coherence(c) == doctest::Approx(mu).epsilon(1e-14));
  // column order: swap columns
  MatrixXd d = a;
  d.col(0).swap(d.col(19));
  CHECK(coherence(d) == doctest::Approx(mu).epsilon(1e-14));
}

TEST_CASE("residual correlation statistic") {
  const MatrixSpec spec{MatrixKind::GaussianRaw, 16, 40, 1};
  CHECK(residual_correlation_stat(spec, GaussianNoise{0.0}, 20, 3) == 0.0);

  double last = 0.0;
  for (double sigma : {1e-3, 1e-2, 5e-2, 1e-1}) {
    const double v = residual_correlation_stat(spec, GaussianNoise{sigma}, 200, 3);
    CHECK(v >= last);
    last = v;
  }
  last = 0.0;
  for (double w : {1e-3, 1e-2, 1e-1}) {
    const double v = residual_correlation_stat(spec, UniformNoise{w}, 200, 3);
    CHECK(v >= last);
    last = v;
  }
  const double r1 = residual_correlation_stat(spec, GaussianNoise{1e-2}, 500, 3);
  const double r2 = residual_correlation_stat(spec, GaussianNoise{2e-2}, 500, 3);
  CHECK(std::abs(r2 / r1 - 2.0) < 0.02 * 2.0);
}

TEST_CASE("names round trip") {
  for (auto k : {MatrixKind::GaussianNormalized, MatrixKind::GaussianRaw, MatrixKind::OversampledDCT})
    CHECK(parse_matrix_kind(matrix_kind_name(k)) == k);
  for (auto s : {SignalScheme::UnitEnergyGaussian, SignalScheme::UniformInflated})
    CHECK(parse_signal_scheme(signal_scheme_name(s)) == s);
  CHECK_THROWS_AS(parse_matrix_kind("bogus"), ParameterError);
  CHECK_THROWS_AS(parse_signal_scheme("bogus"), ParameterError);
}

TEST_CASE("rng primitives") {
  Rng r(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.below(7) < 7u);
  }
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}
