#include "l12ds/errors.hpp"
#include "l12ds/theory.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace l12ds;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Second transcription of the (l2,l1) bound, written from the displayed
// statement with every quantity expanded in place.
struct Printed31 {
  bool admissible = false;
  double value = 0.0;
};

Printed31 printed_common(int s, double t, double al, double dlb, double dub, int m, double eta, double tail) {
  const double a = (std::sqrt(t * s) - al) / (std::sqrt(double(s)) + al);
  const double b = 8 * (2 * std::sqrt(t * s) - al) / (17 * al * (2 * std::sqrt(t) + 1));
  Printed31 out;
  if (!(a > 2 && b > 1 && a * b < a + b)) return out;
  if (!((b + 1) * dub + a * b * dlb < a * b - b - 1)) return out;
  const double rho = 1 - dlb - (1 + dub) / a;
  const double tau = 1 / (2 * std::sqrt(t)) * (17 * (2 * std::sqrt(t) + 1) * (1 + dub) / (8 * a * rho) + 1);
  const double rs = std::sqrt(double(s));
  if (!(rs - al * tau > 0)) return out;
  out.admissible = true;
  out.value = rs * tau / (rs - al * tau) * 2 * tail / rs +
              2 * (2 * std::sqrt(t) + 1) * ((1 + dub) + a * rho) * m * s /
                  (std::sqrt(t) * (rs - al * tau) * (1 + dub) * rho * rho) * eta;
  return out;
}

double printed_mu(int s, double t, double al) {
  const double k = std::ceil(t * s - 1e-9);
  const double rs = std::sqrt(double(s));
  const double c = 1 + std::sqrt(2.0) / 2;
  const double q = (rs + al) * (rs + al) * (c * c * (k - s - std::sqrt(k - s)) + 1) /
                   (s * (t - 1) * (t - 1) * (rs - 1) * (rs - 1));
  return 1 / (std::sqrt(1 + q) + 1);
}

double printed_classical(int s, double t, double al, double d, double eta, double tail) {
  const double mu = printed_mu(s, t, al);
  const double k = std::ceil(t * s - 1e-9);
  const double rs = std::sqrt(double(s));
  const double den = mu - mu * mu - (mu - 1) * (mu - 1) * d;
  const double first = (1 + std::sqrt((al + rs) / rs + al * al / (4 * s)) + (al + std::sqrt(2.0)) / (2 * rs)) *
                       2 * (1 - mu) * mu * std::sqrt(k) / den * eta;
  const double bracket =
      (rs + std::sqrt(al * rs + s + al * al / 4) + (al + std::sqrt(2.0)) / 2) *
          (2 * d * (1 - 2 * mu) / ((rs + al) * den) + std::sqrt(2 * d * (1 - 2 * mu) / ((rs + al) * (rs + al) * den))) +
      std::sqrt(2.0 * s) / 2;
  return first + bracket * tail / rs;
}

}  // namespace

TEST_CASE("exact rip on simple matrices") {
  CHECK(rip_l2l2_exact(MatrixXd::Identity(5, 5), 3).delta == doctest::Approx(0.0).epsilon(1e-14));
  MatrixXd a = MatrixXd::Random(6, 9);
  a.colwise().normalize();
  CHECK(rip_l2l2_exact(a, 1).delta < 1e-14);
  CHECK_THROWS_AS(rip_l2l2_exact(MatrixXd::Random(10, 40), 10, 1000), BudgetError);
  CHECK_THROWS_AS(rip_l2l2_exact(a, 0), ParameterError);
}

TEST_CASE("exact rip matches the independent sweep") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    MatrixXd a(6, 12);
    for (auto& v : a.reshaped()) v = nd(gen) / std::sqrt(6.0);
    double last = 0.0;
    for (Index s = 1; s <= 4; ++s) {
      const double d = rip_l2l2_exact(a, s, 2'000'000, 1 + rep % 3).delta;
      CHECK(std::abs(d - oracle::rip_sweep(a, static_cast<int>(s))) <= 1e-10);
      CHECK(d >= last);
      last = d;
    }
    // signed column permutation
    MatrixXd b = a.rowwise().reverse();
    b.col(2) *= -1.0;
    CHECK(rip_l2l2_exact(b, 2).delta == doctest::Approx(rip_l2l2_exact(a, 2).delta).epsilon(1e-12));
  }
}

TEST_CASE("sampled l1 rip") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  MatrixXd a(8, 16);
  for (auto& v : a.reshaped()) v = nd(gen) / 8.0;

  const auto one = rip_l2l1_sampled(a, 1, 10, 0);
  const VectorXd col_l1 = a.cwiseAbs().colwise().sum();
  CHECK(one.delta_lb == doctest::Approx(std::max(0.0, 1.0 - col_l1.minCoeff())));
  CHECK(one.delta_ub == doctest::Approx(std::max(0.0, col_l1.maxCoeff() - 1.0)));
  CHECK(one.is_estimate);

  MatrixXd single(3, 1);
  single << 0.5, -0.25, 0.75;
  const auto s1 = rip_l2l1_sampled(single, 1, 1, 0);
  CHECK(s1.delta_ub == doctest::Approx(0.5));
  CHECK(s1.delta_lb == 0.0);

  const auto few = rip_l2l1_sampled(a, 2, 100000, 3);
  const auto many = rip_l2l1_sampled(a, 2, 1000000, 3);
  CHECK(many.delta_lb >= few.delta_lb);
  CHECK(many.delta_ub >= few.delta_ub);
  CHECK(many.samples == 1000000);
}

TEST_CASE("common-delta constants") {
  const auto c = common_delta_constants(9, 16.0, 1.0, 0.0, 0.0);
  CHECK(c.a == doctest::Approx(11.0 / 4.0).epsilon(1e-15));
  CHECK(c.b == doctest::Approx(184.0 / 153.0).epsilon(1e-15));
  CHECK(c.rho == doctest::Approx(1.0 - 4.0 / 11.0).epsilon(1e-15));
  CHECK(c.hypotheses_hold());

  double prev = 1e300;
  for (double al : {0.1, 0.3, 0.6, 1.0}) {
    const double a = common_delta_constants(9, 16.0, al, 0.0, 0.0).a;
    CHECK(a < prev);
    prev = a;
  }
  CHECK_THROWS_AS(common_delta_constants(3, 2.5, 1.0, 0.0, 0.0), ParameterError);
  CHECK_THROWS_AS(common_delta_constants(3, 2.0, 1.5, 0.0, 0.0), ParameterError);
}

TEST_CASE("remark threshold and the general condition") {
  CHECK(common_delta_threshold(9, 16.0, 1.0) == doctest::Approx(676.0 / 3372.0).epsilon(1e-14));
  for (Index s = 7; s <= 14; ++s) {
    const double rs = std::sqrt(double(s));
    const double simple = (192.0 * s - 305.0 * rs - 137.0) / (320.0 * s + 113.0 * rs + 153.0);
    CHECK(std::abs(common_delta_threshold(s, 16.0, 1.0) - simple) < 1e-12);
    CHECK(check_condition_31(s, 16.0, 1.0, 0.0, 0.0).holds);
    for (int i = 0; i <= 1000; ++i) {
      const double d = 0.5 * i / 1000.0;
      if (std::abs(d - simple) < 1e-12) continue;
      CHECK(check_condition_31(s, 16.0, 1.0, d, d).holds == (d < simple));
    }
  }
  // both constants at 1 never satisfy the inequality
  for (Index s = 1; s <= 20; ++s)
    for (int k = 1; k <= 40; ++k)
      for (double al : {0.05, 0.3, 0.7, 1.0}) CHECK(!check_condition_31(s, double(k), al, 1.0, 1.0).holds);
}

TEST_CASE("(l2,l1) bound against a second transcription") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const int s = 1 + static_cast<int>(gen() % 20);
    const int k = s + 1 + static_cast<int>(gen() % (30 * s));
    const double t = double(k) / s;
    const double al = 0.02 + 0.98 * u(gen);
    const double dlb = 0.3 * u(gen), dub = 0.3 * u(gen);
    const int m = 16 + static_cast<int>(gen() % 200);
    const double eta = u(gen), tail = u(gen);
    const auto ref = printed_common(s, t, al, dlb, dub, m, eta, tail);
    if (ref.admissible) {
      const auto got = common_delta_bound(s, t, al, dlb, dub, m, eta, tail);
      CHECK(std::abs(got.value - ref.value) <= 1e-12 * ref.value);
      const auto proof = common_delta_bound(s, t, al, dlb, dub, m, eta, tail, Bound31Form::Proof);
      CHECK(std::abs(proof.value - ref.value) <= 1e-12 * ref.value);
      ++compared;
    } else {
      CHECK_THROWS_AS(common_delta_bound(s, t, al, dlb, dub, m, eta, tail), ConditionViolatedError);
    }
  }
  MESSAGE(compared << " admissible points compared");
  CHECK(compared > 50);
}

TEST_CASE("(l2,l1) bound structure") {
  CHECK(common_delta_bound(9, 16.0, 1.0, 0.1, 0.1, 64, 0.0, 0.0).value == 0.0);
  const double b0 = common_delta_bound(9, 16.0, 1.0, 0.1, 0.1, 64, 0.0, 0.3).value;
  const double b1 = common_delta_bound(9, 16.0, 1.0, 0.1, 0.1, 64, 0.01, 0.3).value;
  const double b2 = common_delta_bound(9, 16.0, 1.0, 0.1, 0.1, 64, 0.02, 0.3).value;
  CHECK(b2 - b0 == doctest::Approx(2.0 * (b1 - b0)).epsilon(1e-12));

  const auto r = printed_common(9, 16.0, 1.0, 0.1, 0.1, 64, 0.01, 0.0);
  REQUIRE(r.admissible);
  CHECK(common_delta_bound(9, 16.0, 1.0, 0.1, 0.1, 64, 0.01, 0.0).value == doctest::Approx(r.value).epsilon(1e-13));
  CHECK_THROWS_AS(common_delta_bound(9, 16.0, 1.0, 0.3, 0.3, 64, 0.01, 0.0), ConditionViolatedError);
}

TEST_CASE("classical rip constant and threshold") {
  const double r2 = std::sqrt(2.0);
  const double c = 1 + r2 / 2;
  const double remark = 1 / std::sqrt(1 + (r2 + 1) * (r2 + 1) * (c * c * (2 - r2) + 1) / (2 * (r2 - 1) * (r2 - 1)));
  CHECK(classical_threshold(2, 2.0, 1.0) == doctest::Approx(remark).epsilon(1e-14));

  CHECK(classical_threshold(4, 2.0, 1.0) < classical_threshold(4, 2.0, 0.1));
  CHECK(check_condition_41(4, 3.0, 0.5, 0.0));
  CHECK(!check_condition_41(4, 3.0, 0.5, 1.0));
  CHECK_THROWS_AS(classical_mu(1, 3.0, 1.0), ParameterError);
  CHECK_THROWS_AS(classical_mu(4, 2.5, 1.0), ParameterError);
  CHECK(ceil_ts(3, 7.0 / 3.0) == 7);
  CHECK(ceil_ts(3, 2.5) == 8);

  for (Index s = 2; s <= 30; s += 3) {
    double prev = -1.0;
    for (double t : {3.0, 4.0, 6.0, 9.0, 14.0, 20.0}) {
      for (double al : {0.1, 0.5, 1.0}) {
        const double mu = classical_mu(s, t, al);
        CHECK((mu > 0.0 && mu < 0.5));
        CHECK(mu == doctest::Approx(printed_mu(int(s), t, al)).epsilon(1e-13));
        CHECK(classical_threshold(s, t, al) < 1.0);
      }
      const double th = classical_threshold(s, t, 1.0);
      CHECK(th > prev);
      prev = th;
    }
  }
  // unrounded product equals the rounded one when ts is an integer
  CHECK(classical_threshold_unrounded(4, 3.0, 0.7) == doctest::Approx(classical_threshold(4, 3.0, 0.7)));
}

TEST_CASE("classical bound against a second transcription") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int s = 2 + static_cast<int>(gen() % 40);
    const double t = (i % 5 == 0) ? 2.0 : 3.0 + 17.0 * u(gen);
    const double al = 0.01 + 0.99 * u(gen);
    const double d = 0.999 * u(gen) * classical_threshold(s, t, al);
    const double eta = u(gen), tail = u(gen);
    const double ref = printed_classical(s, t, al, d, eta, tail);
    const auto got = classical_bound(s, t, al, d, eta, tail);
    CHECK(std::abs(got.value - ref) <= 1e-12 * ref);
    CHECK(got.mu == doctest::Approx(printed_mu(s, t, al)).epsilon(1e-13));
  }
  CHECK(classical_bound(4, 3.0, 1.0, 0.01, 0.0, 0.0).value == 0.0);
  const auto b0 = classical_bound(4, 3.0, 1.0, 0.01, 0.0, 0.5).value;
  const auto b1 = classical_bound(4, 3.0, 1.0, 0.01, 0.1, 0.5).value;
  const auto b2 = classical_bound(4, 3.0, 1.0, 0.01, 0.2, 0.5).value;
  CHECK(b2 - b0 == doctest::Approx(2.0 * (b1 - b0)).epsilon(1e-12));
  const auto t1 = classical_bound(4, 3.0, 1.0, 0.01, 0.1, 0.0).value;
  const auto t2 = classical_bound(4, 3.0, 1.0, 0.01, 0.1, 1.0).value;
  const auto t3 = classical_bound(4, 3.0, 1.0, 0.01, 0.1, 2.0).value;
  CHECK(t3 - t1 == doctest::Approx(2.0 * (t2 - t1)).epsilon(1e-12));
  CHECK_THROWS_AS(classical_bound(4, 3.0, 1.0, 0.99, 0.1, 0.0), ConditionViolatedError);
}

TEST_CASE("lemma helpers and checks") {
  VectorXd x(5);
  x << 3.0, -1.0, 0.5, 0.0, 2.0;
  CHECK(best_s_term_tail(x, 2) == doctest::Approx(1.5));
  CHECK(l1_minus_alpha_l2(x, 0.5) == doctest::Approx(6.5 - 0.5 * x.norm()));

  const auto same = verify_lemma_inequalities(x, x, 3, 0.7);
  CHECK(same.status == LemmaStatus::Pass);
  for (const auto& c : same.checks) CHECK_MESSAGE(c.holds, c.name);

  for (int s : {1, 3, 8}) {
    for (double al : {0.2, 1.0}) {
      const double c = -1.7;
      VectorXd flat = VectorXd::Constant(s, c);
      CHECK(l1_minus_alpha_l2(flat, al) == doctest::Approx((s - al * std::sqrt(double(s))) * std::abs(c)));
      VectorXd padded = VectorXd::Zero(s + 4);
      padded.head(s) = flat;
      const auto rep = verify_lemma_inequalities(padded, padded, s, al);
      for (const auto& ch : rep.checks) {
        if (ch.name == "norm_lower_x" || ch.name == "norm_upper_x") {
          CHECK(ch.holds);
          CHECK(std::abs(ch.slack()) <= 1e-12);
        }
      }
    }
  }

  VectorXd big = 10.0 * x;
  CHECK(verify_lemma_inequalities(x, big, 3, 1.0).status == LemmaStatus::Inapplicable);
}

TEST_CASE("lemma fuzzing") {
  const auto f = fuzz_lemmas(20000, 11);
  CHECK(f.cases == 20000);
  CHECK(f.applicable > 0);
  CHECK(f.violations == 0);
}

TEST_CASE("theory report") {
  const auto r = theory_report(9, 16.0, 1.0, 0.1, 0.1, 0.05, 64, 0.01, 0.0);
  CHECK(r.condition_31_holds);
  CHECK(r.bound_31 == doctest::Approx(common_delta_bound(9, 16.0, 1.0, 0.1, 0.1, 64, 0.01, 0.0).value));
  const auto bad = theory_report(9, 16.0, 1.0, 0.4, 0.4, 0.9, 64, 0.01, 0.0);
  CHECK(std::isnan(bad.bound_31));
  CHECK(std::isnan(bad.bound_41));
}
