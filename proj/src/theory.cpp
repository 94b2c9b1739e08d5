#include "l12ds/theory.hpp"

#include "l12ds/errors.hpp"
#include "l12ds/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace l12ds {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial_saturating(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __uint128_t r = 1;
  for (Index i = 1; i <= k; ++i) {
    r = r * static_cast<__uint128_t>(n - k + i) / static_cast<__uint128_t>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

struct SpectrumExtremes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
};

// Visits every support whose smallest index is `first`.
void sweep_first_index(const MatrixXd& gram, Index s, Index first, SpectrumExtremes& acc) {
  const Index n = gram.rows();
  std::vector<Index> idx(static_cast<std::size_t>(s));
  idx[0] = first;
  for (Index j = 1; j < s; ++j) idx[static_cast<std::size_t>(j)] = first + j;
  if (idx.back() >= n) return;

  MatrixXd sub(s, s);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
  while (true) {
    for (Index r = 0; r < s; ++r)
      for (Index c = 0; c < s; ++c) sub(r, c) = gram(idx[r], idx[c]);
    eig.compute(sub, Eigen::EigenvaluesOnly);
    acc.lo = std::min(acc.lo, eig.eigenvalues()(0));
    acc.hi = std::max(acc.hi, eig.eigenvalues()(s - 1));

    // next combination with idx[0] fixed
    Index j = s - 1;
    while (j >= 1 && idx[static_cast<std::size_t>(j)] == n - s + j) --j;
    if (j < 1) return;
    ++idx[static_cast<std::size_t>(j)];
    for (Index q = j + 1; q < s; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
}

double integer_ts(Index s, double t) {
  if (s < 1) throw ParameterError("sparsity must be a positive integer");
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("t must be positive");
  const double ts = t * static_cast<double>(s);
  const double r = std::round(ts);
  if (r < 1.0 || std::abs(ts - r) > 1e-9 * std::max(1.0, ts))
    throw ParameterError("ts must be a positive integer");
  return r;
}

void require_classical_domain(Index s, double t, double alpha) {
  require_alpha(alpha);
  if (s < 2) throw ParameterError("the classical-RIP bound needs s >= 2");
  if (!(t == 2.0 || t >= 3.0)) throw ParameterError("the classical-RIP bound needs t = 2 or t >= 3");
}

double classical_q(Index s, double t, double alpha, double k) {
  const double sd = static_cast<double>(s);
  const double rs = std::sqrt(sd);
  const double c = 1.0 + std::sqrt(2.0) / 2.0;
  const double num = (rs + alpha) * (rs + alpha) * (c * c * (k - sd - std::sqrt(k - sd)) + 1.0);
  const double den = sd * (t - 1.0) * (t - 1.0) * (rs - 1.0) * (rs - 1.0);
  return num / den;
}

// Indices ordered by decreasing |v_i|, ties by increasing index.
std::vector<Index> magnitude_order(const VectorXd& v) {
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return std::abs(v(i)) > std::abs(v(j)); });
  return order;
}

struct Norms {
  double l1 = 0.0;
  double sq = 0.0;
  double l2() const { return std::sqrt(sq); }
};

Norms norms_over(const VectorXd& v, const std::vector<Index>& order, std::size_t from, std::size_t to) {
  Norms r;
  for (std::size_t i = from; i < to; ++i) {
    const double x = v(order[i]);
    r.l1 += std::abs(x);
    r.sq += x * x;
  }
  return r;
}

void add_check(LemmaReport& rep, std::string name, double lhs, double rhs) {
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  InequalityCheck c{std::move(name), lhs, rhs, lhs <= rhs + 1e-10 * scale};
  rep.checks.push_back(std::move(c));
}

void sandwich_checks(LemmaReport& rep, const std::string& label, const VectorXd& v, double alpha) {
  Index nnz = 0;
  double smallest = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      ++nnz;
      smallest = std::min(smallest, std::abs(v(i)));
    }
  }
  if (nnz == 0) return;
  const double sp = static_cast<double>(nnz);
  const double f = l1_minus_alpha_l2(v, alpha);
  add_check(rep, "norm_lower_" + label, (sp - alpha * std::sqrt(sp)) * smallest, f);
  add_check(rep, "norm_upper_" + label, f, (std::sqrt(sp) - alpha) * v.norm());
}

void split_check(LemmaReport& rep, const std::string& label, const VectorXd& v,
                 const std::vector<bool>& in_first, double alpha) {
  VectorXd v1 = VectorXd::Zero(v.size());
  VectorXd v2 = VectorXd::Zero(v.size());
  for (Index i = 0; i < v.size(); ++i) (in_first[static_cast<std::size_t>(i)] ? v1 : v2)(i) = v(i);
  add_check(rep, "split_" + label, l1_minus_alpha_l2(v1, alpha) + l1_minus_alpha_l2(v2, alpha),
            l1_minus_alpha_l2(v, alpha));
}

}  // namespace

RipEstimate rip_l2l2_exact(const MatrixXd& a, Index s, std::uint64_t budget, unsigned threads) {
  const Index n = a.cols();
  if (s < 1 || s > n) throw ParameterError("RIP order must lie in [1, n]");
  if (binomial_saturating(n, s) > budget) throw BudgetError("support enumeration exceeds budget");

  const MatrixXd gram = a.transpose() * a;
  threads = std::max(1u, threads);
  std::vector<SpectrumExtremes> partial(threads);
  auto work = [&](unsigned w) {
    for (Index first = w; first + s <= n; first += threads) sweep_first_index(gram, s, first, partial[w]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  SpectrumExtremes all;
  for (const auto& p : partial) {
    all.lo = std::min(all.lo, p.lo);
    all.hi = std::max(all.hi, p.hi);
  }
  RipEstimate r;
  r.order = s;
  r.kind = RipKind::L2L2Exact;
  r.delta = std::max({0.0, all.hi - 1.0, 1.0 - all.lo});
  return r;
}

RipEstimate rip_l2l1_sampled(const MatrixXd& a, Index s, std::size_t samples, std::uint64_t seed) {
  const Index n = a.cols();
  if (s < 1 || s > n) throw ParameterError("RIP order must lie in [1, n]");
  if (samples < 1) throw ParameterError("need at least one sample");

  RipEstimate r;
  r.order = s;
  r.kind = RipKind::L2L1Sampled;
  r.is_estimate = true;
  auto record = [&r](double image_l1) {
    r.delta_ub = std::max(r.delta_ub, image_l1 - 1.0);
    r.delta_lb = std::max(r.delta_lb, 1.0 - image_l1);
  };

  if (s == 1) {
    for (Index i = 0; i < n; ++i) record(a.col(i).lpNorm<1>());
    r.samples = static_cast<std::size_t>(n);
    return r;
  }

  Rng rng(seed, Stream::Theory);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  VectorXd dir(s);
  VectorXd image(a.rows());
  for (std::size_t k = 0; k < samples; ++k) {
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index j = 0; j < s; ++j) {
      const auto pick = j + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - j)));
      std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pick)]);
    }
    double nrm = 0.0;
    while (nrm == 0.0) {
      for (Index j = 0; j < s; ++j) dir(j) = rng.normal();
      nrm = dir.norm();
    }
    dir /= nrm;
    image.setZero();
    for (Index j = 0; j < s; ++j) image += dir(j) * a.col(perm[static_cast<std::size_t>(j)]);
    record(image.lpNorm<1>());
  }
  r.samples = samples;
  return r;
}

CommonDeltaConstants common_delta_constants(Index s, double t, double alpha, double delta_lb,
                                       double delta_ub) {
  require_alpha(alpha);
  const double ts = integer_ts(s, t);
  const double rs = std::sqrt(static_cast<double>(s));
  const double rt = std::sqrt(t);
  CommonDeltaConstants c;
  c.a = (std::sqrt(ts) - alpha) / (rs + alpha);
  c.b = 8.0 * (2.0 * std::sqrt(ts) - alpha) / (17.0 * alpha * (2.0 * rt + 1.0));
  c.rho = 1.0 - delta_lb - (1.0 + delta_ub) / c.a;
  c.a_above_two = c.a > 2.0;
  c.b_above_one = c.b > 1.0;
  c.product_below_sum = c.a * c.b < c.a + c.b;
  return c;
}

Condition31 check_condition_31(Index s, double t, double alpha, double delta_lb, double delta_ub) {
  Condition31 r;
  r.constants = common_delta_constants(s, t, alpha, delta_lb, delta_ub);
  const double a = r.constants.a;
  const double b = r.constants.b;
  r.inequality = (b + 1.0) * delta_ub + a * b * delta_lb < a * b - b - 1.0;
  r.holds = r.inequality && r.constants.hypotheses_hold();
  return r;
}

double common_delta_threshold(Index s, double t, double alpha) {
  const auto c = common_delta_constants(s, t, alpha, 0.0, 0.0);
  return (c.a * c.b - c.b - 1.0) / (c.b + 1.0 + c.a * c.b);
}

Bound31Terms common_delta_bound(Index s, double t, double alpha, double delta_lb, double delta_ub,
                             Index m, double eta, double tail_l1, Bound31Form form) {
  const auto cond = check_condition_31(s, t, alpha, delta_lb, delta_ub);
  if (!cond.holds) throw ConditionViolatedError("(l2,l1)-RIP condition does not hold");
  if (eta < 0.0 || tail_l1 < 0.0) throw ParameterError("eta and tail must be nonnegative");

  const double a = cond.constants.a;
  const double rho = cond.constants.rho;
  const double rs = std::sqrt(static_cast<double>(s));
  const double rt = std::sqrt(t);
  const double up = 1.0 + delta_ub;
  const double md = static_cast<double>(m);

  Bound31Terms r;
  if (form == Bound31Form::Statement) {
    r.tau = (17.0 * (2.0 * rt + 1.0) * up / (8.0 * a * rho) + 1.0) / (2.0 * rt);
    const double gap = rs - alpha * r.tau;
    if (!(gap > 0.0)) throw ConditionViolatedError("sqrt(s) - alpha*tau must be positive");
    r.tail_coefficient = rs * r.tau / gap * 2.0 / rs;
    r.eta_coefficient = 2.0 * (2.0 * rt + 1.0) * (up + a * rho) * md * static_cast<double>(s) /
                        (rt * gap * up * rho * rho);
  } else {
    const double eps = up / (4.0 * a * rho);
    r.tau = ((2.0 * rt + 1.0) * (2.0 * up / (a * rho) + eps / 2.0) + 1.0) / (2.0 * rt);
    const double shrink = 1.0 - alpha * r.tau / rs;
    if (!(shrink > 0.0)) throw ConditionViolatedError("sqrt(s) - alpha*tau must be positive");
    r.tail_coefficient = r.tau / shrink * 2.0 / rs;
    r.eta_coefficient =
        (4.0 + 1.0 / eps) * (2.0 * rt + 1.0) * md * rs / (2.0 * rt * rho * rho) / shrink;
  }
  r.value = r.tail_coefficient * tail_l1 + r.eta_coefficient * eta;
  return r;
}

long ceil_ts(Index s, double t) {
  const double ts = t * static_cast<double>(s);
  const double r = std::round(ts);
  if (std::abs(ts - r) <= 1e-9 * std::max(1.0, ts)) return static_cast<long>(r);
  return static_cast<long>(std::ceil(ts));
}

double classical_mu(Index s, double t, double alpha) {
  require_classical_domain(s, t, alpha);
  const double q = classical_q(s, t, alpha, static_cast<double>(ceil_ts(s, t)));
  return 1.0 / (std::sqrt(1.0 + q) + 1.0);
}

double classical_threshold(Index s, double t, double alpha) {
  const double mu = classical_mu(s, t, alpha);
  return mu / (1.0 - mu);
}

double classical_threshold_unrounded(Index s, double t, double alpha) {
  require_classical_domain(s, t, alpha);
  const double q = classical_q(s, t, alpha, t * static_cast<double>(s));
  return 1.0 / std::sqrt(q + 1.0);
}

bool check_condition_41(Index s, double t, double alpha, double delta_ts) {
  return delta_ts < classical_threshold(s, t, alpha);
}

Bound41Terms classical_bound(Index s, double t, double alpha, double delta_ts, double eta,
                             double tail_l1) {
  if (!check_condition_41(s, t, alpha, delta_ts))
    throw ConditionViolatedError("classical RIP condition does not hold");
  if (eta < 0.0 || tail_l1 < 0.0) throw ParameterError("eta and tail must be nonnegative");

  const double sd = static_cast<double>(s);
  const double rs = std::sqrt(sd);
  const double mu = classical_mu(s, t, alpha);
  const double d = delta_ts;
  const double den = mu - mu * mu - (mu - 1.0) * (mu - 1.0) * d;
  const double k = static_cast<double>(ceil_ts(s, t));

  Bound41Terms r;
  r.mu = mu;
  r.eta_coefficient = (1.0 + std::sqrt((alpha + rs) / rs + alpha * alpha / (4.0 * sd)) +
                       (alpha + std::sqrt(2.0)) / (2.0 * rs)) *
                      2.0 * (1.0 - mu) * mu * std::sqrt(k) / den;
  const double lead = rs + std::sqrt(alpha * rs + sd + alpha * alpha / 4.0) + (alpha + std::sqrt(2.0)) / 2.0;
  const double frac = 2.0 * d * (1.0 - 2.0 * mu) / ((rs + alpha) * den);
  const double root = std::sqrt(2.0 * d * (1.0 - 2.0 * mu) / ((rs + alpha) * (rs + alpha) * den));
  r.tail_coefficient = (lead * (frac + root) + std::sqrt(2.0 * sd) / 2.0) / rs;
  r.value = r.eta_coefficient * eta + r.tail_coefficient * tail_l1;
  return r;
}

double l1_minus_alpha_l2(const VectorXd& x, double alpha) {
  return x.lpNorm<1>() - alpha * x.norm();
}

double best_s_term_tail(const VectorXd& x, Index s) {
  const auto order = magnitude_order(x);
  const auto from = static_cast<std::size_t>(std::clamp<Index>(s, 0, x.size()));
  return norms_over(x, order, from, order.size()).l1;
}

LemmaReport verify_lemma_inequalities(const VectorXd& x, const VectorXd& x_hat, Index s,
                                      double alpha) {
  if (x.size() != x_hat.size()) throw DimensionError("x and x_hat differ in length");
  const Index n = x.size();
  if (s < 1 || s > n) throw ParameterError("s must lie in [1, n]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");

  LemmaReport rep;
  const double fx = l1_minus_alpha_l2(x, alpha);
  const double fh = l1_minus_alpha_l2(x_hat, alpha);
  if (fh > fx + 1e-12 * std::max(1.0, std::abs(fx))) return rep;

  const VectorXd h = x_hat - x;
  const auto order = magnitude_order(h);
  const auto su = static_cast<std::size_t>(s);
  const auto nu = static_cast<std::size_t>(n);
  const Norms head = norms_over(h, order, 0, su);
  const Norms rest = norms_over(h, order, su, nu);
  const double tail = best_s_term_tail(x, s);
  const double hn = h.norm();

  add_check(rep, "cone", rest.l1, head.l1 + 2.0 * tail + alpha * hn);
  add_check(rep, "cone_difference", rest.l1 - alpha * rest.l2(), head.l1 + 2.0 * tail + alpha * head.l2());
  if ((x.array() != 0.0).count() <= s) {
    add_check(rep, "cone_sparse", rest.l1, head.l1 + alpha * hn);
    add_check(rep, "cone_difference_sparse", rest.l1 - alpha * rest.l2(), head.l1 + alpha * head.l2());
  }

  sandwich_checks(rep, "x", x, alpha);
  sandwich_checks(rep, "x_hat", x_hat, alpha);
  sandwich_checks(rep, "h", h, alpha);

  std::vector<bool> head_mask(nu, false);
  for (std::size_t i = 0; i < su; ++i) head_mask[static_cast<std::size_t>(order[i])] = true;
  split_check(rep, "h", h, head_mask, alpha);
  std::vector<bool> support_mask(nu);
  for (Index i = 0; i < n; ++i) support_mask[static_cast<std::size_t>(i)] = x(i) != 0.0;
  split_check(rep, "x", x, support_mask, alpha);

  // Block bounds for every k; keep the tightest instance of each.
  const double rs = std::sqrt(static_cast<double>(s));
  InequalityCheck worst_tail{"tail_energy", 0.0, 0.0, true};
  InequalityCheck worst_total{"total_energy", 0.0, 0.0, true};
  double tail_slack = std::numeric_limits<double>::infinity();
  double total_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; su + k <= nu; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(s);
    const double c = 1.0 / (2.0 * std::sqrt(t));
    const Norms in = norms_over(h, order, 0, su + k);
    const Norms out = norms_over(h, order, su + k, nu);
    const double lhs1 = out.l2();
    const double rhs1 = c * (in.l2() + (2.0 * tail + alpha * hn) / rs);
    const double rhs2 = (1.0 + c) * in.l2() + c * 2.0 * tail / rs + c * alpha * hn / rs;
    if (rhs1 - lhs1 < tail_slack) {
      tail_slack = rhs1 - lhs1;
      worst_tail.lhs = lhs1;
      worst_tail.rhs = rhs1;
    }
    if (rhs2 - hn < total_slack) {
      total_slack = rhs2 - hn;
      worst_total.lhs = hn;
      worst_total.rhs = rhs2;
    }
  }
  if (su < nu) {
    add_check(rep, worst_tail.name, worst_tail.lhs, worst_tail.rhs);
    add_check(rep, worst_total.name, worst_total.lhs, worst_total.rhs);
  }

  rep.status = LemmaStatus::Pass;
  for (const auto& c : rep.checks)
    if (!c.holds) rep.status = LemmaStatus::Fail;
  return rep;
}

LemmaFuzzSummary fuzz_lemmas(std::size_t cases, std::uint64_t seed) {
  LemmaFuzzSummary sum;
  sum.worst_slack = std::numeric_limits<double>::infinity();
  Rng rng(seed, Stream::Theory);
  for (std::size_t c = 0; c < cases; ++c) {
    const Index n = 2 + static_cast<Index>(rng.below(63));
    const Index s = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const double alpha = rng.below(8) == 0 ? 1.0 : rng.uniform_open();

    // x: exactly s-sparse or compressible with a decaying tail
    VectorXd x = VectorXd::Zero(n);
    const bool compressible = rng.below(2) == 0;
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index j = 0; j < n; ++j) {
      const auto pick = j + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - j)));
      std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pick)]);
    }
    for (Index j = 0; j < n; ++j) {
      const Index i = perm[static_cast<std::size_t>(j)];
      if (j < s) {
        x(i) = rng.normal();
      } else if (compressible) {
        x(i) = rng.normal() * std::pow(static_cast<double>(j + 1), -1.5);
      }
    }

    VectorXd xh(n);
    switch (rng.below(4)) {
      case 0:
        for (Index i = 0; i < n; ++i) xh(i) = rng.normal();
        break;
      case 1:
        for (Index i = 0; i < n; ++i) xh(i) = x(i) + 0.1 * rng.normal();
        break;
      case 2: {
        xh.setZero();
        const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        for (Index j = 0; j < k; ++j) xh(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))) = rng.normal();
        break;
      }
      default:
        xh = x * rng.uniform();
        break;
    }
    const double fx = l1_minus_alpha_l2(x, alpha);
    const double fh = l1_minus_alpha_l2(xh, alpha);
    if (fh > fx) xh *= fh > 0.0 ? std::max(0.0, fx) / fh : 0.0;

    const auto rep = verify_lemma_inequalities(x, xh, s, alpha);
    ++sum.cases;
    if (rep.status == LemmaStatus::Inapplicable) continue;
    ++sum.applicable;
    if (rep.status == LemmaStatus::Fail) ++sum.violations;
    for (const auto& chk : rep.checks) {
      const double scaled = chk.slack() / std::max({1.0, std::abs(chk.lhs), std::abs(chk.rhs)});
      if (scaled < sum.worst_slack) {
        sum.worst_slack = scaled;
        sum.worst_check = chk.name;
      }
    }
  }
  if (sum.applicable == 0) sum.worst_slack = 0.0;
  return sum;
}

TheoryReport theory_report(Index s, double t, double alpha, double delta_lb, double delta_ub,
                           double delta_ts, Index m, double eta, double tail_l1) {
  TheoryReport r;
  r.s = s;
  r.t = t;
  r.alpha = alpha;
  r.a_val = r.b_val = r.rho = r.tau = r.mu_val = r.bound_31 = r.bound_41 = kNaN;

  try {
    const auto cond = check_condition_31(s, t, alpha, delta_lb, delta_ub);
    r.a_val = cond.constants.a;
    r.b_val = cond.constants.b;
    r.rho = cond.constants.rho;
    r.condition_31_holds = cond.holds;
    if (cond.holds) {
      const auto b = common_delta_bound(s, t, alpha, delta_lb, delta_ub, m, eta, tail_l1);
      r.tau = b.tau;
      r.bound_31 = b.value;
    }
  } catch (const ParameterError&) {
  } catch (const ConditionViolatedError&) {
  }

  try {
    r.mu_val = classical_mu(s, t, alpha);
    r.condition_41_holds = check_condition_41(s, t, alpha, delta_ts);
    if (r.condition_41_holds) r.bound_41 = classical_bound(s, t, alpha, delta_ts, eta, tail_l1).value;
  } catch (const ParameterError&) {
  }
  return r;
}

}  // namespace l12ds
