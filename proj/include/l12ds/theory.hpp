#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace l12ds {

enum class RipKind {
  L2L2Exact,    ///< exhaustive over supports, eigenvalue based
  L2L1Sampled,  ///< lower estimates from sampled sparse unit vectors
};

struct RipEstimate {
  Eigen::Index order = 0;
  RipKind kind = RipKind::L2L2Exact;
  double delta = 0.0;     ///< classical constant (exact kind)
  double delta_lb = 0.0;  ///< 1 - min ||Ax||_1 over sampled unit s-sparse x
  double delta_ub = 0.0;  ///< max ||Ax||_1 - 1 over sampled unit s-sparse x
  std::size_t samples = 0;
  bool is_estimate = false;
};

/// delta_s = max over |S| = s of max(lambda_max - 1, 1 - lambda_min) of A_S^T A_S.
/// Throws BudgetError when C(n, s) exceeds `budget`. Supports are split across
/// `threads` workers by leading index; the max-reduction is order independent.
RipEstimate rip_l2l2_exact(const Eigen::MatrixXd& a, Eigen::Index s,
                           std::uint64_t budget = 2'000'000, unsigned threads = 1);

/// Samples a uniform support and a uniform direction on its unit sphere per
/// draw, from one sequential stream, so a longer run extends a shorter one
/// and the estimates never decrease with `samples`. Order 1 is enumerated
/// exactly over columns. Both constants are floored at zero.
RipEstimate rip_l2l1_sampled(const Eigen::MatrixXd& a, Eigen::Index s, std::size_t samples,
                             std::uint64_t seed);

struct CommonDeltaConstants {
  double a = 0.0;
  double b = 0.0;
  double rho = 0.0;
  bool a_above_two = false;
  bool b_above_one = false;
  bool product_below_sum = false;  ///< a*b < a + b

  bool hypotheses_hold() const { return a_above_two && b_above_one && product_below_sum; }
};

/// a = (sqrt(ts) - alpha)/(sqrt(s) + alpha)
/// b = 8(2 sqrt(ts) - alpha)/(17 alpha (2 sqrt(t) + 1))
/// rho = 1 - delta_lb - (1 + delta_ub)/a
/// `delta_lb` is the lower constant of order (t+1)s, `delta_ub` the upper one
/// of order ts. Throws ParameterError unless ts is a positive integer and
/// 0 < alpha <= 1.
CommonDeltaConstants common_delta_constants(Eigen::Index s, double t, double alpha, double delta_lb,
                                       double delta_ub);

struct Condition31 {
  bool holds = false;  ///< hypotheses and the RIP inequality
  bool inequality = false;
  CommonDeltaConstants constants;
};

/// (b + 1) delta_ub + a b delta_lb < a b - b - 1, together with the
/// hypotheses on a and b.
Condition31 check_condition_31(Eigen::Index s, double t, double alpha, double delta_lb,
                               double delta_ub);

/// Largest common delta accepted by the condition when delta_lb = delta_ub:
/// (ab - b - 1)/(b + 1 + ab).
double common_delta_threshold(Eigen::Index s, double t, double alpha);

enum class Bound31Form {
  Statement,  ///< the displayed conclusion
  Proof,      ///< assembled from the proof's intermediate constants
};

struct Bound31Terms {
  double tau = 0.0;
  double tail_coefficient = 0.0;  ///< multiplies ||x_{-max(s)}||_1
  double eta_coefficient = 0.0;   ///< multiplies eta
  double value = 0.0;
};

/// Error bound for the l1-alpha*l2 Dantzig selector under the (l2,l1)-RIP
/// condition. Throws ConditionViolatedError when the condition fails or
/// sqrt(s) - alpha*tau <= 0.
Bound31Terms common_delta_bound(Eigen::Index s, double t, double alpha, double delta_lb,
                             double delta_ub, Eigen::Index m, double eta, double tail_l1,
                             Bound31Form form = Bound31Form::Statement);

/// ceil(ts) with a guard against representation error in the product.
long ceil_ts(Eigen::Index s, double t);

/// mu = 1/(sqrt(1 + Q) + 1) with
/// Q = (sqrt(s) + alpha)^2 ((1 + sqrt(2)/2)^2 (K - s - sqrt(K - s)) + 1)
///     / (s (t - 1)^2 (sqrt(s) - 1)^2),  K = ceil(ts).
/// Requires integer s >= 2, t = 2 or t >= 3, 0 < alpha <= 1.
double classical_mu(Eigen::Index s, double t, double alpha);

/// mu/(1 - mu) = 1/sqrt(1 + Q), the classical-RIP threshold on delta_ts.
double classical_threshold(Eigen::Index s, double t, double alpha);
/// The same expression with the unrounded product ts in place of ceil(ts).
double classical_threshold_unrounded(Eigen::Index s, double t, double alpha);

bool check_condition_41(Eigen::Index s, double t, double alpha, double delta_ts);

struct Bound41Terms {
  double mu = 0.0;
  double eta_coefficient = 0.0;
  double tail_coefficient = 0.0;
  double value = 0.0;
};

/// Error bound under the classical RIP condition. Throws
/// ConditionViolatedError when the condition fails.
Bound41Terms classical_bound(Eigen::Index s, double t, double alpha, double delta_ts, double eta,
                             double tail_l1);

/// ||x||_1 - alpha*||x||_2
double l1_minus_alpha_l2(const Eigen::VectorXd& x, double alpha);

/// ||x_{-max(s)}||_1: l1 norm of x without its s largest-magnitude entries.
double best_s_term_tail(const Eigen::VectorXd& x, Eigen::Index s);

enum class LemmaStatus { Pass, Fail, Inapplicable };

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;

  double slack() const { return rhs - lhs; }
};

struct LemmaReport {
  LemmaStatus status = LemmaStatus::Inapplicable;
  std::vector<InequalityCheck> checks;
};

/// Checks, on h = x_hat - x, the cone inequalities (and their sparse
/// specializations when ||x||_0 <= s), the two-sided l1-alpha*l2 bounds and
/// split inequality, and the tail / total energy bounds for every block size
/// k = 1..n-s (worst k reported). Requires
/// ||x_hat||_1 - alpha||x_hat||_2 <= ||x||_1 - alpha||x||_2; otherwise the
/// report is Inapplicable with no checks.
LemmaReport verify_lemma_inequalities(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat,
                                      Eigen::Index s, double alpha);

struct LemmaFuzzSummary {
  std::size_t cases = 0;
  std::size_t applicable = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;
  std::string worst_check;
};

/// Random admissible tuples: x sparse or compressible, x_hat a random vector
/// rescaled so that its l1-alpha*l2 value does not exceed that of x.
LemmaFuzzSummary fuzz_lemmas(std::size_t cases, std::uint64_t seed);

struct TheoryReport {
  Eigen::Index s = 0;
  double t = 0.0;
  double alpha = 0.0;
  double a_val = 0.0;
  double b_val = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double mu_val = 0.0;
  bool condition_31_holds = false;
  bool condition_41_holds = false;
  double bound_31 = 0.0;  ///< NaN when the condition fails
  double bound_41 = 0.0;  ///< NaN when the condition fails or the domain excludes (s, t)
};

/// Evaluates both recovery results at one parameter point. `delta_lb`/`delta_ub` feed
/// the (l2,l1) statement, `delta_ts` the classical one.
TheoryReport theory_report(Eigen::Index s, double t, double alpha, double delta_lb,
                           double delta_ub, double delta_ts, Eigen::Index m, double eta,
                           double tail_l1);

}  // namespace l12ds
