#include "l12ds/metrics.hpp"

#include "l12ds/errors.hpp"

#include <cmath>

namespace l12ds {

namespace {

void check_sizes(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0) {
  if (x_hat.size() != x0.size()) throw DimensionError("estimate and reference differ in length");
}

}  // namespace

double snr_db(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0) {
  check_sizes(x_hat, x0);
  const double ref = x0.norm();
  if (ref == 0.0) throw UndefinedMetricError("SNR undefined for a zero reference signal");
  const double err = (x_hat - x0).norm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(ref / err);
}

double rho2(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0, double sigma) {
  check_sizes(x_hat, x0);
  if (!(sigma > 0.0)) throw ParameterError("rho^2 needs sigma > 0");
  const double denom = x0.array().square().min(sigma * sigma).sum();
  if (denom == 0.0) throw UndefinedMetricError("rho^2 undefined for a zero reference signal");
  return (x_hat - x0).squaredNorm() / denom;
}

SupportScore support_metrics(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0, double threshold) {
  check_sizes(x_hat, x0);
  if (!(threshold >= 0.0)) throw ParameterError("support threshold must be >= 0");
  long detected = 0;
  long truth = 0;
  long hits = 0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const bool d = std::abs(x_hat(i)) > threshold;
    const bool t = x0(i) != 0.0;
    detected += d;
    truth += t;
    hits += d && t;
  }
  SupportScore score;
  score.precision = detected == 0 ? (truth == 0 ? 1.0 : 0.0) : static_cast<double>(hits) / detected;
  score.recall = truth == 0 ? 1.0 : static_cast<double>(hits) / truth;
  return score;
}

}  // namespace l12ds
