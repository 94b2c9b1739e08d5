#pragma once

#include <Eigen/Dense>

#include <limits>

namespace l12ds {

/// 20*log10(||x0|| / ||x_hat - x0||). Exact recovery returns +infinity.
/// Throws UndefinedMetricError when x0 = 0.
double snr_db(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0);

inline bool is_exact_snr(double snr) { return snr == std::numeric_limits<double>::infinity(); }

/// sum_j (x_hat_j - x0_j)^2 / sum_j min(x0_j^2, sigma^2), summed over all
/// coordinates. Pass the unrefined estimate for rho^2_origin and the refined
/// one for rho^2.
double rho2(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0, double sigma);

struct SupportScore {
  double precision = 0.0;
  double recall = 0.0;
};

/// Detected support {i : |x_hat_i| > threshold} scored against supp(x0).
/// An empty detection has precision 1 when x0 = 0 and 0 otherwise; an empty
/// true support has recall 1.
SupportScore support_metrics(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0, double threshold);

}  // namespace l12ds
