#include "l12ds/prox.hpp"

#include "l12ds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace l12ds {

using Eigen::Index;
using Eigen::VectorXd;

void soft_threshold(ConstVecRef b, double mu, VecRef out) {
  if (!(mu >= 0.0)) throw ParameterError("soft threshold needs mu >= 0");
  if (out.size() != b.size()) throw DimensionError("soft threshold output size mismatch");
  for (Index j = 0; j < b.size(); ++j) {
    const double v = b(j);
    const double mag = std::abs(v) - mu;
    out(j) = mag > 0.0 ? std::copysign(mag, v) : 0.0;
  }
}

VectorXd soft_threshold(ConstVecRef b, double mu) {
  VectorXd out(b.size());
  soft_threshold(b, mu, out);
  return out;
}

void prox_l1_minus_l2(ConstVecRef b, double mu1, double mu2, VecRef out) {
  if (!(mu1 >= 0.0) || !(mu2 >= 0.0)) throw ParameterError("l1-l2 prox needs nonnegative weights");
  if (mu2 > mu1) {
    throw ParameterError("l1-l2 prox needs mu1 >= mu2 (got mu1=" + std::to_string(mu1) +
                         ", mu2=" + std::to_string(mu2) + ")");
  }
  if (out.size() != b.size()) throw DimensionError("l1-l2 prox output size mismatch");
  if (b.size() == 0) return;
  if (mu2 == 0.0) {
    soft_threshold(b, mu1, out);
    return;
  }

  Index imax = 0;
  double bmax = 0.0;
  for (Index j = 0; j < b.size(); ++j) {
    // Strict comparison keeps the smallest index on ties.
    if (std::abs(b(j)) > bmax) {
      bmax = std::abs(b(j));
      imax = j;
    }
  }

  if (bmax > mu1) {
    soft_threshold(b, mu1, out);
    const double znorm = out.norm();
    out *= (znorm + mu2) / znorm;
  } else if (bmax > mu1 - mu2) {
    const double value = std::copysign(bmax + mu2 - mu1, b(imax));
    out.setZero();
    out(imax) = value;
  } else {
    out.setZero();
  }
}

VectorXd prox_l1_minus_l2(ConstVecRef b, double mu1, double mu2) {
  VectorXd out(b.size());
  prox_l1_minus_l2(b, mu1, mu2, out);
  return out;
}

double lp_threshold(double mu, double p) {
  if (!(mu > 0.0)) throw ParameterError("lp prox needs mu > 0");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("lp prox needs 0 < p <= 1");
  if (p == 1.0) return mu;
  return (2.0 - p) / (2.0 - 2.0 * p) * std::pow(2.0 * mu * (1.0 - p), 1.0 / (2.0 - p));
}

namespace {

// Largest root of x + mu*p*x^(p-1) = target on x > 0, for target above the
// l_p threshold. g(x) = x + mu*p*x^(p-1) is convex with its minimum at
// x_min = (mu*p*(1-p))^(1/(2-p)), so the root lies in [x_min, target] and
// Newton started from `target` descends monotonically onto it.
double lp_stationary_root(double target, double mu, double p) {
  const double x_min = std::pow(mu * p * (1.0 - p), 1.0 / (2.0 - p));
  auto g = [&](double x) { return x + mu * p * std::pow(x, p - 1.0) - target; };
  auto dg = [&](double x) { return 1.0 + mu * p * (p - 1.0) * std::pow(x, p - 2.0); };

  double lo = x_min;
  double hi = target;
  double x = target;
  for (int iter = 0; iter < 200; ++iter) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double slope = dg(x);
    double next = slope > 0.0 ? x - gx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    if (hi - lo <= 4e-16 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

}  // namespace

double prox_lp(double b, double mu, double p) {
  const double tau = lp_threshold(mu, p);
  const double mag = std::abs(b);
  if (mag <= tau) return 0.0;
  if (p == 1.0) return std::copysign(mag - mu, b);

  const double root = lp_stationary_root(mag, mu, p);
  // Guard the boundary region against rounding: keep whichever candidate has
  // the lower objective.
  const double f_root = 0.5 * (root - mag) * (root - mag) + mu * std::pow(root, p);
  const double f_zero = 0.5 * mag * mag;
  if (f_zero < f_root) return 0.0;
  return std::copysign(root, b);
}

void prox_lp_vec(ConstVecRef b, double mu, double p, VecRef out) {
  if (out.size() != b.size()) throw DimensionError("lp prox output size mismatch");
  lp_threshold(mu, p);  // validates
  for (Index j = 0; j < b.size(); ++j) out(j) = prox_lp(b(j), mu, p);
}

VectorXd prox_lp_vec(ConstVecRef b, double mu, double p) {
  VectorXd out(b.size());
  prox_lp_vec(b, mu, p, out);
  return out;
}

void project_linf_ball(ConstVecRef v, double eta, VecRef out) {
  if (!(eta >= 0.0)) throw ParameterError("l_inf ball radius must be >= 0");
  if (out.size() != v.size()) throw DimensionError("projection output size mismatch");
  for (Index j = 0; j < v.size(); ++j) out(j) = std::min(std::max(v(j), -eta), eta);
}

VectorXd project_linf_ball(ConstVecRef v, double eta) {
  VectorXd out(v.size());
  project_linf_ball(v, eta, out);
  return out;
}

}  // namespace l12ds
