#pragma once

#include <Eigen/Dense>

namespace l12ds {

using VecRef = Eigen::Ref<Eigen::VectorXd>;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;

/// sign(b_j) * max(|b_j| - mu, 0), componentwise. Requires mu >= 0.
void soft_threshold(ConstVecRef b, double mu, VecRef out);
Eigen::VectorXd soft_threshold(ConstVecRef b, double mu);

/// Global minimizer of 0.5*||x - b||^2 + mu1*||x||_1 - mu2*||x||_2 for
/// mu1 >= mu2 >= 0.
///
/// Closed form with three regimes on ||b||_inf:
///   > mu1              scaled soft threshold z*(||z|| + mu2)/||z||
///   (mu1 - mu2, mu1]   one-sparse, magnitude ||b||_inf + mu2 - mu1 at the
///                      first index attaining the maximum
///   <= mu1 - mu2       zero
/// Continuous in ||b||_inf across both regime edges; discontinuous only where
/// the largest magnitude is attained at more than one index.
/// `out` may alias `b`.
void prox_l1_minus_l2(ConstVecRef b, double mu1, double mu2, VecRef out);
Eigen::VectorXd prox_l1_minus_l2(ConstVecRef b, double mu1, double mu2);

/// Threshold below which the scalar l_p prox returns zero:
/// (2-p)/(2-2p) * (2*mu*(1-p))^(1/(2-p)); equals mu at p = 1.
double lp_threshold(double mu, double p);

/// Global minimizer of 0.5*(x - b)^2 + mu*|x|^p for mu > 0, 0 < p <= 1.
double prox_lp(double b, double mu, double p);

/// Componentwise prox_lp. `out` may alias `b`.
void prox_lp_vec(ConstVecRef b, double mu, double p, VecRef out);
Eigen::VectorXd prox_lp_vec(ConstVecRef b, double mu, double p);

/// Componentwise clamp to [-eta, eta]; the Euclidean projection onto the
/// l_inf ball of radius eta >= 0. `out` may alias `v`.
void project_linf_ball(ConstVecRef v, double eta, VecRef out);
Eigen::VectorXd project_linf_ball(ConstVecRef v, double eta);

}  // namespace l12ds
