#include "l12ds/solvers.hpp"

#include "l12ds/errors.hpp"
#include "l12ds/prox.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace l12ds {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double initial_alpha(const AlphaPolicy& policy) {
  if (const auto* fixed = std::get_if<FixedAlpha>(&policy)) return fixed->value;
  return std::get<AdaptiveAlpha>(policy).initial;
}

double alpha_schedule_step(double alpha, std::size_t k, const AlphaPolicy& policy) {
  if (std::holds_alternative<FixedAlpha>(policy)) return alpha;
  const auto& adaptive = std::get<AdaptiveAlpha>(policy);
  if (k % static_cast<std::size_t>(adaptive.period) != 0) return alpha;
  return std::min(adaptive.factor * alpha, adaptive.cap);
}

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::L1AlphaL2:
      return "l12ds";
    case Algorithm::L1:
      return "l1ds";
    case Algorithm::Lp:
      return "lpds";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "l12ds") return Algorithm::L1AlphaL2;
  if (name == "l1ds") return Algorithm::L1;
  if (name == "lpds") return Algorithm::Lp;
  throw ParameterError("unknown algorithm '" + name + "' (expected l12ds, l1ds or lpds)");
}

void validate(const SolverConfig& config, Algorithm algo) {
  if (!(config.eta >= 0.0)) throw ParameterError("eta must be >= 0");
  if (!(config.lambda > 0.0)) throw ParameterError("lambda must be > 0");
  if (!(config.beta > 0.0)) throw ParameterError("beta must be > 0");
  if (config.max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (!(config.tol > 0.0)) throw ParameterError("tol must be > 0");
  if (config.refine && !(config.refine_threshold >= 0.0))
    throw ParameterError("refine threshold must be >= 0");
  if (algo == Algorithm::Lp && !(config.p > 0.0 && config.p < 1.0))
    throw ParameterError("l_p selector needs 0 < p < 1");
  if (algo == Algorithm::L1AlphaL2) {
    if (const auto* fixed = std::get_if<FixedAlpha>(&config.alpha)) {
      if (!(fixed->value > 0.0 && fixed->value <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
    } else {
      const auto& adaptive = std::get<AdaptiveAlpha>(config.alpha);
      if (!(adaptive.initial > 0.0 && adaptive.initial <= adaptive.cap && adaptive.cap <= 1.0))
        throw ParameterError("adaptive alpha needs 0 < initial <= cap <= 1");
      if (!(adaptive.factor >= 1.0) || adaptive.period < 1)
        throw ParameterError("adaptive alpha needs factor >= 1 and period >= 1");
    }
  }
}

// ---------------------------------------------------------------------------

WoodburySolver::WoodburySolver(const MatrixXd& a, double beta) : a_(a), beta_(beta) {
  if (!(beta > 0.0)) throw ParameterError("Woodbury solve needs beta > 0");
  gram_ = a.rows() > 0 ? MatrixXd(a * a.transpose()) : MatrixXd(0, 0);
  MatrixXd reduced = gram_ * gram_;
  reduced.diagonal().array() += beta;
  reduced_.compute(reduced);
  if (reduced_.info() != Eigen::Success) throw Error("Woodbury reduced system is not positive definite");
}

VectorXd WoodburySolver::solve(const VectorXd& rhs) const {
  if (rhs.size() != a_.cols()) throw DimensionError("Woodbury right-hand side has wrong length");
  const VectorXd ar = a_ * rhs;
  const VectorXd inner = gram_ * reduced_.solve(ar);
  return (rhs - a_.transpose() * inner) / beta_;
}

VectorXd woodbury_solve(const MatrixXd& a, double beta, const VectorXd& rhs) {
  return WoodburySolver(a, beta).solve(rhs);
}

// ---------------------------------------------------------------------------

DantzigAdmm::DantzigAdmm(const MatrixXd& a, const VectorXd& b, Algorithm algo, SolverConfig config)
    : a_(a), b_(b), algo_(algo), config_(config), woodbury_(a, config.beta) {
  if (b.size() != a.rows()) throw DimensionError("observation length does not match matrix rows");
  validate(config_, algo_);
  const Index n = a.cols();
  c_ = a.transpose() * b;
  state_.x = VectorXd::Zero(n);
  state_.w = VectorXd::Zero(n);
  state_.z = VectorXd::Zero(n);
  state_.y = project_linf_ball(-c_, config_.eta);
  state_.alpha = algo_ == Algorithm::L1AlphaL2 ? initial_alpha(config_.alpha) : 0.0;
  state_.k = 0;
  bx_ = VectorXd::Zero(n);
}

void DantzigAdmm::set_state(AdmmState state) {
  const Index n = a_.cols();
  if (state.x.size() != n || state.w.size() != n || state.y.size() != n || state.z.size() != n)
    throw DimensionError("ADMM state has wrong dimensions");
  state_ = std::move(state);
  bx_ = apply_gram(state_.x);
}

VectorXd DantzigAdmm::apply_gram(const VectorXd& v) const {
  return a_.transpose() * (a_ * v);
}

void DantzigAdmm::update_w(const VectorXd& v, double alpha, VectorXd& out) const {
  const double mu = config_.lambda / config_.beta;
  switch (algo_) {
    case Algorithm::L1AlphaL2:
      prox_l1_minus_l2(v, mu, alpha * mu, out);
      break;
    case Algorithm::L1:
      soft_threshold(v, mu, out);
      break;
    case Algorithm::Lp:
      prox_lp_vec(v, mu, config_.p, out);
      break;
  }
}

double DantzigAdmm::penalty(const VectorXd& w, double alpha) const {
  switch (algo_) {
    case Algorithm::L1AlphaL2:
      return w.lpNorm<1>() - alpha * w.norm();
    case Algorithm::L1:
      return w.lpNorm<1>();
    case Algorithm::Lp:
      return w.array().abs().pow(config_.p).sum();
  }
  return 0.0;
}

double DantzigAdmm::step() {
  AdmmState& s = state_;
  const double beta = config_.beta;

  VectorXd v = s.x + s.z / beta;
  update_w(v, s.alpha, s.w);

  const VectorXd rhs = apply_gram(s.y + c_) + beta * s.w - s.z;
  VectorXd x_new = woodbury_.solve(rhs);

  project_linf_ball(bx_ - c_, config_.eta, s.y);

  s.z += beta * (x_new - s.w);

  const double change = (x_new - s.x).norm() / std::max(s.x.norm(), 1.0);
  s.x = std::move(x_new);
  bx_ = apply_gram(s.x);

  if (algo_ == Algorithm::L1AlphaL2) s.alpha = alpha_schedule_step(s.alpha, s.k, config_.alpha);
  ++s.k;

  if (!s.x.allFinite() || !s.z.allFinite() || !std::isfinite(change)) {
    throw DivergenceError("ADMM produced a non-finite iterate", s.k);
  }
  return change;
}

double DantzigAdmm::augmented_lagrangian() const {
  const AdmmState& s = state_;
  const VectorXd gap = s.x - s.w;
  return config_.lambda * penalty(s.w, s.alpha) + 0.5 * (bx_ - s.y - c_).squaredNorm() +
         0.5 * config_.beta * gap.squaredNorm() + s.z.dot(gap);
}

double DantzigAdmm::feasibility_gap(const VectorXd& x) const {
  if (x.size() == 0) return 0.0;
  return (c_ - apply_gram(x)).cwiseAbs().maxCoeff();
}

SolveResult DantzigAdmm::run() {
  const auto start = std::chrono::steady_clock::now();
  SolveResult result;
  if (config_.record_trace) result.primal_residual_trace.reserve(static_cast<std::size_t>(config_.max_iter));

  bool converged = false;
  while (state_.k < static_cast<std::size_t>(config_.max_iter)) {
    const double change = step();
    if (config_.record_trace) result.primal_residual_trace.push_back((state_.x - state_.w).norm());
    if (change < config_.tol) {
      converged = true;
      break;
    }
  }

  result.x_hat = state_.x;
  result.iterations = state_.k;
  result.converged = converged;
  result.feasibility_gap = feasibility_gap(result.x_hat);
  result.final_alpha = state_.alpha;
  result.objective = penalty(result.x_hat, state_.alpha);
  if (config_.refine) {
    result.x_refined = gauss_dantzig_refine(a_, b_, result.x_hat, config_.refine_threshold);
  }
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SolveResult solve(const MatrixXd& a, const VectorXd& b, Algorithm algo, const SolverConfig& config) {
  DantzigAdmm admm(a, b, algo, config);
  return admm.run();
}

SolveResult solve(const MeasurementEnsemble& ensemble, Algorithm algo, const SolverConfig& config) {
  return solve(ensemble.matrix.entries, ensemble.b, algo, config);
}

SolveResult solve_l1_alpha_l2_ds(const MeasurementEnsemble& ensemble, const SolverConfig& config) {
  return solve(ensemble, Algorithm::L1AlphaL2, config);
}

SolveResult solve_l1_ds(const MeasurementEnsemble& ensemble, const SolverConfig& config) {
  return solve(ensemble, Algorithm::L1, config);
}

SolveResult solve_lp_ds(const MeasurementEnsemble& ensemble, const SolverConfig& config) {
  return solve(ensemble, Algorithm::Lp, config);
}

VectorXd gauss_dantzig_refine(const MatrixXd& a, const VectorXd& b, const VectorXd& x_hat,
                              double threshold) {
  if (!(threshold >= 0.0)) throw ParameterError("refine threshold must be >= 0");
  if (x_hat.size() != a.cols() || b.size() != a.rows())
    throw DimensionError("refine: inconsistent dimensions");

  std::vector<Index> support;
  for (Index i = 0; i < x_hat.size(); ++i)
    if (std::abs(x_hat(i)) > threshold) support.push_back(i);

  if (static_cast<Index>(support.size()) > a.rows()) {
    std::stable_sort(support.begin(), support.end(),
                     [&](Index i, Index j) { return std::abs(x_hat(i)) > std::abs(x_hat(j)); });
    support.resize(static_cast<std::size_t>(a.rows()));
    std::sort(support.begin(), support.end());
  }

  VectorXd refined = VectorXd::Zero(x_hat.size());
  if (support.empty()) return refined;

  MatrixXd sub(a.rows(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Index>(j)) = a.col(support[j]);
  const VectorXd u = sub.completeOrthogonalDecomposition().solve(b);
  for (std::size_t j = 0; j < support.size(); ++j) refined(support[j]) = u(static_cast<Index>(j));
  return refined;
}

}  // namespace l12ds
