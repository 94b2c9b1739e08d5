#pragma once

#include "l12ds/ensemble.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace l12ds {

struct FixedAlpha {
  double value = 1.0;
};

/// alpha <- min(factor*alpha, cap) whenever k mod period == 0.
struct AdaptiveAlpha {
  double initial = 0.1;
  double factor = 1.5;
  int period = 5;
  double cap = 1.0;
};

using AlphaPolicy = std::variant<FixedAlpha, AdaptiveAlpha>;

double initial_alpha(const AlphaPolicy& policy);
/// alpha^{k+1} from alpha^k at iteration counter k.
double alpha_schedule_step(double alpha, std::size_t k, const AlphaPolicy& policy);

enum class Algorithm {
  L1AlphaL2,  ///< l1 - alpha*l2 Dantzig selector
  L1,         ///< l1 Dantzig selector
  Lp,         ///< l_p Dantzig selector, 0 < p < 1
};

std::string algorithm_name(Algorithm algo);  ///< "l12ds", "l1ds", "lpds"
Algorithm parse_algorithm(const std::string& name);

struct SolverConfig {
  double eta = 0.0;      ///< Dantzig radius
  double lambda = 1e-3;  ///< penalty weight
  double beta = 1.0;     ///< ADMM penalty
  AlphaPolicy alpha = AdaptiveAlpha{};
  double p = 0.5;  ///< only used by the l_p selector
  int max_iter = 5000;
  double tol = 1e-6;  ///< relative x-change stopping tolerance
  bool refine = false;
  double refine_threshold = 0.0;
  bool record_trace = true;
};

/// Throws ParameterError on inadmissible settings.
void validate(const SolverConfig& config, Algorithm algo);

struct SolveResult {
  Eigen::VectorXd x_hat;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> primal_residual_trace;  ///< ||x^k - w^k||_2 per iteration
  double feasibility_gap = 0.0;               ///< ||A^T(b - A x_hat)||_inf
  double objective = 0.0;  ///< ||x||_1 - alpha*||x||_2, ||x||_1 or sum |x_j|^p
  double final_alpha = 0.0;
  double wall_time = 0.0;  ///< seconds
  std::optional<Eigen::VectorXd> x_refined;
};

/// Applies (B^T B + beta*I)^{-1} with B = A^T A through the Woodbury
/// identity
///   ((A^T A)^2 + beta*I)^{-1} = (I - A^T G (beta*I + G^2)^{-1} A) / beta,
/// where G = A A^T, so only an m x m SPD system is factored.
class WoodburySolver {
 public:
  WoodburySolver(const Eigen::MatrixXd& a, double beta);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  double beta() const { return beta_; }

 private:
  const Eigen::MatrixXd& a_;
  double beta_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> reduced_;
};

Eigen::VectorXd woodbury_solve(const Eigen::MatrixXd& a, double beta, const Eigen::VectorXd& rhs);

struct AdmmState {
  Eigen::VectorXd x, w, y, z;
  double alpha = 0.0;
  std::size_t k = 0;
};

/// ADMM on the penalized Dantzig selector
///   min_{x, w, ||y||_inf <= eta} lambda*R(w) + 0.5*||B x - y - c||^2  s.t. x = w
/// with B = A^T A and c = A^T b.
///
/// One step:
///   w <- prox_{(lambda/beta) R}(x + z/beta)
///   x <- (B^T B + beta I)^{-1} (B^T (y + c) + beta*w - z)
///   y <- clamp(B x_old - c, +-eta)
///   z <- z + beta*(x - w)
/// The y-update reads the previous x. Initialization is x = w = z = 0,
/// y = clamp(-c, +-eta).
class DantzigAdmm {
 public:
  DantzigAdmm(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Algorithm algo,
              SolverConfig config);

  /// Performs one iteration; returns ||x_new - x_old|| / max(||x_old||, 1).
  double step();
  SolveResult run();

  const AdmmState& state() const { return state_; }
  void set_state(AdmmState state);

  /// lambda*R(w) + 0.5*||Bx - y - c||^2 + beta/2*||x - w||^2 + <z, x - w>
  /// at the current iterate (alpha at its current schedule value).
  double augmented_lagrangian() const;

  /// Evaluates ||A^T(b - A x)||_inf.
  double feasibility_gap(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd apply_gram(const Eigen::VectorXd& v) const;  // B v
  void update_w(const Eigen::VectorXd& v, double alpha, Eigen::VectorXd& out) const;
  double penalty(const Eigen::VectorXd& w, double alpha) const;

  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& b_;
  Algorithm algo_;
  SolverConfig config_;
  Eigen::VectorXd c_;
  WoodburySolver woodbury_;
  AdmmState state_;
  Eigen::VectorXd bx_;  // B * state_.x
};

SolveResult solve(const MeasurementEnsemble& ensemble, Algorithm algo, const SolverConfig& config);
SolveResult solve_l1_alpha_l2_ds(const MeasurementEnsemble& ensemble, const SolverConfig& config);
SolveResult solve_l1_ds(const MeasurementEnsemble& ensemble, const SolverConfig& config);
SolveResult solve_lp_ds(const MeasurementEnsemble& ensemble, const SolverConfig& config);

SolveResult solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Algorithm algo,
                  const SolverConfig& config);

/// Gauss-Dantzig refit: least squares of b on the columns where
/// |x_hat_i| > threshold (at most m of them, largest magnitudes kept); zero
/// elsewhere. Rank-deficient supports get the minimum-norm solution.
Eigen::VectorXd gauss_dantzig_refine(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                     const Eigen::VectorXd& x_hat, double threshold);

}  // namespace l12ds
