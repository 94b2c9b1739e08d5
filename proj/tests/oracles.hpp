// Independent reference implementations used only by the tests. None of
// these call into the library's algorithms.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double l12_objective(const VectorXd& x, const VectorXd& b, double mu1, double mu2) {
  return 0.5 * (x - b).squaredNorm() + mu1 * x.lpNorm<1>() - mu2 * x.norm();
}

inline double lp_objective(double x, double b, double mu, double p) {
  return 0.5 * (x - b) * (x - b) + mu * std::pow(std::abs(x), p);
}

// Compass search with step halving.
template <class F>
VectorXd compass_descent(const F& f, VectorXd x, double step, double min_step = 1e-13) {
  double fx = f(x);
  const Index d = x.size();
  while (step > min_step) {
    bool moved = false;
    for (Index i = 0; i < d; ++i) {
      for (double dir : {1.0, -1.0}) {
        VectorXd y = x;
        y(i) += dir * step;
        const double fy = f(y);
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return x;
}

// Grid over a box around b, then compass descent from the best grid points,
// from 0 and from b. Intended for d <= 3.
inline VectorXd brute_prox_l1_minus_l2(const VectorXd& b, double mu1, double mu2, int grid = 25) {
  const Index d = b.size();
  const double r = b.cwiseAbs().maxCoeff() + mu2 + 1.0;
  auto f = [&](const VectorXd& x) { return l12_objective(x, b, mu1, mu2); };

  std::vector<std::pair<double, VectorXd>> best;
  const int keep = 8;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  VectorXd x(d);
  while (true) {
    for (Index i = 0; i < d; ++i) x(i) = -r + 2.0 * r * idx[static_cast<std::size_t>(i)] / (grid - 1);
    const double fx = f(x);
    if (static_cast<int>(best.size()) < keep || fx < best.back().first) {
      best.emplace_back(fx, x);
      std::sort(best.begin(), best.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
      if (static_cast<int>(best.size()) > keep) best.pop_back();
    }
    Index k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == grid) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == d) break;
  }
  std::vector<VectorXd> starts;
  for (auto& c : best) starts.push_back(c.second);
  starts.push_back(VectorXd::Zero(d));
  starts.push_back(b);

  VectorXd arg = VectorXd::Zero(d);
  double val = f(arg);
  for (const auto& s : starts) {
    const VectorXd y = compass_descent(f, s, 2.0 * r / (grid - 1));
    const double fy = f(y);
    if (fy < val) {
      val = fy;
      arg = y;
    }
  }
  return arg;
}

// Dense grid on [0, |b|], golden-section refinement around the best point,
// compared against 0.
inline double brute_prox_lp(double b, double mu, double p, int grid = 4001) {
  const double ab = std::abs(b);
  auto f = [&](double x) { return lp_objective(x, ab, mu, p); };
  double bx = 0.0;
  double bf = f(0.0);
  const double h = ab / (grid - 1);
  for (int i = 1; i < grid; ++i) {
    const double x = h * i;
    if (f(x) < bf) {
      bf = f(x);
      bx = x;
    }
  }
  if (bx > 0.0) {
    double lo = std::max(bx - h, 0.0);
    double hi = std::min(bx + h, ab);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
      const double c = hi - g * (hi - lo);
      const double d = lo + g * (hi - lo);
      (f(c) < f(d) ? hi : lo) = f(c) < f(d) ? d : c;
    }
    const double x = 0.5 * (lo + hi);
    if (f(x) < bf) bx = x;
  }
  if (f(0.0) <= f(bx)) bx = 0.0;
  return b < 0 ? -bx : bx;
}

// ((A^T A)^2 + beta I)^{-1} rhs by a dense n x n factorization.
inline VectorXd dense_quartic_solve(const MatrixXd& a, double beta, const VectorXd& rhs) {
  const MatrixXd b = a.transpose() * a;
  MatrixXd m = b * b;
  m.diagonal().array() += beta;
  return m.partialPivLu().solve(rhs);
}

// max over |S| = s of max(sigma_max^2 - 1, 1 - sigma_min^2) of A_S, by
// enumerating bitmasks (n <= 20) and taking singular values of A_S.
inline double rip_sweep(const MatrixXd& a, int s) {
  const int n = static_cast<int>(a.cols());
  double delta = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != s) continue;
    MatrixXd sub(a.rows(), s);
    int c = 0;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) sub.col(c++) = a.col(j);
    Eigen::JacobiSVD<MatrixXd> svd(sub);
    const auto& sv = svd.singularValues();
    const double hi = sv(0) * sv(0);
    const double lo = sub.rows() >= s ? sv(s - 1) * sv(s - 1) : 0.0;
    delta = std::max({delta, hi - 1.0, 1.0 - lo});
  }
  return delta;
}

// min c^T x subject to A x = b, x >= 0. Two-phase tableau simplex with
// Bland's rule, artificials on every row. Returns nullopt when infeasible or
// when the pivot cap is hit.
inline std::optional<VectorXd> simplex(const MatrixXd& a, const VectorXd& b, const VectorXd& c,
                                       int max_pivots = 100000) {
  const Index m = a.rows();
  const Index n = a.cols();
  const Index nv = n + m;
  const double tol = 1e-10;
  MatrixXd t = MatrixXd::Zero(m + 1, nv + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const double sg = b(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sg * a.row(i);
    t(i, n + i) = 1.0;
    t(i, nv) = sg * b(i);
    basis[static_cast<std::size_t>(i)] = n + i;
  }

  auto pivot = [&](Index r, Index col) {
    t.row(r) /= t(r, col);
    for (Index i = 0; i <= m; ++i)
      if (i != r && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(r);
    basis[static_cast<std::size_t>(r)] = col;
  };
  int pivots = 0;
  auto optimize = [&](Index allowed) -> bool {
    while (pivots < max_pivots) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j)
        if (t(m, j) < -tol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        if (t(i, enter) > tol) {
          const double ratio = std::max(t(i, nv), 0.0) / t(i, enter);
          if (ratio < best - 1e-14 ||
              (std::abs(ratio - best) <= 1e-14 && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
    return false;
  };

  for (Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
  if (!optimize(nv)) return std::nullopt;
  if (-t(m, nv) > 1e-9 * (1.0 + b.lpNorm<1>())) return std::nullopt;
  for (Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    for (Index j = 0; j < n; ++j)
      if (std::abs(t(i, j)) > tol) {
        pivot(i, j);
        break;
      }
  }

  t.row(m).setZero();
  t.row(m).head(n) = c.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index j = basis[static_cast<std::size_t>(i)];
    if (j < n && t(m, j) != 0.0) t.row(m) -= t(m, j) * t.row(i);
  }
  if (!optimize(n)) return std::nullopt;

  VectorXd x = VectorXd::Zero(n);
  for (Index i = 0; i < m; ++i) {
    const Index j = basis[static_cast<std::size_t>(i)];
    if (j < n) x(j) = t(i, nv);
  }
  return x;
}

// Basis pursuit min ||x||_1 s.t. A x = b, the eta -> 0 limit of the l1
// Dantzig selector when A has full row rank. Split x = u - v.
inline std::optional<VectorXd> basis_pursuit_lp(const MatrixXd& a, const VectorXd& b) {
  const Index n = a.cols();
  MatrixXd lhs(a.rows(), 2 * n);
  lhs << a, -a;
  const auto uv = simplex(lhs, b, VectorXd::Ones(2 * n));
  if (!uv) return std::nullopt;
  return VectorXd(uv->head(n) - uv->tail(n));
}

}  // namespace oracle
