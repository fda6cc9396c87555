// SPDX-License-Identifier: Apache-2.0
#pragma once

// LASSO  min_x  lambda ||x||_1 + 1/2 ||A x - b||^2  (optionally 0 <= x <= 1)
// by monotone FISTA with restart. Step 1/L with L from power iteration on
// A^H A, doubled whenever the quadratic upper bound is violated.

#include "xlmimo/solvers/linear_operator.hpp"
#include "xlmimo/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace xlmimo::solvers {

template <class S>
struct LassoProblem {
  LinearOperator<S> A;
  CVec b;
  double lambda = 0.0;
  bool box = false;  // real domain only: 0 <= x <= 1
  int max_iter = 2000;
  double tol = 1e-9;
  Eigen::Matrix<S, Eigen::Dynamic, 1> x0;  // optional warm start
};

template <class S>
struct SolverReport {
  Eigen::Matrix<S, Eigen::Dynamic, 1> x;
  std::vector<double> objective_trace;
  int iters = 0;
  bool converged = false;
  double fixed_point_residual = 0.0;
  Warnings warnings;
};

/// Complex or real soft-threshold by tau.
template <class S>
S soft_threshold(S v, double tau) {
  const double a = std::abs(v);
  if (a <= tau) return S(0);
  return v * ((a - tau) / a);
}

template <class S>
Eigen::Matrix<S, Eigen::Dynamic, 1> lasso_prox(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, double tau,
                                              bool box) {
  Eigen::Matrix<S, Eigen::Dynamic, 1> out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    S s = soft_threshold(v(i), tau);
    if constexpr (!is_complex_v<S>) {
      if (box) s = std::clamp(s, 0.0, 1.0);
    }
    out(i) = s;
  }
  return out;
}

template <class S>
double lasso_objective(const LassoProblem<S>& p, const Eigen::Matrix<S, Eigen::Dynamic, 1>& x) {
  return p.lambda * x.cwiseAbs().sum() + 0.5 * (p.A.apply(x) - p.b).squaredNorm();
}

template <class S>
SolverReport<S> lasso(const LassoProblem<S>& p) {
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  if (p.lambda < 0.0) throw std::invalid_argument("lasso: lambda must be >= 0");
  require_shape(p.b.size() == p.A.rows, "lasso: b length must equal operator rows");
  if constexpr (is_complex_v<S>) {
    if (p.box) throw std::invalid_argument("lasso: box constraint requires a real domain");
  }

  SolverReport<S> rep;
  Vec x = (p.x0.size() == p.A.cols) ? lasso_prox<S>(p.x0, 0.0, p.box) : Vec(Vec::Zero(p.A.cols));
  double L = operator_norm_sq(p.A) * 1.01;
  if (L <= 0.0) {
    rep.x = Vec::Zero(p.A.cols);
    rep.objective_trace.push_back(lasso_objective(p, rep.x));
    rep.converged = true;
    return rep;
  }

  Vec y = x;
  CVec r_x = p.A.apply(x) - p.b;
  double F_x = p.lambda * x.cwiseAbs().sum() + 0.5 * r_x.squaredNorm();
  double t = 1.0;
  bool plain = true;  // y == x: no momentum in the next step
  rep.objective_trace.push_back(F_x);

  auto fixed_point = [&](const Vec& at, const CVec& resid) {
    Vec step = at - p.A.adjoint(resid) / L;
    return (at - lasso_prox<S>(step, p.lambda / L, p.box)).norm() / std::max(1.0, at.norm());
  };

  for (int it = 1; it <= p.max_iter; ++it) {
    rep.iters = it;
    CVec r_y = p.A.apply(y) - p.b;
    const double f_y = 0.5 * r_y.squaredNorm();
    const Vec grad = p.A.adjoint(r_y);
    Vec z;
    CVec r_z;
    for (int bt = 0; bt < 60; ++bt) {
      z = lasso_prox<S>(Vec(y - grad / L), p.lambda / L, p.box);
      r_z = p.A.apply(z) - p.b;
      const Vec d = z - y;
      double model = f_y + std::real(grad.dot(d)) + 0.5 * L * d.squaredNorm();
      if (0.5 * r_z.squaredNorm() <= model * (1.0 + 1e-12) + 1e-300) break;
      L *= 2.0;
    }
    const double F_z = p.lambda * z.cwiseAbs().sum() + 0.5 * r_z.squaredNorm();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

    Vec x_prev = x;
    // A plain proximal step cannot increase F; accept it even when rounding
    // says otherwise, or the iterate stalls near the optimum.
    const bool accepted = plain || F_z <= F_x;
    if (accepted) {
      x = z;
      r_x = r_z;
      F_x = F_z;
      y = x + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
      plain = false;
    } else {
      // Restart: drop the momentum and take a plain proximal step next.
      y = x;
      t = 1.0;
      plain = true;
    }
    rep.objective_trace.push_back(F_x);

    const double change = (x - x_prev).norm() / std::max(1.0, x.norm());
    if (accepted && change <= p.tol) {
      rep.fixed_point_residual = fixed_point(x, r_x);
      if (rep.fixed_point_residual <= 10.0 * p.tol) {
        rep.converged = true;
        break;
      }
    }
  }
  if (!rep.converged) rep.fixed_point_residual = fixed_point(x, r_x);
  rep.x = std::move(x);
  return rep;
}

/// 0.1 * ||A^H b||_inf, the default sparsity weight.
template <class S>
double default_lambda(const LinearOperator<S>& A, const CVec& b) {
  if (A.cols == 0) return 0.0;
  return 0.1 * A.adjoint(b).cwiseAbs().maxCoeff();
}

}  // namespace xlmimo::solvers
