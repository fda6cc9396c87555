// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/solvers/lasso.hpp"
#include "xlmimo/types.hpp"

#include <string>
#include <vector>

namespace xlmimo::solvers {

struct OmpOptions {
  // Atoms are grouped in contiguous runs of group_size columns; at most
  // per_group atoms may be selected from one group. group_size = 0 disables.
  Index group_size = 0;
  Index per_group = 1;
  double residual_tol = 1e-12;  // stop once ||r|| <= residual_tol * ||b||
};

/// Orthogonal matching pursuit over the columns of A. Each step picks the
/// column with the largest normalised correlation to the residual and
/// re-fits all active coefficients by least squares. The report's
/// objective_trace holds the residual norm after every step (entry 0 = ||b||).
inline SolverReport<cd> omp(const CMat& A, const CVec& b, Index sparsity, const OmpOptions& opt = {}) {
  require_shape(A.rows() == b.size(), "omp: b length must equal A rows");
  if (sparsity < 0 || sparsity > A.cols()) throw std::invalid_argument("omp: sparsity must lie in [0, cols]");

  SolverReport<cd> rep;
  rep.x = CVec::Zero(A.cols());
  const double b_norm = b.norm();
  rep.objective_trace.push_back(b_norm);
  if (sparsity == 0 || b_norm == 0.0) {
    rep.converged = true;
    return rep;
  }

  const RVec col_norm = A.colwise().norm().transpose();
  std::vector<char> excluded(std::size_t(A.cols()), 0);
  std::vector<Index> group_count;
  if (opt.group_size > 0) group_count.assign(std::size_t((A.cols() + opt.group_size - 1) / opt.group_size), 0);
  for (Index j = 0; j < A.cols(); ++j)
    if (col_norm(j) == 0.0) excluded[std::size_t(j)] = 1;

  std::vector<Index> active;
  CVec coef;
  CVec r = b;
  while (Index(active.size()) < sparsity) {
    const CVec corr = A.adjoint() * r;
    Index best = -1;
    double best_val = 0.0;
    for (Index j = 0; j < A.cols(); ++j) {
      if (excluded[std::size_t(j)]) continue;
      double v = std::abs(corr(j)) / col_norm(j);
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    if (best < 0 || best_val <= 1e-14 * b_norm) break;

    active.push_back(best);
    CMat As(A.rows(), Index(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) As.col(Index(i)) = A.col(active[i]);
    Eigen::ColPivHouseholderQR<CMat> qr(As);
    qr.setThreshold(1e-10);
    if (qr.rank() < Index(active.size())) {
      rep.warnings.push_back("omp: atom " + std::to_string(best) + " is linearly dependent on the active set; dropped");
      active.pop_back();
      excluded[std::size_t(best)] = 1;
      continue;
    }
    excluded[std::size_t(best)] = 1;
    if (opt.group_size > 0) {
      Index g = best / opt.group_size;
      if (++group_count[std::size_t(g)] >= opt.per_group)
        for (Index j = g * opt.group_size; j < std::min(A.cols(), (g + 1) * opt.group_size); ++j)
          excluded[std::size_t(j)] = 1;
    }
    coef = qr.solve(b);
    r = b - As * coef;
    rep.iters = int(active.size());
    rep.objective_trace.push_back(r.norm());
    if (r.norm() <= opt.residual_tol * b_norm) break;
  }
  for (std::size_t i = 0; i < active.size(); ++i) rep.x(active[i]) = coef(Index(i));
  rep.converged = true;
  return rep;
}

}  // namespace xlmimo::solvers
