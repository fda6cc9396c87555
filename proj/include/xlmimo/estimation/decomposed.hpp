// SPDX-License-Identifier: Apache-2.0
#pragma once

// The two subproblems of the joint channel/delay estimate and their
// oracle-fed composition.
//   delay step:   min_e  ||Y - H* Phi (I_T (x) e)||^2 over one-hot e (relaxed)
//   channel step: H = P(Y (Phi E*)^+)

#include "xlmimo/channel.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/estimation/delay_search.hpp"
#include "xlmimo/estimation/nmse.hpp"
#include "xlmimo/estimation/result.hpp"
#include "xlmimo/pilot.hpp"
#include "xlmimo/solvers/lasso.hpp"
#include "xlmimo/solvers/omp.hpp"
#include "xlmimo/solvers/projection.hpp"
#include "xlmimo/types.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <string>

namespace xlmimo::estimation {

struct DelayEstimate {
  RVec relaxed;  // continuous solution before projection
  RVec e;        // one-hot per K-block
  bool converged = true;
  int solver_iters = 0;
  std::vector<Index> empty_blocks;
  Warnings warnings;
};

/// Real operator x -> vec(H Phi (I_T (x) x)), column-major over the M x T output.
inline solvers::LinearOperator<double> delay_operator(const CMat& H, const PilotOperator& phi) {
  require_shape(H.rows() == phi.M() && H.cols() == phi.rows(), "delay_operator: H must be M x MNL");
  const Index M = phi.M(), N = phi.N(), L = phi.L(), K = phi.K(), T = phi.T(), width = N * L;
  auto S = std::make_shared<const std::vector<CMat>>(detail::shifted_training(phi));
  auto Hs = std::make_shared<const CMat>(pack_blocks(H));
  solvers::LinearOperator<double> op;
  op.rows = M * T;
  op.cols = phi.slice_cols();
  op.apply = [=](const RVec& x) -> CVec {
    CMat Y = CMat::Zero(M, T);
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n)
        for (Index l = 0; l < L; ++l) {
          const cd h = (*Hs)(m, n * L + l);
          if (h == cd(0.0, 0.0)) continue;
          const Index b = m * width + n * L + l;
          Y.row(m) += h * (x.segment(b * K, K).transpose().cast<cd>() * (*S)[std::size_t(n)]);
        }
    return Eigen::Map<const CVec>(Y.data(), Y.size());
  };
  op.adjoint = [=](const CVec& r) -> RVec {
    Eigen::Map<const CMat> R(r.data(), M, T);
    RVec out = RVec::Zero(M * width * K);
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n)
        for (Index l = 0; l < L; ++l) {
          const cd h = (*Hs)(m, n * L + l);
          if (h == cd(0.0, 0.0)) continue;
          const Index b = m * width + n * L + l;
          out.segment(b * K, K) = (std::conj(h) * ((*S)[std::size_t(n)].conjugate() * R.row(m).transpose())).real();
        }
    return out;
  };
  return op;
}

/// Real T x NLK dictionary of one receive antenna: column (n, l, k) is
/// h_{m,n,l} qbar_n(t - k) over t.
inline CMat delay_dictionary(const CMat& packed, Index m, const std::vector<CMat>& S, Index L) {
  const Index N = Index(S.size()), K = S.front().rows(), T = S.front().cols();
  CMat D = CMat::Zero(T, N * L * K);
  for (Index n = 0; n < N; ++n)
    for (Index l = 0; l < L; ++l) {
      const cd h = packed(m, n * L + l);
      if (h != cd(0.0, 0.0)) D.middleCols((n * L + l) * K, K) = h * S[std::size_t(n)].transpose();
    }
  return D;
}

/// Delay step for a fixed channel. The LASSO path solves the box-relaxed
/// problem (it separates over receive antennas), thresholds at cfg.thr and
/// keeps one entry per block. The OMP path fits, per receive antenna, one
/// shifted training row for every nonzero (n, l) and marks the chosen shift.
/// Paths whose channel columns are all zero are seeded afterwards. Given
/// `prev`, the previous selector is kept unless the new one lowers the
/// gain-fitted misfit.
inline DelayEstimate estimate_e_given_h(const CMat& H_star, const PilotOperator& phi, const CMat& Y,
                                        const SystemConfig& cfg, const RVec* warm = nullptr,
                                        const RVec* prev = nullptr) {
  require_shape(H_star.rows() == phi.M() && H_star.cols() == phi.rows(),
                "estimate_e_given_h: H must be M x MNL");
  require_shape(Y.rows() == phi.M() && Y.cols() == phi.T(), "estimate_e_given_h: Y must be M x T");
  const Index M = phi.M(), L = phi.L(), K = phi.K(), width = Index(phi.N()) * L;
  const Index n_blocks = phi.rows(), row_len = width * K;
  const auto S = detail::shifted_training(phi);
  const CMat P = pack_blocks(H_star);
  DelayEstimate out;
  out.relaxed = RVec::Zero(n_blocks * K);

  std::vector<CMat> dicts;
  dicts.reserve(std::size_t(M));
  for (Index m = 0; m < M; ++m) dicts.push_back(delay_dictionary(P, m, S, L));

  if (cfg.e_solver == DelaySolver::kLasso) {
    double lambda = 0.0;
    if (cfg.lambda_e) {
      lambda = *cfg.lambda_e;
    } else {
      for (Index m = 0; m < M; ++m)
        lambda = std::max(lambda, (dicts[std::size_t(m)].adjoint() * Y.row(m).transpose()).real().cwiseAbs().maxCoeff());
      lambda *= 0.1;
    }
    for (Index m = 0; m < M; ++m) {
      solvers::LassoProblem<double> p;
      p.A = solvers::LinearOperator<double>::from_matrix(dicts[std::size_t(m)]);
      p.b = Y.row(m).transpose();
      p.lambda = lambda;
      p.box = true;
      p.max_iter = cfg.lasso_max_iter;
      p.tol = cfg.lasso_tol;
      if (warm != nullptr && warm->size() == n_blocks * K) p.x0 = warm->segment(m * row_len, row_len);
      auto rep = solvers::lasso(p);
      out.relaxed.segment(m * row_len, row_len) = rep.x;
      out.converged = out.converged && rep.converged;
      out.solver_iters += rep.iters;
    }
    if (!out.converged) warn(&out.warnings, "delay step: LASSO did not converge");
  } else {
    for (Index m = 0; m < M; ++m) {
      Index active = 0;
      for (Index c = 0; c < width; ++c) active += (P(m, c) != cd(0.0, 0.0)) ? 1 : 0;
      solvers::OmpOptions opt;
      opt.group_size = K;
      opt.per_group = 1;
      auto rep = solvers::omp(dicts[std::size_t(m)], Y.row(m).transpose(), active, opt);
      for (Index j = 0; j < rep.x.size(); ++j)
        if (rep.x(j) != cd(0.0, 0.0)) out.relaxed(m * row_len + j) = std::max(1e-12, std::abs(rep.x(j)));
      for (auto& s : rep.warnings) out.warnings.push_back(std::move(s));
      out.solver_iters += rep.iters;
    }
  }

  const RVec boosted = out.relaxed + solvers::threshold(out.relaxed, cfg.thr);
  auto oh = solvers::project_onehot(boosted, K, n_blocks);
  out.e = std::move(oh.e);
  out.empty_blocks = oh.empty_blocks;
  solvers::report_empty_blocks(oh, &out.warnings);
  if (cfg.e_polish_sweeps > 0) polish_delays(P, S, Y, L, out.e, cfg.e_polish_sweeps, cfg.W / cfg.f_c);
  // Consecutive paths sit at least one sample plus the aperture spread apart.
  const double sep = 1.0 + double(cfg.M + cfg.N - 2) * cfg.W / cfg.f_c;
  seed_unsupported_paths(P, S, Y, L, out.e, Index(std::floor(sep + 0.5)), &out.warnings);
  if (prev != nullptr && prev->size() == out.e.size()) {
    const detail::DelayModel dm(P, S, Y, L);
    const double m_new = detail::state_from(dm, detail::argmax_blocks(out.e, K)).misfit();
    const double m_old = detail::state_from(dm, detail::argmax_blocks(*prev, K)).misfit();
    if (m_old <= m_new) out.e = *prev;
  }
  return out;
}

/// Channel step for fixed delays: per receive antenna the minimum-norm
/// least-squares row over its own block, so the result is block-diagonal.
inline CMat estimate_h_given_e(const RVec& e_star, const PilotOperator& phi, const CMat& Y,
                               Warnings* w = nullptr) {
  require_shape(e_star.size() == phi.slice_cols(), "estimate_h_given_e: e must have length MNLK");
  require_shape(Y.rows() == phi.M() && Y.cols() == phi.T(), "estimate_h_given_e: Y must be M x T");
  const Index M = phi.M(), width = Index(phi.N()) * phi.L();
  const CMat A = phi.times_selector(e_star);
  CMat H = CMat::Zero(M, M * width);
  Index deficient = 0;
  for (Index m = 0; m < M; ++m) {
    const CMat At = A.middleRows(m * width, width).transpose();  // T x NL
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(At);
    cod.setThreshold(1e-10);
    if (cod.rank() < width) ++deficient;
    H.row(m).segment(m * width, width) = cod.solve(CVec(Y.row(m).transpose())).transpose();
  }
  if (deficient > 0)
    warn(w, "channel step: " + std::to_string(deficient) +
                " row(s) rank deficient; minimum-norm solution used (T too small or repeated delays)");
  return H;
}

/// Lower-bound benchmark: delay step fed the true channel, channel step fed
/// the true delays.
inline EstimationResult idealized_decomposed(const CMat& Y, const PilotOperator& phi,
                                             const ChannelRealization& truth, const SystemConfig& cfg) {
  EstimationResult r;
  r.method = "idealized";
  auto d = estimate_e_given_h(truth.H, phi, Y, cfg);
  r.e_hat = d.e;
  r.converged = d.converged;
  r.warnings = std::move(d.warnings);
  r.H_hat = estimate_h_given_e(truth.e, phi, Y, &r.warnings);
  auto v = nmse_terms(truth.H, r.H_hat, &r.warnings);
  r.nmse = v.mean();
  r.nmse_sum = v.sum;
  return r;
}

}  // namespace xlmimo::estimation
