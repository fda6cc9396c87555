// SPDX-License-Identifier: Apache-2.0
#pragma once

// Joint channel/delay estimation by ADMM on
//   min  ||Y - H Phi E||^2 + lambda_z ||Z||_1   s.t.  H = F1 Z F2,
// with augmented Lagrangian
//   L(H, Z, C) = ||Y - H Phi E||^2 + Re tr(C^H (H - F1 Z F2)) + rho/2 ||H - F1 Z F2||^2.
// One sweep: delay step at H, Z step, H step, dual ascent.

#include "xlmimo/beamspace.hpp"
#include "xlmimo/channel.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/estimation/decomposed.hpp"
#include "xlmimo/estimation/nmse.hpp"
#include "xlmimo/estimation/result.hpp"
#include "xlmimo/pilot.hpp"
#include "xlmimo/solvers/lasso.hpp"
#include "xlmimo/types.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace xlmimo::estimation {

struct AdmmState {
  CMat H;        // M x MNL, block-diagonal
  Beamspace Z;
  RVec e_relaxed;
  RVec e;        // one-hot; E = I_T (x) e is applied through the pilot operator
  CMat C;        // dual, M x MNL
  double rho = 6.0;
  int j = 0;
  std::vector<double> residual_trace;
  std::vector<double> objective_trace;
};

/// Unitary map from compact Z to the packed diagonal blocks of F1 Z F2.
inline solvers::LinearOperator<cd> beamspace_operator(int M, int N, int L) {
  solvers::LinearOperator<cd> op;
  op.rows = op.cols = Index(M) * N * L;
  op.apply = [=](const CVec& z) -> CVec {
    CMat P = pack_blocks(beamspace_to_channel(Beamspace::from_vec(z, M, N, L)));
    return Eigen::Map<const CVec>(P.data(), P.size());
  };
  op.adjoint = [=](const CVec& v) -> CVec {
    CMat P = Eigen::Map<const CMat>(v.data(), M, Index(N) * L);
    return channel_to_beamspace(unpack_blocks(P), M, N, L).vec();
  };
  return op;
}

struct ZUpdate {
  Beamspace Z;
  double lambda = 0.0;  // weight of ||Z||_1 in the normalised problem
  std::vector<double> objective_trace;
  bool converged = true;
};

/// Z step: min_Z lambda_z ||Z||_1 + rho/2 ||H + C/rho - F1 Z F2||^2.
/// lambda_z unset uses 0.1 rho ||F1^H V F2^H||_inf.
inline ZUpdate admm_z_update(const CMat& H, const CMat& C, double rho, int M, int N, int L,
                             std::optional<double> lambda_z, int max_iter = 200, double tol = 1e-10) {
  const CMat V = pack_blocks(H + C / rho);
  solvers::LassoProblem<cd> p;
  p.A = beamspace_operator(M, N, L);
  p.b = Eigen::Map<const CVec>(V.data(), V.size());
  p.lambda = lambda_z ? *lambda_z / rho : solvers::default_lambda(p.A, p.b);
  p.max_iter = max_iter;
  p.tol = tol;
  auto rep = solvers::lasso(p);
  return {Beamspace::from_vec(rep.x, M, N, L), p.lambda, std::move(rep.objective_trace), rep.converged};
}

/// Right-hand side and normal matrix of the H step for one receive antenna:
///   h_m (2 A_m A_m^H + rho I) = 2 y_m A_m^H - c_m + rho b_m,
/// A_m the NL x T rows of Phi (I_T (x) e) belonging to antenna m.
struct HUpdate {
  CMat H;
  Warnings warnings;
};

inline HUpdate admm_h_update(const CMat& Y, const CMat& A, const CMat& B, const CMat& C, double rho) {
  const Index M = Y.rows(), width = A.rows() / std::max<Index>(M, 1);
  require_shape(A.rows() == M * width && A.cols() == Y.cols(), "admm_h_update: A must be MNL x T");
  require_shape(B.rows() == M && B.cols() == A.rows() && C.rows() == M && C.cols() == A.rows(),
                "admm_h_update: B and C must be M x MNL");
  HUpdate out{CMat::Zero(M, M * width), {}};
  for (Index m = 0; m < M; ++m) {
    const CMat Am = A.middleRows(m * width, width);
    CMat G = 2.0 * Am * Am.adjoint();
    G.diagonal().array() += rho;
    const CVec rhs = (2.0 * Y.row(m) * Am.adjoint() - C.row(m).segment(m * width, width) +
                      rho * B.row(m).segment(m * width, width))
                         .adjoint();
    Eigen::LDLT<CMat> ldlt(G);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().real().minCoeff() > 0.0)) {
      G.diagonal().array() += 1e-12 * std::max(1.0, G.trace().real());
      ldlt.compute(G);
      warn(&out.warnings, "H step: singular normal matrix regularised");
    }
    out.H.row(m).segment(m * width, width) = ldlt.solve(rhs).adjoint();
  }
  return out;
}

/// Augmented Lagrangian value, used by the tests and the trace.
inline double admm_lagrangian(const CMat& Y, const CMat& A, const CMat& H, const CMat& B, const CMat& C,
                              double rho) {
  const CMat D = H - B;
  return (Y - H * A).squaredNorm() + (C.adjoint() * D).trace().real() + 0.5 * rho * D.squaredNorm();
}

/// Best rank-one approximation of every path's M x N gain matrix. A single
/// far-field path is a_rx a_tx^H, so this strips gains fitted to wrong delays.
inline CMat rank_one_paths(const CMat& H, int M, int N, int L) {
  const Index width = Index(N) * L;
  CMat out = CMat::Zero(H.rows(), H.cols());
  for (int l = 0; l < L; ++l) {
    CMat G(M, N);
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n) G(m, n) = H(m, m * width + n * L + l);
    if (G.norm() == 0.0) continue;
    Eigen::JacobiSVD<CMat> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const CMat R = svd.singularValues()(0) * svd.matrixU().col(0) * svd.matrixV().col(0).adjoint();
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n) out(m, m * width + n * L + l) = R(m, n);
  }
  return out;
}

struct AdmmOptions {
  const ChannelRealization* truth = nullptr;  // enables the NMSE trace
};

/// Full estimator. Stops after cfg.I_max sweeps or once the primal residual
/// drops below cfg.admm_tol * ||H0||_F. A residual that grows 10x over five
/// consecutive sweeps aborts the run; the last iterate is returned.
inline EstimationResult admm_estimate(const CMat& Y, const PilotOperator& phi, const CMat& H0,
                                      const SystemConfig& cfg, const AdmmOptions& opt = {}) {
  require_shape(H0.rows() == phi.M() && H0.cols() == phi.rows(), "admm_estimate: H0 must be M x MNL");
  require_shape(Y.rows() == phi.M() && Y.cols() == phi.T(), "admm_estimate: Y must be M x T");
  const int M = phi.M(), N = phi.N(), L = phi.L();

  EstimationResult r;
  r.method = "proposed";
  AdmmState s;
  s.H = block_project(H0);
  s.Z = Beamspace::zeros(M, N, L);
  s.C = CMat::Zero(H0.rows(), H0.cols());
  s.e = RVec::Zero(phi.slice_cols());
  s.rho = cfg.rho;
  const double stop = cfg.admm_tol * std::max(H0.norm(), 1e-300);

  auto record_nmse = [&](TraceRow& row) {
    if (opt.truth != nullptr) row.nmse = nmse(opt.truth->H, s.H);
  };
  TraceRow first;
  first.residual = std::numeric_limits<double>::quiet_NaN();
  first.objective = std::numeric_limits<double>::quiet_NaN();
  record_nmse(first);
  r.trace.push_back(first);

  r.converged = cfg.I_max == 0;
  for (s.j = 1; s.j <= cfg.I_max; ++s.j) {
    const CMat He = rank_one_paths(s.H, M, N, L);
    // Previous delays are kept unless the new ones fit better; otherwise noise
    // alone flips taps from one iteration to the next.
    auto d = estimate_e_given_h(He, phi, Y, cfg, s.e_relaxed.size() ? &s.e_relaxed : nullptr,
                                s.j > 1 ? &s.e : nullptr);
    if (!d.converged) warn(&r.warnings, "iteration " + std::to_string(s.j) + ": delay step did not converge");
    s.e_relaxed = std::move(d.relaxed);
    s.e = std::move(d.e);
    const CMat A = phi.times_selector(s.e);

    auto zu = admm_z_update(s.H, s.C, s.rho, M, N, L, cfg.lambda_z);
    s.Z = std::move(zu.Z);
    const CMat B = beamspace_to_channel(s.Z);

    auto hu = admm_h_update(Y, A, B, s.C, s.rho);
    for (auto& w : hu.warnings) r.warnings.push_back(std::move(w));
    s.H = std::move(hu.H);

    const CMat D = s.H - B;
    s.C += s.rho * D;

    const double res = D.norm();
    const double obj = (Y - s.H * A).squaredNorm() + zu.lambda * s.rho * s.Z.l1_norm();
    s.residual_trace.push_back(res);
    s.objective_trace.push_back(obj);
    TraceRow row{s.j, obj, res, std::numeric_limits<double>::quiet_NaN()};
    record_nmse(row);
    r.trace.push_back(row);
    r.iters = s.j;

    if (!std::isfinite(res) || !s.H.allFinite()) {
      r.diverged = true;
      warn(&r.warnings, "ADMM produced non-finite iterates at iteration " + std::to_string(s.j));
      break;
    }
    const auto& rt = s.residual_trace;
    if (rt.size() >= 6) {
      bool rising = true;
      for (std::size_t i = rt.size() - 5; i < rt.size(); ++i) rising = rising && rt[i] > rt[i - 1];
      if (rising && rt.back() > 10.0 * rt[rt.size() - 6]) {
        r.diverged = true;
        warn(&r.warnings, "ADMM diverging: primal residual grew from " + std::to_string(rt[rt.size() - 6]) +
                              " to " + std::to_string(rt.back()) + " over 5 iterations; aborted at " +
                              std::to_string(s.j));
        break;
      }
    }
    if (res < stop) {
      r.converged = true;
      break;
    }
  }

  r.H_hat = s.H;
  r.e_hat = s.e;
  if (opt.truth != nullptr) {
    auto v = nmse_terms(opt.truth->H, r.H_hat, &r.warnings);
    r.nmse = v.mean();
    r.nmse_sum = v.sum;
  }
  return r;
}

}  // namespace xlmimo::estimation
