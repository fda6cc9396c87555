// SPDX-License-Identifier: Apache-2.0
#pragma once

// Benchmarks that ignore the spatial-wideband delays (every kappa = 0).

#include "xlmimo/beamspace.hpp"
#include "xlmimo/estimation/decomposed.hpp"
#include "xlmimo/estimation/result.hpp"
#include "xlmimo/pilot.hpp"
#include "xlmimo/solvers/omp.hpp"
#include "xlmimo/types.hpp"

namespace xlmimo::estimation {

/// Selector with kappa = 0 in every block.
inline RVec zero_delay_selector(const PilotOperator& phi) {
  RVec e = RVec::Zero(phi.slice_cols());
  for (Index b = 0; b < phi.rows(); ++b) e(b * phi.K()) = 1.0;
  return e;
}

/// h_LS = Phi_eff^+ y with Phi_eff built for zero delays.
inline EstimationResult ls_baseline(const PilotOperator& phi, const CMat& Y) {
  EstimationResult r;
  r.method = "ls";
  r.e_hat = zero_delay_selector(phi);
  r.H_hat = estimate_h_given_e(r.e_hat, phi, Y, &r.warnings);
  return r;
}

/// Dictionary mapping compact Z (zero delays) to vec(Y), column-major M x T.
inline CMat omp_dictionary(const PilotOperator& phi) {
  const Index M = phi.M(), N = phi.N(), L = phi.L(), T = phi.T(), width = N * L;
  const CMat A0 = phi.times_selector(zero_delay_selector(phi));
  const CMat Fr = dft_matrix(M), Ft = dft_matrix(N);
  CMat D = CMat::Zero(M * T, M * N * L);
  // Z_l(i, k) contributes Fr(m, i) conj(Ft(n, k)) to h_{m,n,l}.
  for (Index l = 0; l < L; ++l)
    for (Index k = 0; k < N; ++k)
      for (Index i = 0; i < M; ++i) {
        const Index col = l * M * N + k * M + i;
        for (Index m = 0; m < M; ++m)
          for (Index n = 0; n < N; ++n) {
            const cd c = Fr(m, i) * std::conj(Ft(n, k));
            for (Index t = 0; t < T; ++t) D(t * M + m, col) += c * A0(m * width + n * L + l, t);
          }
      }
  return D;
}

/// Beamspace OMP with K_u atoms, mapped back to H.
inline EstimationResult omp_baseline(const PilotOperator& phi, const CMat& Y, Index K_u) {
  EstimationResult r;
  r.method = "omp";
  r.e_hat = zero_delay_selector(phi);
  const CMat D = omp_dictionary(phi);
  auto rep = solvers::omp(D, Eigen::Map<const CVec>(Y.data(), Y.size()), K_u);
  r.iters = rep.iters;
  r.warnings = std::move(rep.warnings);
  r.H_hat = beamspace_to_channel(Beamspace::from_vec(rep.x, phi.M(), phi.N(), phi.L()));
  return r;
}

}  // namespace xlmimo::estimation
