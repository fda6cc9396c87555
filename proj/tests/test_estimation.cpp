// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace xlmimo;
using namespace xlmimo::estimation;

namespace {

SystemConfig small_config() {
  SystemConfig c;
  c.M = c.N = 4;
  c.L_p = 2;
  c.K = 8;
  c.L_t = 8;
  c.T = 12;
  c.xi = SystemConfig::default_xi(2);
  c.snr_db = std::numeric_limits<double>::infinity();
  c.lasso_tol = 1e-7;
  return c;
}

}  // namespace

TEST(Nmse, ModesAndExclusion) {
  CMat T = CMat::Zero(2, 4), E = CMat::Zero(2, 4);
  T(0, 0) = 1.0;
  T(0, 1) = 1.0;
  E(0, 0) = 1.0;  // row 0: ||(0,1)|| / sqrt 2
  Warnings w;
  auto v = nmse_terms(T, E, &w);
  EXPECT_EQ(v.rows, 1);
  EXPECT_EQ(v.excluded, 1);
  EXPECT_NEAR(v.sum, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_FALSE(w.empty());
  T(1, 3) = 2.0;
  EXPECT_NEAR(nmse(T, E, NmseMode::kMean), 0.5 * (1.0 / std::sqrt(2.0) + 1.0), 1e-15);
  EXPECT_NEAR(nmse(T, E, NmseMode::kPaper), 1.0 / std::sqrt(2.0) + 1.0, 1e-15);
  EXPECT_EQ(nmse(T, T), 0.0);
  EXPECT_THROW(nmse(T, CMat::Zero(2, 2)), std::invalid_argument);
}

TEST(BlockOps, PackUnpackProject) {
  CMat H = CMat::Random(3, 6);
  const CMat P = block_project(H);
  EXPECT_EQ(unpack_blocks(pack_blocks(H)), P);
  EXPECT_EQ(block_project(P), P);
  EXPECT_EQ(P(0, 2), cd(0.0, 0.0));
  EXPECT_EQ(P(1, 2), H(1, 2));
}

TEST(PositionInit, AnglesAndLosColumns) {
  auto a = los_angles({0.0, 0.0}, {0.0, 1.0});
  EXPECT_NEAR(a.aoa, 0.0, 1e-15);
  EXPECT_NEAR(a.aod, 0.0, 1e-15);
  EXPECT_THROW(los_angles({1.0, 1.0}, {1.0, 1.0}), GeometryError);

  auto c = small_config();
  auto s = xt::sample(c, 3);
  auto [bs, ue] = positions_for_path(s.ch.paths[0], c.d_tx_rx);
  std::mt19937_64 rng(1);
  const CMat H0 = init_from_position(c, bs, ue, 0.0, rng);
  // LoS columns are parallel to the true LoS path; nLoS columns are zero.
  const Index width = Index(c.N) * c.L_p;
  CVec a0(c.M * c.N), t0(c.M * c.N);
  for (Index m = 0; m < c.M; ++m)
    for (Index n = 0; n < c.N; ++n) {
      a0(m * c.N + n) = H0(m, m * width + n * c.L_p);
      t0(m * c.N + n) = s.ch.h(m, n, 0);
      EXPECT_EQ(H0(m, m * width + n * c.L_p + 1), cd(0.0, 0.0));
    }
  EXPECT_NEAR(std::abs(a0.dot(t0)) / (a0.norm() * t0.norm()), 1.0, 1e-12);
  EXPECT_NEAR(a0.norm(), 1.0, 1e-12);  // unit-norm steering vectors
  std::mt19937_64 r1(5), r2(5);
  EXPECT_EQ(init_from_position(c, bs, ue, 0.1, r1), init_from_position(c, bs, ue, 0.1, r2));
}

TEST(DecomposedSteps, ChannelStepExactWithTrueDelays) {
  auto c = small_config();
  auto s = xt::sample(c, 10);
  PilotOperator phi(s.ts, c);
  Warnings w;
  const CMat H = estimate_h_given_e(s.ch.e, phi, s.Y, &w);
  EXPECT_LT(nmse(s.ch.H, H), 1e-10);
  EXPECT_TRUE(w.empty());
}

TEST(DecomposedSteps, ChannelStepWarnsWhenUnderdetermined) {
  auto c = small_config();
  c.T = 4;
  auto s = xt::sample(c, 10);
  PilotOperator phi(s.ts, c);
  Warnings w;
  estimate_h_given_e(s.ch.e, phi, s.Y, &w);
  EXPECT_FALSE(w.empty());
}

TEST(DecomposedSteps, DelayStepExactWithTrueChannel) {
  auto c = small_config();
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = xt::sample(c, seed);
    PilotOperator phi(s.ts, c);
    auto d = estimate_e_given_h(s.ch.H, phi, s.Y, c);
    exact += (d.e - s.ch.e).cwiseAbs().sum() == 0.0 ? 1 : 0;
    EXPECT_EQ(d.e.size(), c.e_length());
  }
  EXPECT_GE(exact, 9);
}

TEST(DecomposedSteps, OmpDelayStepExactWithTrueChannel) {
  auto c = small_config();
  c.e_solver = DelaySolver::kOmp;
  auto s = xt::sample(c, 4);
  PilotOperator phi(s.ts, c);
  auto d = estimate_e_given_h(s.ch.H, phi, s.Y, c);
  EXPECT_EQ((d.e - s.ch.e).cwiseAbs().sum(), 0.0);
}

TEST(DecomposedSteps, SeedsPathsWithZeroChannel) {
  auto c = small_config();
  auto s = xt::sample(c, 6);
  PilotOperator phi(s.ts, c);
  CMat H = s.ch.H;
  const Index width = Index(c.N) * c.L_p;
  for (Index m = 0; m < c.M; ++m)
    for (Index n = 0; n < c.N; ++n) H(m, m * width + n * c.L_p + 1) = 0.0;
  auto d = estimate_e_given_h(H, phi, s.Y, c);
  // Every block of the zeroed path still receives exactly one delay.
  for (Index b = 0; b < c.blocks(); ++b) EXPECT_DOUBLE_EQ(d.e.segment(b * c.K, c.K).sum(), 1.0);
}

TEST(Idealized, NoiselessRecovery) {
  auto c = small_config();
  auto s = xt::sample(c, 21);
  PilotOperator phi(s.ts, c);
  auto r = idealized_decomposed(s.Y, phi, s.ch, c);
  EXPECT_LT(r.nmse, 1e-8);
  EXPECT_EQ((r.e_hat - s.ch.e).cwiseAbs().sum(), 0.0);
}

TEST(Admm, HStepGradientVanishes) {
  // Gradient of the augmented Lagrangian in the in-block entries of H is
  // zero at the H-step output (central differences on real and imaginary parts).
  auto c = small_config();
  auto s = xt::sample(c, 2);
  PilotOperator phi(s.ts, c);
  const CMat A = phi.times_selector(s.ch.e);
  std::mt19937_64 rng(3);
  const CMat B = block_project(CMat::Random(c.M, c.blocks()));
  const CMat C = block_project(CMat::Random(c.M, c.blocks()));
  const double rho = 6.0;
  const CMat H = admm_h_update(s.Y, A, B, C, rho).H;
  const double f0 = admm_lagrangian(s.Y, A, H, B, C, rho);
  const double h = 1e-6;
  double worst = 0.0;
  const Index width = Index(c.N) * c.L_p;
  for (Index m = 0; m < c.M; ++m)
    for (Index j = m * width; j < (m + 1) * width; ++j)
      for (cd dir : {cd(1.0, 0.0), cd(0.0, 1.0)}) {
        CMat Hp = H, Hm = H;
        Hp(m, j) += h * dir;
        Hm(m, j) -= h * dir;
        const double g = (admm_lagrangian(s.Y, A, Hp, B, C, rho) - admm_lagrangian(s.Y, A, Hm, B, C, rho)) / (2 * h);
        worst = std::max(worst, std::abs(g) / std::max(1.0, std::abs(f0)));
      }
  EXPECT_LT(worst, 1e-6);
}

TEST(Admm, ZStepIsBeamspaceLasso) {
  const int M = 4, N = 4, L = 2;
  CMat H = CMat::Zero(M, M * N * L);
  std::mt19937_64 rng(1);
  H = block_project(CMat::Random(M, M * N * L));
  const CMat C = CMat::Zero(M, M * N * L);
  // Zero weight: Z reproduces H exactly.
  auto z0 = admm_z_update(H, C, 6.0, M, N, L, 0.0);
  EXPECT_LT((beamspace_to_channel(z0.Z) - H).norm() / H.norm(), 1e-8);
  // Unitary operator: the solution is the soft-threshold of the beamspace coefficients.
  auto z1 = admm_z_update(H, C, 6.0, M, N, L, 1.2);
  const CVec coef = channel_to_beamspace(H, M, N, L).vec();
  const CVec got = z1.Z.vec();
  for (Index i = 0; i < coef.size(); ++i) EXPECT_LT(std::abs(got(i) - solvers::soft_threshold(coef(i), 0.2)), 1e-7);
  EXPECT_NEAR(z1.lambda, 0.2, 1e-15);
}

TEST(Admm, BeamspaceOperatorIsUnitary) {
  auto op = beamspace_operator(3, 4, 2);
  const CVec z = CVec::Random(op.cols);
  const CVec v = CVec::Random(op.rows);
  EXPECT_NEAR(op.apply(z).norm(), z.norm(), 1e-12);
  EXPECT_LT((op.adjoint(op.apply(z)) - z).norm(), 1e-12);
  EXPECT_LT(std::abs(op.apply(z).dot(v) - z.dot(op.adjoint(v))), 1e-12);
}

TEST(Admm, NoiselessWithSmallPenaltyApproachesTruth) {
  auto c = small_config();
  c.I_max = 100;
  c.lambda_z = 1e-6;
  auto s = xt::sample(c, 12);
  PilotOperator phi(s.ts, c);
  auto [bs, ue] = positions_for_path(s.ch.paths[0], c.d_tx_rx);
  std::mt19937_64 rng(1);
  const CMat H0 = init_from_position(c, bs, ue, 0.0, rng);
  auto r = admm_estimate(s.Y, phi, H0, c, {&s.ch});
  EXPECT_FALSE(r.diverged);
  EXPECT_EQ(int(r.trace.size()), r.iters + 1);
  EXPECT_EQ(r.e_hat, s.ch.e);
  EXPECT_LT(to_db(r.nmse), -25.0);
}

// The default sparsity weight biases off-grid angles, but the delays must
// still be exact and the channel must improve on the LoS-only start.
TEST(Admm, NoiselessDefaultPenaltyRecoversDelays) {
  auto c = small_config();
  c.I_max = 30;
  for (std::uint64_t seed : {3u, 5u, 7u, 12u}) {
    auto s = xt::sample(c, seed);
    PilotOperator phi(s.ts, c);
    auto [bs, ue] = positions_for_path(s.ch.paths[0], c.d_tx_rx);
    std::mt19937_64 rng(1);
    const CMat H0 = init_from_position(c, bs, ue, 0.0, rng);
    auto r = admm_estimate(s.Y, phi, H0, c, {&s.ch});
    EXPECT_EQ(r.e_hat, s.ch.e) << "seed " << seed;
    EXPECT_LT(to_db(r.nmse), to_db(r.trace.front().nmse) - 3.0) << "seed " << seed;
  }
}

TEST(Admm, ZeroIterationsReturnsInit) {
  auto c = small_config();
  c.I_max = 0;
  auto s = xt::sample(c, 1);
  PilotOperator phi(s.ts, c);
  const CMat H0 = block_project(CMat::Random(c.M, c.blocks()));
  auto r = admm_estimate(s.Y, phi, H0, c);
  EXPECT_EQ(r.iters, 0);
  EXPECT_EQ(r.H_hat, H0);
  EXPECT_THROW(admm_estimate(s.Y, phi, CMat::Zero(2, 2), c), std::invalid_argument);
}

TEST(Baselines, LsIsExactWithoutSquintWhenDelaysAreZero) {
  auto c = small_config();
  c.L_p = 1;
  c.xi = {2.0};
  c.f_c = 1e15;  // aperture delays far below one sample
  auto s = xt::sample(c, 3);
  ASSERT_EQ(s.ch.e, zero_delay_selector(PilotOperator(s.ts, c)));
  PilotOperator phi(s.ts, c);
  auto r = ls_baseline(phi, s.Y);
  EXPECT_LT(nmse(s.ch.H, r.H_hat), 1e-10);
}

TEST(Baselines, OmpDictionaryMatchesSynthesis) {
  auto c = small_config();
  auto s = xt::sample(c, 3);
  PilotOperator phi(s.ts, c);
  const CMat D = omp_dictionary(phi);
  const CVec z = s.ch.Z.vec();
  const CVec y = D * z;
  const CMat Y = synthesize_rx(beamspace_to_channel(s.ch.Z), phi, zero_delay_selector(phi));
  EXPECT_LT((y - Eigen::Map<const CVec>(Y.data(), Y.size())).norm(), 1e-10);
  auto r = omp_baseline(phi, s.Y, 4);
  EXPECT_EQ(r.H_hat.rows(), c.M);
  EXPECT_LE(r.iters, 4);
}
