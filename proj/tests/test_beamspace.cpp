// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace xlmimo;

TEST(Beamspace, DftIsUnitary) {
  for (Index n : {1, 4, 7}) {
    const CMat F = dft_matrix(n);
    EXPECT_LT((F.adjoint() * F - CMat::Identity(n, n)).norm(), 1e-12);
  }
}

TEST(Beamspace, RoundTripRandomRealizations) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto cfg = xt::random_small_config(rng, 8, 3, 8, 4);
    auto ch = realize_channel(cfg, rng);
    const CMat H1 = beamspace_to_channel(ch.Z);
    EXPECT_LT((ch.H - H1).norm() / ch.H.norm(), 1e-8);
    const CMat H2 = beamspace_to_channel(ch.Z.dense(), build_f1(cfg.M, cfg.N, cfg.L_p), build_f2(cfg.M, cfg.N, cfg.L_p));
    EXPECT_LT((ch.H - H2).norm() / ch.H.norm(), 1e-8);
    const auto Z = channel_to_beamspace(ch.H, cfg.M, cfg.N, cfg.L_p);
    EXPECT_LT((Z.vec() - ch.Z.vec()).norm() / ch.Z.vec().norm(), 1e-8);
  }
}

TEST(Beamspace, OnGridAnglesAreOneSparsePerPath) {
  const int M = 8, N = 4;
  std::vector<PathParams> paths;
  const int bins[3][2] = {{1, 3}, {-2, 0}, {4, -1}};
  for (auto& b : bins) {
    PathParams p = make_path({0.7, 0.2}, 0.0, 0.0);
    p.theta_rx = double(b[0]) / M;
    p.theta_tx = double(b[1]) / N;
    paths.push_back(p);
  }
  const auto Z = channel_to_beamspace(paths, M, N);
  const double peak = Z.vec().cwiseAbs().maxCoeff();
  for (int l = 0; l < 3; ++l) {
    int dominant = 0;
    for (Index i = 0; i < Z.blocks[l].size(); ++i) dominant += std::abs(Z.blocks[l](i)) > 1e-6 * peak ? 1 : 0;
    EXPECT_EQ(dominant, 1) << "path " << l;
  }
  // Dense form: every block pair holds at most L_p dominant entries.
  const CMat D = Z.dense();
  int dominant = 0;
  for (Index i = 0; i < D.rows(); ++i)
    for (Index j = 0; j < D.cols(); ++j) dominant += std::abs(D(i, j)) > 1e-6 * peak ? 1 : 0;
  EXPECT_LE(dominant, 3 * M * N);
}

TEST(Beamspace, DenseShape) {
  auto Z = Beamspace::zeros(3, 2, 2);
  const CMat D = Z.dense();
  EXPECT_EQ(D.rows(), 3 * 3 * 2 * 2);
  EXPECT_EQ(D.cols(), 3 * 2 * 2 * 2);
  EXPECT_EQ(build_f1(3, 2, 2).cols(), D.rows());
  EXPECT_EQ(build_f2(3, 2, 2).rows(), D.cols());
}

TEST(Beamspace, HeatmapHasHeaderAndAllEntries) {
  auto Z = Beamspace::zeros(2, 2, 1);
  std::ostringstream os;
  write_beamspace_heatmap(os, Z, false);
  std::string s = os.str();
  EXPECT_EQ(s.rfind("row,col,magnitude\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}
