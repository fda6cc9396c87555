// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace xlmimo;
using namespace xlmimo::solvers;

TEST(Lasso, IdentityRealMatchesSoftThreshold) {
  RVec b(6);
  b << 3.0, -0.5, 0.2, -2.0, 1.0, 0.0;
  LassoProblem<double> p;
  p.A = LinearOperator<double>::from_matrix(CMat::Identity(6, 6));
  p.b = b.cast<cd>();
  p.lambda = 0.6;
  p.tol = 1e-12;
  auto rep = lasso(p);
  ASSERT_TRUE(rep.converged);
  for (Index i = 0; i < 6; ++i) EXPECT_NEAR(rep.x(i), soft_threshold(b(i), 0.6), 1e-10);
}

TEST(Lasso, IdentityComplexMatchesSoftThreshold) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  CVec b(10);
  for (auto& v : b) v = cd(g(rng), g(rng));
  LassoProblem<cd> p;
  p.A = LinearOperator<cd>::from_matrix(CMat::Identity(10, 10));
  p.b = b;
  p.lambda = 0.8;
  p.tol = 1e-12;
  auto rep = lasso(p);
  ASSERT_TRUE(rep.converged);
  for (Index i = 0; i < 10; ++i) EXPECT_LT(std::abs(rep.x(i) - soft_threshold(b(i), 0.8)), 1e-10);
}

TEST(Lasso, BoxClampsToUnitInterval) {
  RVec b(3);
  b << 5.0, -1.0, 0.5;
  LassoProblem<double> p;
  p.A = LinearOperator<double>::from_matrix(CMat::Identity(3, 3));
  p.b = b.cast<cd>();
  p.lambda = 0.1;
  p.box = true;
  auto rep = lasso(p);
  EXPECT_NEAR(rep.x(0), 1.0, 1e-9);
  EXPECT_NEAR(rep.x(1), 0.0, 1e-9);
  EXPECT_NEAR(rep.x(2), 0.4, 1e-8);
}

TEST(Lasso, ObjectiveNonIncreasingAndZeroLambdaIsLeastSquares) {
  std::mt19937_64 rng(8);
  CMat A = CMat::Random(20, 8);
  CVec b = CVec::Random(20);
  LassoProblem<cd> p;
  p.A = LinearOperator<cd>::from_matrix(A);
  p.b = b;
  p.lambda = 0.0;
  p.max_iter = 20000;
  p.tol = 1e-13;
  auto rep = lasso(p);
  for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
    EXPECT_LE(rep.objective_trace[i], rep.objective_trace[i - 1] * (1 + 1e-12));
  const CVec ls = A.colPivHouseholderQr().solve(b);
  EXPECT_LT((rep.x - ls).norm() / ls.norm(), 1e-6);
}

TEST(Lasso, RejectsBadInput) {
  LassoProblem<cd> p;
  p.A = LinearOperator<cd>::from_matrix(CMat::Identity(2, 2));
  p.b = CVec::Zero(2);
  p.lambda = -1.0;
  EXPECT_THROW(lasso(p), std::invalid_argument);
  p.lambda = 0.1;
  p.box = true;
  EXPECT_THROW(lasso(p), std::invalid_argument);
  p.box = false;
  p.b = CVec::Zero(3);
  EXPECT_THROW(lasso(p), std::invalid_argument);
}

TEST(Lasso, ZeroOperatorReturnsZero) {
  LassoProblem<cd> p;
  p.A = LinearOperator<cd>::from_matrix(CMat::Zero(3, 4));
  p.b = CVec::Ones(3);
  p.lambda = 0.1;
  auto rep = lasso(p);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.x.norm(), 0.0);
}

TEST(Omp, RecoversOneSparseOnGrid) {
  const CMat F = dft_matrix(16);
  for (Index j = 0; j < 16; ++j) {
    const CVec b = cd(2.0, -1.0) * F.col(j);
    auto rep = omp(F, b, 1);
    Index arg = 0;
    rep.x.cwiseAbs().maxCoeff(&arg);
    EXPECT_EQ(arg, j);
    EXPECT_LT(std::abs(rep.x(j) - cd(2.0, -1.0)), 1e-12);
    EXPECT_EQ((rep.x.array() != cd(0.0, 0.0)).count(), 1);
  }
}

TEST(Omp, GroupLimitAndEarlyStop) {
  CMat A = CMat::Identity(6, 6);
  CVec b = CVec::Zero(6);
  b(0) = 3.0;
  b(1) = 2.0;
  b(4) = 1.0;
  OmpOptions opt;
  opt.group_size = 3;
  opt.per_group = 1;
  auto rep = omp(A, b, 3, opt);
  EXPECT_NE(rep.x(0), cd(0.0, 0.0));
  EXPECT_EQ(rep.x(1), cd(0.0, 0.0));
  EXPECT_NE(rep.x(4), cd(0.0, 0.0));
  auto zero = omp(A, CVec::Zero(6), 2);
  EXPECT_EQ(zero.x.norm(), 0.0);
  EXPECT_THROW(omp(A, b, 7), std::invalid_argument);
}

TEST(Projection, ThresholdAndOneHot) {
  RVec x(6);
  x << 0.2, 0.7, 0.1, 0.0, 0.0, 0.0;
  EXPECT_EQ(threshold(x, 0.5), (RVec(6) << 0, 1, 0, 0, 0, 0).finished());
  EXPECT_THROW(threshold(x, 1.0), std::invalid_argument);
  auto oh = project_onehot(x, 3, 2);
  EXPECT_EQ(oh.e, (RVec(6) << 0, 1, 0, 1, 0, 0).finished());
  ASSERT_EQ(oh.empty_blocks.size(), 1u);
  EXPECT_EQ(oh.empty_blocks[0], 1);
  Warnings w;
  report_empty_blocks(oh, &w);
  EXPECT_EQ(w.size(), 1u);
  RVec tie(2);
  tie << 0.5, 0.5;
  EXPECT_EQ(project_onehot(tie, 2, 1).e(0), 1.0);
}

TEST(Operator, NormEstimate) {
  CMat A = CMat::Zero(3, 3);
  A.diagonal() << 1.0, 3.0, 2.0;
  EXPECT_NEAR(operator_norm_sq(LinearOperator<cd>::from_matrix(A), 100), 9.0, 1e-6);
}
