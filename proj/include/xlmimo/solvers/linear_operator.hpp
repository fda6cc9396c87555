// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/types.hpp"

#include <functional>
#include <memory>
#include <random>
#include <type_traits>

namespace xlmimo::solvers {

template <class S>
inline constexpr bool is_complex_v = !std::is_floating_point_v<S>;

/// Matrix-free linear map from S^cols to C^rows. For a real domain the
/// adjoint is Re(A^H r), the adjoint under the real inner product.
template <class S>
struct LinearOperator {
  using Domain = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Index rows = 0;
  Index cols = 0;
  std::function<CVec(const Domain&)> apply;
  std::function<Domain(const CVec&)> adjoint;

  static LinearOperator from_matrix(CMat A) {
    LinearOperator op;
    op.rows = A.rows();
    op.cols = A.cols();
    auto shared = std::make_shared<const CMat>(std::move(A));
    op.apply = [shared](const Domain& x) -> CVec { return (*shared) * x.template cast<cd>(); };
    op.adjoint = [shared](const CVec& r) -> Domain {
      if constexpr (is_complex_v<S>) return shared->adjoint() * r;
      else return (shared->adjoint() * r).real();
    };
    return op;
  }
};

/// Largest eigenvalue of A^H A by power iteration from a fixed start vector.
template <class S>
double operator_norm_sq(const LinearOperator<S>& A, int iterations = 20) {
  using Domain = typename LinearOperator<S>::Domain;
  if (A.cols == 0 || A.rows == 0) return 0.0;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g(0.0, 1.0);
  Domain v(A.cols);
  for (Index i = 0; i < A.cols; ++i) {
    if constexpr (is_complex_v<S>) v(i) = S(g(rng), g(rng));
    else v(i) = g(rng);
  }
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Domain w = A.adjoint(A.apply(v));
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

}  // namespace xlmimo::solvers
