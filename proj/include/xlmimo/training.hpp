// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/config.hpp"
#include "xlmimo/types.hpp"

#include <cmath>
#include <random>
#include <string>

namespace xlmimo {

/// Training symbols qbar_n(t) for slots t = 1..T, preceded by a K-sample
/// silent prefix so that lookups back to t - K resolve to zero.
class TrainingSet {
 public:
  TrainingSet() = default;
  TrainingSet(CMat symbols, int K) : K_(K), T_(int(symbols.cols())) {
    qbar_ = CMat::Zero(symbols.rows(), symbols.cols() + K);
    qbar_.rightCols(symbols.cols()) = symbols;
  }

  int N() const { return int(qbar_.rows()); }
  int T() const { return T_; }
  int K() const { return K_; }

  /// N x (T + K); column c holds time t = c - K + 1.
  const CMat& qbar() const { return qbar_; }
  /// N x T slice of the transmitted slots.
  auto symbols() const { return qbar_.rightCols(T_); }

  /// qbar_n(t) with 1-based t; non-positive t reads the silent prefix.
  cd q(Index n, long t) const {
    if (t > T_) throw std::out_of_range("TrainingSet::q: t beyond T");
    if (t <= 0) return {0.0, 0.0};
    return qbar_(n, Index(t) - 1 + K_);
  }

 private:
  CMat qbar_;
  int K_ = 0;
  int T_ = 0;
};

/// Unit-variance circularly-symmetric complex Gaussian symbols.
inline TrainingSet gen_training(const SystemConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMat s(cfg.N, cfg.T);
  for (Index t = 0; t < cfg.T; ++t)
    for (Index n = 0; n < cfg.N; ++n) {
      double re = g(rng), im = g(rng);
      s(n, t) = cd(re, im);
    }
  return TrainingSet(std::move(s), cfg.K);
}

/// [qbar_n(t - i), qbar_n(t - i - 1), ..., qbar_n(t - i - K + 1)]^T.
/// Slots are 1-based; tap i = 0 is the collapsed tap used by the pilot matrix.
inline CVec build_qvec(const TrainingSet& ts, Index n, long t, long i, int L_t) {
  if (n < 0 || n >= ts.N()) throw std::out_of_range("build_qvec: n out of range");
  if (t < 1 || t > ts.T()) throw std::out_of_range("build_qvec: t out of range");
  if (i < 0 || i > L_t) throw std::out_of_range("build_qvec: tap out of range");
  CVec v(ts.K());
  for (Index k = 0; k < ts.K(); ++k) v(k) = ts.q(n, t - i - long(k));
  return v;
}

}  // namespace xlmimo
