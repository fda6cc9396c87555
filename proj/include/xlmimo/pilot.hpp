// SPDX-License-Identifier: Apache-2.0
#pragma once

// Kronecker-structured pilot matrix
//   Phi = [I_M (x) Qbar(1), ..., I_M (x) Qbar(T)],
//   Qbar(t) = blkdiag_n(I_L (x) q_n(t)^T),  q_n(t) = [qbar_n(t), ..., qbar_n(t-K+1)]^T,
// held matrix-free. Row b = (m, n, l) of slice t touches only columns
// [b K, (b+1) K) of that slice, so every product is O(M N L K T).

#include "xlmimo/config.hpp"
#include "xlmimo/training.hpp"
#include "xlmimo/types.hpp"

#include <string>

namespace xlmimo {

class PilotOperator {
 public:
  PilotOperator(const TrainingSet& ts, int M, int L) : ts_(&ts), M_(M), N_(ts.N()), L_(L), K_(ts.K()), T_(ts.T()) {}
  PilotOperator(const TrainingSet& ts, const SystemConfig& cfg) : PilotOperator(ts, cfg.M, cfg.L_p) {
    require_shape(ts.N() == cfg.N && ts.K() == cfg.K && ts.T() == cfg.T,
                  "PilotOperator: training set does not match config");
  }

  int M() const { return M_; }
  int N() const { return N_; }
  int L() const { return L_; }
  int K() const { return K_; }
  int T() const { return T_; }
  Index rows() const { return Index(M_) * N_ * L_; }
  Index slice_cols() const { return rows() * K_; }
  Index cols() const { return slice_cols() * T_; }
  const TrainingSet& training() const { return *ts_; }

  /// Transmit antenna of row block b.
  Index tx_of(Index b) const { return (b / L_) % N_; }

  /// Phi x for x of length M N L K T.
  CVec apply(const CVec& x) const {
    require_shape(x.size() == cols(), "PilotOperator::apply: length mismatch");
    CVec out = CVec::Zero(rows());
    for (Index t = 0; t < T_; ++t)
      for (Index b = 0; b < rows(); ++b) {
        const Index n = tx_of(b), base = t * slice_cols() + b * K_;
        cd acc{0.0, 0.0};
        for (Index k = 0; k < K_; ++k) acc += ts_->q(n, long(t + 1 - k)) * x(base + k);
        out(b) += acc;
      }
    return out;
  }

  /// Phi^H v for v of length M N L.
  CVec adjoint(const CVec& v) const {
    require_shape(v.size() == rows(), "PilotOperator::adjoint: length mismatch");
    CVec out(cols());
    for (Index t = 0; t < T_; ++t)
      for (Index b = 0; b < rows(); ++b) {
        const Index n = tx_of(b), base = t * slice_cols() + b * K_;
        for (Index k = 0; k < K_; ++k) out(base + k) = std::conj(ts_->q(n, long(t + 1 - k))) * v(b);
      }
    return out;
  }

  /// Phi (I_T (x) e), an M N L x T matrix: entry (b, t) = sum_k qbar_n(t-k) e_{b,k}.
  template <class Derived>
  CMat times_selector(const Eigen::MatrixBase<Derived>& e) const {
    require_shape(e.size() == slice_cols(), "PilotOperator::times_selector: e length must be MNLK");
    CMat A = CMat::Zero(rows(), T_);
    for (Index b = 0; b < rows(); ++b) {
      const Index n = tx_of(b);
      for (Index k = 0; k < K_; ++k) {
        const cd w = cd(e(b * K_ + k));
        if (w == cd(0.0, 0.0)) continue;
        for (Index t = 0; t < T_; ++t) A(b, t) += w * ts_->q(n, long(t + 1 - k));
      }
    }
    return A;
  }

  /// Dense Phi. Refuses when the entry count exceeds cap.
  CMat dense(double cap = 16777216.0) const {
    if (double(rows()) * double(cols()) > cap)
      throw std::length_error("PilotOperator::dense: " + std::to_string(rows()) + " x " +
                              std::to_string(cols()) + " exceeds the materialisation cap; use the operator form");
    CMat P = CMat::Zero(rows(), cols());
    for (Index t = 0; t < T_; ++t)
      for (Index b = 0; b < rows(); ++b) {
        const Index n = tx_of(b), base = t * slice_cols() + b * K_;
        for (Index k = 0; k < K_; ++k) P(b, base + k) = ts_->q(n, long(t + 1 - k));
      }
    return P;
  }

 private:
  const TrainingSet* ts_;
  int M_, N_, L_, K_, T_;
};

/// Dense pilot matrix subject to cfg.phi_cap.
inline CMat build_phi(const TrainingSet& ts, const SystemConfig& cfg) {
  return PilotOperator(ts, cfg).dense(cfg.phi_cap);
}

/// E = I_T (x) e as a dense M N L K T x T matrix.
template <class Derived>
CMat lift_selector(const Eigen::MatrixBase<Derived>& e, int T) {
  const Index len = e.size();
  CMat E = CMat::Zero(len * T, T);
  for (Index t = 0; t < T; ++t)
    for (Index i = 0; i < len; ++i) E(t * len + i, t) = cd(e(i));
  return E;
}

}  // namespace xlmimo
