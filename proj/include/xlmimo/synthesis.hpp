// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/channel.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/pilot.hpp"
#include "xlmimo/training.hpp"
#include "xlmimo/types.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace xlmimo {

/// Received training block and the noise variance it was generated with.
struct RxBlock {
  CMat Y;                 // M x T
  double sigma_n2 = 0.0;  // linear
  double signal_power = 0.0;
};

/// Per-antenna convolution reference:
///   y_m(t) = sum_n sum_l h_{m,n,l} qbar_n(t - kappa_{m,n,l}).
inline CMat synthesize_rx_direct(const ChannelRealization& ch, const TrainingSet& ts) {
  require_shape(ts.N() == ch.N && ts.K() == ch.K, "synthesize_rx_direct: training/channel mismatch");
  CMat Y = CMat::Zero(ch.M, ts.T());
  for (Index m = 0; m < ch.M; ++m)
    for (long t = 1; t <= ts.T(); ++t) {
      cd acc{0.0, 0.0};
      for (Index n = 0; n < ch.N; ++n)
        for (Index l = 0; l < ch.L_p; ++l) acc += ch.h(m, n, l) * ts.q(n, t - ch.kappa(m, n, l));
      Y(m, t - 1) = acc;
    }
  return Y;
}

/// H Phi E with dense factors.
inline CMat synthesize_rx_matrix(const CMat& H, const CMat& Phi, const CMat& E) {
  if (H.cols() != Phi.rows())
    throw DimensionError("synthesize_rx_matrix: H has " + std::to_string(H.cols()) +
                         " columns but Phi has " + std::to_string(Phi.rows()) + " rows");
  if (Phi.cols() != E.rows())
    throw DimensionError("synthesize_rx_matrix: Phi has " + std::to_string(Phi.cols()) +
                         " columns but E has " + std::to_string(E.rows()) + " rows");
  return H * (Phi * E);
}

/// H Phi (I_T (x) e) using the operator form of Phi.
inline CMat synthesize_rx(const CMat& H, const PilotOperator& phi, const RVec& e) {
  require_shape(H.cols() == phi.rows(), "synthesize_rx: H columns must equal M N L");
  return H * phi.times_selector(e);
}

inline double mean_power(const CMat& Y) {
  return Y.size() == 0 ? 0.0 : Y.squaredNorm() / double(Y.size());
}

/// Adds CN(0, sigma^2) noise with sigma^2 = signal_power / 10^(snr_db/10).
/// snr_db = +inf leaves Y untouched.
inline RxBlock add_awgn(const CMat& Y, double snr_db, double signal_power, std::mt19937_64& rng) {
  RxBlock rx{Y, 0.0, signal_power};
  if (std::isinf(snr_db) && snr_db > 0.0) return rx;
  rx.sigma_n2 = signal_power / std::pow(10.0, snr_db / 10.0);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * rx.sigma_n2));
  for (Index c = 0; c < Y.cols(); ++c)
    for (Index r = 0; r < Y.rows(); ++r) {
      double re = g(rng), im = g(rng);
      rx.Y(r, c) += cd(re, im);
    }
  return rx;
}

/// Row-major complex matrix as "re,im" pairs, one matrix row per line.
inline void write_complex_csv(std::ostream& os, const CMat& A) {
  os << std::setprecision(17);
  for (Index r = 0; r < A.rows(); ++r) {
    for (Index c = 0; c < A.cols(); ++c) {
      if (c > 0) os << ',';
      os << A(r, c).real() << ',' << A(r, c).imag();
    }
    os << '\n';
  }
}

}  // namespace xlmimo
