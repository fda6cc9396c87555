// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/types.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace xlmimo::estimation {

enum class NmseMode {
  kPaper,  // sum over rows of ||h_m - h^_m|| / ||h_m||
  kMean,   // the same sum divided by the number of rows counted
};

struct NmseValue {
  double sum = 0.0;     // sum of per-row norm ratios
  Index rows = 0;       // rows that entered the sum
  Index excluded = 0;   // rows skipped because ||h_m|| = 0

  double mean() const { return rows == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / double(rows); }
  double value(NmseMode mode) const { return mode == NmseMode::kPaper ? sum : mean(); }
};

/// Per-row norm ratios over the diagonal blocks of two M x (M * width)
/// block-diagonal channels.
inline NmseValue nmse_terms(const CMat& truth, const CMat& est, Warnings* w = nullptr) {
  require_shape(truth.rows() == est.rows() && truth.cols() == est.cols(), "nmse: shapes differ");
  const Index M = truth.rows();
  require_shape(M > 0 && truth.cols() % M == 0, "nmse: columns must be a multiple of rows");
  const Index width = truth.cols() / M;
  NmseValue v;
  for (Index m = 0; m < M; ++m) {
    auto h = truth.row(m).segment(m * width, width);
    double hn = h.norm();
    if (hn == 0.0) {
      ++v.excluded;
      continue;
    }
    v.sum += (h - est.row(m).segment(m * width, width)).norm() / hn;
    ++v.rows;
  }
  if (v.excluded > 0) warn(w, "nmse: " + std::to_string(v.excluded) + " zero-norm row(s) excluded");
  return v;
}

inline double nmse(const CMat& truth, const CMat& est, NmseMode mode = NmseMode::kMean,
                   Warnings* w = nullptr) {
  return nmse_terms(truth, est, w).value(mode);
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace xlmimo::estimation
