// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/types.hpp"

#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace xlmimo::estimation {

struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double residual = 0.0;  // ||H - F1 Z F2||_F
  double nmse = std::numeric_limits<double>::quiet_NaN();
};

struct EstimationResult {
  std::string method;  // proposed | idealized | ls | omp
  CMat H_hat;
  RVec e_hat;
  double nmse = std::numeric_limits<double>::quiet_NaN();        // mean mode
  double nmse_sum = std::numeric_limits<double>::quiet_NaN();  // sum mode
  int iters = 0;
  bool converged = true;
  bool diverged = false;
  std::vector<TraceRow> trace;
  Warnings warnings;
};

/// Zero every entry outside the diagonal 1 x width blocks of an M x M*width matrix.
inline CMat block_project(const CMat& H) {
  const Index M = H.rows();
  require_shape(M > 0 && H.cols() % M == 0, "block_project: columns must be a multiple of rows");
  const Index width = H.cols() / M;
  CMat P = CMat::Zero(M, H.cols());
  for (Index m = 0; m < M; ++m) P.row(m).segment(m * width, width) = H.row(m).segment(m * width, width);
  return P;
}

/// Diagonal blocks of H as an M x width matrix.
inline CMat pack_blocks(const CMat& H) {
  const Index M = H.rows();
  require_shape(M > 0 && H.cols() % M == 0, "pack_blocks: columns must be a multiple of rows");
  const Index width = H.cols() / M;
  CMat P(M, width);
  for (Index m = 0; m < M; ++m) P.row(m) = H.row(m).segment(m * width, width);
  return P;
}

inline CMat unpack_blocks(const CMat& P) {
  const Index M = P.rows(), width = P.cols();
  CMat H = CMat::Zero(M, M * width);
  for (Index m = 0; m < M; ++m) H.row(m).segment(m * width, width) = P.row(m);
  return H;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "iteration,objective,primal_residual,nmse\n";
  os.precision(10);
  for (const auto& r : trace) os << r.iter << ',' << r.objective << ',' << r.residual << ',' << r.nmse << '\n';
}

}  // namespace xlmimo::estimation
