// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "xlmimo/types.hpp"

#include <string>
#include <vector>

namespace xlmimo::solvers {

/// 1 where x >= thr, else 0.
inline RVec threshold(const RVec& x, double thr) {
  if (!(thr > 0.0 && thr < 1.0)) throw std::invalid_argument("threshold: thr must lie in (0, 1)");
  return (x.array() >= thr).cast<double>().matrix();
}

struct OneHot {
  RVec e;
  std::vector<Index> empty_blocks;  // blocks with no positive entry; index 0 was chosen
};

/// Within each contiguous block of block_len entries keep only the argmax
/// (lowest index on ties) set to 1.
inline OneHot project_onehot(const RVec& x, Index block_len, Index n_blocks) {
  require_shape(block_len > 0 && x.size() == block_len * n_blocks,
                "project_onehot: length must equal block_len * n_blocks");
  OneHot out{RVec::Zero(x.size()), {}};
  for (Index b = 0; b < n_blocks; ++b) {
    Index best = 0;
    double best_val = x(b * block_len);
    for (Index k = 1; k < block_len; ++k)
      if (x(b * block_len + k) > best_val) {
        best_val = x(b * block_len + k);
        best = k;
      }
    if (!(best_val > 0.0)) out.empty_blocks.push_back(b);
    out.e(b * block_len + best) = 1.0;
  }
  return out;
}

inline void report_empty_blocks(const OneHot& oh, Warnings* w) {
  if (!oh.empty_blocks.empty())
    warn(w, std::to_string(oh.empty_blocks.size()) + " delay block(s) had no positive entry; index 0 selected");
}

}  // namespace xlmimo::solvers
