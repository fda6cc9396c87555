// SPDX-License-Identifier: Apache-2.0
#pragma once

// Combinatorial refinement of the delay selector on the unrelaxed misfit
//   sum_m || y_m - sum_l g_{m,l} sum_n h_{m,n,l} qbar_n(. - k_{m,n,l}) ||^2
// with one free complex gain per (antenna, path), so the result does not
// depend on the scale or phase of the channel estimate.

#include "xlmimo/pilot.hpp"
#include "xlmimo/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <vector>

namespace xlmimo::estimation {

namespace detail {

/// Shifted training rows: S_n(k, t) = qbar_n(t + 1 - k), t = 0..T-1.
inline std::vector<CMat> shifted_training(const PilotOperator& phi) {
  const auto& ts = phi.training();
  std::vector<CMat> S(std::size_t(phi.N()), CMat(phi.K(), phi.T()));
  for (Index n = 0; n < phi.N(); ++n)
    for (Index k = 0; k < phi.K(); ++k)
      for (Index t = 0; t < phi.T(); ++t) S[std::size_t(n)](k, t) = ts.q(n, long(t + 1 - k));
  return S;
}

inline cd fit_gain(const CVec& v, const CVec& base) {
  const double vv = v.squaredNorm();
  return vv > 0.0 ? v.dot(base) / vv : cd(0.0, 0.0);
}

/// Search state shared by the array-wide and the per-antenna stages.
struct DelayModel {
  const CMat& packed;  // M x NL channel blocks
  const std::vector<CMat>& S;
  const CMat& Y;
  Index M, N, L, K;

  DelayModel(const CMat& p, const std::vector<CMat>& s, const CMat& y, Index l)
      : packed(p), S(s), Y(y), M(y.rows()), N(Index(s.size())), L(l), K(s.front().rows()) {}

  CVec atom(Index m, Index c, Index k) const { return packed(m, c) * S[std::size_t(c / L)].row(k).transpose(); }

  /// Contribution of path l at antenna m for delays kap (length NL of row m).
  CVec path_signal(Index m, Index l, const Index* kap) const {
    CVec v = CVec::Zero(Y.cols());
    for (Index n = 0; n < N; ++n)
      if (packed(m, n * L + l) != cd(0.0, 0.0)) v += atom(m, n * L + l, kap[n * L + l]);
    return v;
  }

  bool row_path_active(Index m, Index l) const {
    for (Index n = 0; n < N; ++n)
      if (packed(m, n * L + l) != cd(0.0, 0.0)) return true;
    return false;
  }
  bool path_active(Index l) const {
    for (Index m = 0; m < M; ++m)
      if (row_path_active(m, l)) return true;
    return false;
  }
};

/// Full search state: delays kap (MNL), gains g (M x L), residual R (M x T).
struct DelayState {
  std::vector<Index> kap;
  CMat g;
  CMat R;
  double misfit() const { return R.squaredNorm(); }
};

inline DelayState state_from(const DelayModel& dm, std::vector<Index> kap) {
  DelayState st{std::move(kap), CMat::Zero(dm.M, dm.L), dm.Y};
  const Index width = dm.N * dm.L;
  for (Index m = 0; m < dm.M; ++m)
    for (Index l = 0; l < dm.L; ++l) {
      if (!dm.row_path_active(m, l)) continue;
      const CVec v = dm.path_signal(m, l, st.kap.data() + m * width);
      CVec r = st.R.row(m).transpose();
      st.g(m, l) = fit_gain(v, r);
      st.R.row(m) -= (st.g(m, l) * v).transpose();
    }
  return st;
}

/// Delay patterns k_{m,n} = round(u + beta m - gamma n), clamped to [0, K-1],
/// over a grid of offsets u and slopes |beta|, |gamma| <= slope_max.
inline std::vector<std::vector<Index>> planar_patterns(Index M, Index N, Index K, double slope_max) {
  std::set<std::vector<Index>> uniq;
  const int n_slope = slope_max > 0.0 ? 9 : 1;
  std::vector<Index> pat(std::size_t(M * N));
  for (int ib = 0; ib < n_slope; ++ib)
    for (int ig = 0; ig < n_slope; ++ig) {
      const double beta = n_slope == 1 ? 0.0 : slope_max * (2.0 * ib / (n_slope - 1) - 1.0);
      const double gamma = n_slope == 1 ? 0.0 : slope_max * (2.0 * ig / (n_slope - 1) - 1.0);
      for (double u = -0.5; u <= double(K) - 0.5; u += 1.0 / 16.0) {
        for (Index m = 0; m < M; ++m)
          for (Index n = 0; n < N; ++n) {
            double x = std::nearbyint(u + beta * double(m) - gamma * double(n));
            pat[std::size_t(m * N + n)] = Index(std::clamp(x, 0.0, double(K - 1)));
          }
        uniq.insert(pat);
      }
    }
  return {uniq.begin(), uniq.end()};
}

/// Scores planar patterns for one path against a residual: per antenna the
/// misfit after the best complex gain, ||b||^2 - |v^H b|^2 / ||v||^2, from
/// correlations c_{n,k} = s_{n,k}^H b and the Gram matrix of the shifted
/// training rows.
struct PlanarScorer {
  const DelayModel& dm;
  CMat G;  // (n, k) x (n', k'): s_{n,k}^H s_{n',k'}

  explicit PlanarScorer(const DelayModel& d) : dm(d) {
    const Index NK = d.N * d.K;
    CMat all(NK, d.Y.cols());
    for (Index n = 0; n < d.N; ++n) all.middleRows(n * d.K, d.K) = d.S[std::size_t(n)];
    G = all.conjugate() * all.transpose();
  }

  /// Index of the best pattern and its total misfit; -1 if none beats bound.
  std::pair<Index, double> best(const std::vector<std::vector<Index>>& pats, const CMat& base, Index l,
                                double bound) const {
    const Index M = dm.M, N = dm.N, K = dm.K, L = dm.L;
    std::vector<CMat> corr(static_cast<std::size_t>(M));
    RVec bb(M);
    CMat h(M, N);
    for (Index m = 0; m < M; ++m) {
      corr[std::size_t(m)] = CMat(K, N);
      for (Index n = 0; n < N; ++n) {
        corr[std::size_t(m)].col(n) = dm.S[std::size_t(n)].conjugate() * base.row(m).transpose();
        h(m, n) = dm.packed(m, n * L + l);
      }
      bb(m) = base.row(m).squaredNorm();
    }
    Index best_i = -1;
    double best_val = bound;
    std::vector<Index> idx(static_cast<std::size_t>(N));
    for (std::size_t i = 0; i < pats.size(); ++i) {
      const auto& p = pats[i];
      double val = 0.0;
      for (Index m = 0; m < M && val < best_val; ++m) {
        cd vb{0.0, 0.0};
        for (Index n = 0; n < N; ++n) {
          const Index k = p[std::size_t(m * N + n)];
          idx[std::size_t(n)] = n * K + k;
          vb += std::conj(h(m, n)) * corr[std::size_t(m)](k, n);
        }
        double vv = 0.0;
        for (Index n = 0; n < N; ++n) {
          if (h(m, n) == cd(0.0, 0.0)) continue;
          cd acc{0.0, 0.0};
          for (Index n2 = 0; n2 < N; ++n2) acc += G(idx[std::size_t(n)], idx[std::size_t(n2)]) * h(m, n2);
          vv += (std::conj(h(m, n)) * acc).real();
        }
        val += vv > 0.0 ? bb(m) - std::norm(vb) / vv : bb(m);
      }
      if (val < best_val) {
        best_val = val;
        best_i = Index(i);
      }
    }
    return {best_i, best_val};
  }
};

/// Sets path l to pattern p and refits its gains against `base`.
inline void apply_pattern(const DelayModel& dm, const std::vector<Index>& p, Index l, const CMat& base,
                          DelayState& st) {
  const Index width = dm.N * dm.L;
  for (Index m = 0; m < dm.M; ++m)
    for (Index n = 0; n < dm.N; ++n) st.kap[std::size_t(m * width + n * dm.L + l)] = p[std::size_t(m * dm.N + n)];
  st.R = base;
  for (Index m = 0; m < dm.M; ++m) {
    st.g(m, l) = 0.0;
    if (!dm.row_path_active(m, l)) continue;
    const CVec v = dm.path_signal(m, l, st.kap.data() + m * width);
    st.g(m, l) = fit_gain(v, base.row(m).transpose());
    st.R.row(m) -= (st.g(m, l) * v).transpose();
  }
}

/// Coordinate descent over paths, each move resetting one path to the best
/// planar pattern across the whole array.
inline void planar_descent(const DelayModel& dm, const PlanarScorer& sc, const std::vector<std::vector<Index>>& pats,
                           DelayState& st, int max_sweeps) {
  const Index width = dm.N * dm.L;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (Index l = 0; l < dm.L; ++l) {
      if (!dm.path_active(l)) continue;
      CMat base = st.R;
      for (Index m = 0; m < dm.M; ++m)
        if (dm.row_path_active(m, l))
          base.row(m) += (st.g(m, l) * dm.path_signal(m, l, st.kap.data() + m * width)).transpose();
      auto [i, val] = sc.best(pats, base, l, st.misfit() * (1.0 - 1e-12));
      if (i >= 0) {
        apply_pattern(dm, pats[std::size_t(i)], l, base, st);
        changed = true;
      }
    }
    if (!changed) break;
  }
}

/// Per-antenna moves: a path's delays over the TX index reset to a step
/// profile k + [n >= s] or k + [n < s], with the row gain refitted. This
/// covers planar patterns that fall between the grid points.
inline void row_descent(const DelayModel& dm, Index m, DelayState& st, int max_sweeps) {
  const Index N = dm.N, L = dm.L, K = dm.K, width = N * L;
  Index* kap = st.kap.data() + m * width;
  CVec r = st.R.row(m).transpose();
  std::vector<Index> trial(static_cast<std::size_t>(N)), best;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (Index l = 0; l < L; ++l) {
      if (!dm.row_path_active(m, l)) continue;
      const CVec base = r + st.g(m, l) * dm.path_signal(m, l, kap);
      double best_val = r.squaredNorm() * (1.0 - 1e-12);
      cd best_g{0.0, 0.0};
      best.clear();
      for (Index k = 0; k < K; ++k)
        for (Index s = 0; s <= N; ++s)
          for (int dir = 0; dir < 2; ++dir) {
            if (k + 1 >= K && s < N) continue;
            if (dir == 1 && (s == 0 || s == N)) continue;
            CVec v = CVec::Zero(base.size());
            for (Index n = 0; n < N; ++n) {
              const bool up = dir == 0 ? n >= s : n < s;
              trial[std::size_t(n)] = k + (up ? 1 : 0);
              if (dm.packed(m, n * L + l) != cd(0.0, 0.0)) v += dm.atom(m, n * L + l, trial[std::size_t(n)]);
            }
            const cd g = fit_gain(v, base);
            const double val = (base - g * v).squaredNorm();
            if (val < best_val) {
              best_val = val;
              best_g = g;
              best = trial;
            }
          }
      if (!best.empty()) {
        for (Index n = 0; n < N; ++n) kap[n * L + l] = best[std::size_t(n)];
        st.g(m, l) = best_g;
        r = base - best_g * dm.path_signal(m, l, kap);
        changed = true;
      }
    }
    if (!changed) break;
  }
  st.R.row(m) = r.transpose();
}

inline std::vector<Index> argmax_blocks(const RVec& e, Index K) {
  std::vector<Index> kap(std::size_t(e.size() / K), 0);
  for (std::size_t b = 0; b < kap.size(); ++b) e.segment(Index(b) * K, K).maxCoeff(&kap[b]);
  return kap;
}

inline void write_blocks(const std::vector<Index>& kap, Index K, RVec& e) {
  e.setZero();
  for (std::size_t b = 0; b < kap.size(); ++b) e(Index(b) * K + kap[b]) = 1.0;
}

}  // namespace detail

/// Refines a one-hot e on the unrelaxed misfit. Array-wide stage: each path
/// in turn takes the planar pattern k_{m,n} = round(u + beta m - gamma n)
/// (|beta|, |gamma| <= slope_max samples per element, the aperture delay
/// slope) that fits best; it runs from the given e and from a greedy start
/// placing paths strongest first, keeping the better. Per-antenna stage:
/// step-profile and single-block moves. Every accepted move lowers the misfit.
inline void polish_delays(const CMat& packed, const std::vector<CMat>& S, const CMat& Y, Index L, RVec& e,
                          int max_sweeps, double slope_max) {
  detail::DelayModel dm(packed, S, Y, L);
  const Index K = dm.K;
  const auto pats = detail::planar_patterns(dm.M, dm.N, K, slope_max);
  const detail::PlanarScorer sc(dm);

  auto st_a = detail::state_from(dm, detail::argmax_blocks(e, K));
  detail::planar_descent(dm, sc, pats, st_a, max_sweeps);

  std::vector<Index> order;
  std::vector<double> power(std::size_t(L), 0.0);
  for (Index l = 0; l < L; ++l) {
    if (!dm.path_active(l)) continue;
    order.push_back(l);
    for (Index m = 0; m < dm.M; ++m)
      for (Index n = 0; n < dm.N; ++n) power[std::size_t(l)] += std::norm(packed(m, n * L + l));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return power[std::size_t(a)] > power[std::size_t(b)]; });
  detail::DelayState st_b{st_a.kap, CMat::Zero(dm.M, L), Y};
  for (Index l : order) {
    auto [i, val] = sc.best(pats, st_b.R, l, std::numeric_limits<double>::infinity());
    if (i >= 0) detail::apply_pattern(dm, pats[std::size_t(i)], l, CMat(st_b.R), st_b);
  }
  detail::planar_descent(dm, sc, pats, st_b, max_sweeps);

  auto& st = st_b.misfit() < st_a.misfit() ? st_b : st_a;
  for (Index m = 0; m < dm.M; ++m) detail::row_descent(dm, m, st, max_sweeps);
  detail::write_blocks(st.kap, K, e);
}

/// Assigns delays when some paths have all-zero channel columns. Paths are
/// indexed in arrival order (LoS first), so the search runs over common
/// delays k_0 < k_1 < ... spaced at least min_gap apart, for all paths at
/// once. Each tuple is scored by an alternating least-squares fit: known paths
/// with a free gain per antenna, the others with a rank-one M x N gain
/// matrix. A known path keeps its refined pattern when its most common delay
/// wins; otherwise it is moved to the common delay.
inline void seed_unsupported_paths(const CMat& packed, const std::vector<CMat>& S, const CMat& Y, Index L, RVec& e,
                                   Index min_gap = 1, Warnings* w = nullptr) {
  const Index M = Y.rows(), T = Y.cols(), N = Index(S.size()), K = S.front().rows(), width = N * L;
  std::vector<char> known(std::size_t(L), 0);
  Index n_missing = 0;
  for (Index l = 0; l < L; ++l) {
    double energy = 0.0;
    for (Index n = 0; n < N; ++n) energy += packed.col(n * L + l).squaredNorm();
    known[std::size_t(l)] = energy > 0.0 ? 1 : 0;
    n_missing += known[std::size_t(l)] ? 0 : 1;
  }
  if (n_missing == 0) return;
  if (n_missing == L) {
    warn(w, "delay step: channel estimate is zero; delays cannot be seeded");
    return;
  }
  min_gap = std::max<Index>(min_gap, 1);
  if (K < 1 + (L - 1) * min_gap) min_gap = 1;
  if (K < L) {
    warn(w, "delay step: fewer delay taps than paths; seeding skipped");
    return;
  }

  // Current delays of each known path and their most common value.
  const auto kap = detail::argmax_blocks(e, K);
  std::vector<Index> mode(std::size_t(L), 0);
  for (Index l = 0; l < L; ++l) {
    if (!known[std::size_t(l)]) continue;
    std::vector<Index> count(std::size_t(K), 0);
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n) ++count[std::size_t(kap[std::size_t(m * width + n * L + l)])];
    mode[std::size_t(l)] = Index(std::max_element(count.begin(), count.end()) - count.begin());
  }

  // x_m^{(l)} = sum_n h_{m,n,l} s_{n,k}: known path l at its current pattern
  // when k is its mode, else at the common delay k.
  auto known_signal = [&](Index m, Index l, Index k) {
    CVec x = CVec::Zero(T);
    for (Index n = 0; n < N; ++n) {
      const Index kk = k == mode[std::size_t(l)] ? kap[std::size_t(m * width + n * L + l)] : k;
      x += packed(m, n * L + l) * S[std::size_t(n)].row(kk).transpose();
    }
    return x;
  };
  // Alternating fit for one delay tuple: known paths with a free gain per
  // antenna, missing paths with a rank-one M x N gain matrix. Returns the
  // residual energy.
  auto misfit = [&](const std::vector<Index>& ks) {
    std::vector<CMat> basis(static_cast<std::size_t>(M));
    for (Index m = 0; m < M; ++m) {
      CMat B(T, L - n_missing);
      Index c = 0;
      for (Index l = 0; l < L; ++l)
        if (known[std::size_t(l)]) B.col(c++) = known_signal(m, l, ks[std::size_t(l)]);
      basis[std::size_t(m)] = std::move(B);
    }
    std::vector<Index> miss;
    for (Index l = 0; l < L; ++l)
      if (!known[std::size_t(l)]) miss.push_back(l);
    std::vector<CMat> contrib(miss.size(), CMat::Zero(M, T));
    CMat known_fit = CMat::Zero(M, T);
    for (int round = 0; round < 3; ++round) {
      CMat rest = Y;
      for (const auto& c : contrib) rest -= c;
      for (Index m = 0; m < M; ++m) {
        const CMat& B = basis[std::size_t(m)];
        const CVec y = rest.row(m).transpose();
        known_fit.row(m) = (B * B.completeOrthogonalDecomposition().solve(y)).transpose();
      }
      for (std::size_t i = 0; i < miss.size(); ++i) {
        CMat R = Y - known_fit;
        for (std::size_t j = 0; j < miss.size(); ++j)
          if (j != i) R -= contrib[j];
        const Index k = ks[std::size_t(miss[i])];
        CMat X(N, T);
        for (Index n = 0; n < N; ++n) X.row(n) = S[std::size_t(n)].row(k);
        const CMat G = X * X.adjoint();
        const CMat Hls = G.completeOrthogonalDecomposition().solve(X * R.adjoint()).adjoint();
        Eigen::JacobiSVD<CMat> svd(Hls, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const CMat H1 = svd.singularValues()(0) * svd.matrixU().col(0) * svd.matrixV().col(0).adjoint();
        contrib[i] = H1 * X;
      }
    }
    CMat R = Y - known_fit;
    for (const auto& c : contrib) R -= c;
    return R.squaredNorm();
  };

  std::vector<Index> cur(static_cast<std::size_t>(L)), best;
  double best_score = std::numeric_limits<double>::infinity();
  std::function<void(Index, Index)> visit = [&](Index l, Index lo) {
    if (l == L) {
      const double v = misfit(cur);
      if (v < best_score) {
        best_score = v;
        best = cur;
      }
      return;
    }
    for (Index k = lo; k <= K - 1 - (L - 1 - l) * min_gap; ++k) {
      cur[std::size_t(l)] = k;
      visit(l + 1, k + min_gap);
    }
  };
  visit(0, 0);

  for (Index l = 0; l < L; ++l) {
    const Index k = best[std::size_t(l)];
    if (known[std::size_t(l)] && mode[std::size_t(l)] == k) continue;
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n) {
        const Index b = m * width + n * L + l;
        e.segment(b * K, K).setZero();
        e(b * K + k) = 1.0;
      }
  }
}

}  // namespace xlmimo::estimation
