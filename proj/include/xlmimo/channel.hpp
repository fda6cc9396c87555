// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dual-wideband THz channel: per-path gains scaled by pathloss and molecular
// absorption, ULA steering phases, and per-antenna-pair delays that combine
// the gross path delay with the aperture (beam-squint) delay.
//
// Antenna and path indices are 0-based throughout: m in [0, M), n in [0, N),
// l in [0, L_p). Block (m, n, l) sits at position (m * N + n) * L_p + l of
// the effective channel row space and of the delay selector e.

#include "xlmimo/beamspace.hpp"
#include "xlmimo/config.hpp"
#include "xlmimo/geometry.hpp"
#include "xlmimo/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace xlmimo {

inline Index block_index(Index m, Index n, Index l, const SystemConfig& cfg) {
  return (m * cfg.N + n) * cfg.L_p + l;
}

/// Loss factor exp(-kappa/2) applied to the gain variance.
inline double molecular_absorption(double /*f_c*/, double kappa_abs) {
  if (kappa_abs < 0.0) throw ConfigError("kappa_abs must be non-negative");
  return std::exp(-0.5 * kappa_abs);
}

/// Gain variance sqrt(N M / L_p) * d^-xi_l * exp(-kappa/2), with xi_0 = 2 (LoS)
/// and 3 otherwise unless cfg.xi overrides.
inline double path_gain_variance(const SystemConfig& cfg, int l) {
  if (l < 0 || l >= cfg.L_p) throw ConfigError("path index out of range");
  if (cfg.d_tx_rx <= 0.0) throw ConfigError("d_tx_rx must be positive");
  double xi = (std::size_t(l) < cfg.xi.size()) ? cfg.xi[std::size_t(l)] : (l == 0 ? 2.0 : 3.0);
  return std::sqrt(double(cfg.N) * cfg.M / cfg.L_p) * std::pow(cfg.d_tx_rx, -xi) *
         molecular_absorption(cfg.f_c, cfg.kappa_abs);
}

inline double path_gain_std(const SystemConfig& cfg, int l) {
  return std::sqrt(path_gain_variance(cfg, l));
}

struct AliasingBudget {
  long bound = 0;
  bool ok = true;
};

/// M + N <= ceil(2 f_c T_s + 2). Violation is reported, not rejected.
inline AliasingBudget aliasing_budget(const SystemConfig& cfg, Warnings* w = nullptr) {
  double x = 2.0 * cfg.f_c * cfg.T_s() + 2.0;
  AliasingBudget b;
  b.bound = long(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
  b.ok = long(cfg.M) + cfg.N <= b.bound;
  if (!b.ok)
    warn(w, "aliasing budget exceeded: M+N=" + std::to_string(cfg.M + cfg.N) +
                " > " + std::to_string(b.bound) + "; aperture delays span more than one sample");
  return b;
}

struct DelayIndex {
  int index = 0;
  bool clamped = false;
};

/// Nearest-sample delay index, clamped to the K-long selector block [0, K-1].
inline DelayIndex delay_index(double tau_total, const SystemConfig& cfg) {
  DelayIndex d;
  double k = std::nearbyint(tau_total / cfg.T_s());
  if (tau_total < 0.0 || k < 0.0) {
    d.clamped = tau_total < 0.0;
    k = 0.0;
  }
  if (k > double(cfg.K - 1)) {
    d.clamped = true;
    k = double(cfg.K - 1);
  }
  d.index = int(k);
  return d;
}

struct ChannelRealization {
  std::vector<PathParams> paths;
  int M = 0, N = 0, L_p = 0, K = 0;
  CMat H;                       // M x M*N*L_p, block diagonal
  RVec e;                       // one-hot per K-block
  std::vector<int> kappa_idx;   // per block (m, n, l)
  Beamspace Z;                  // H = F1 Z F2
  Warnings warnings;

  Index blocks() const { return Index(M) * N * L_p; }
  cd h(Index m, Index n, Index l) const { return H(m, (m * N + n) * L_p + l); }
  int kappa(Index m, Index n, Index l) const {
    return kappa_idx[std::size_t((m * N + n) * L_p + l)];
  }
};

/// Effective channel matrix blkdiag(h_1^T, ..., h_M^T) for the given paths.
inline CMat effective_channel(const std::vector<PathParams>& paths, int M, int N) {
  const Index L = Index(paths.size());
  const Index width = Index(N) * L;
  CMat H = CMat::Zero(M, Index(M) * width);
  for (Index m = 0; m < M; ++m)
    for (Index n = 0; n < N; ++n)
      for (Index l = 0; l < L; ++l)
        H(m, m * width + n * L + l) = paths[std::size_t(l)].alpha_bar * steering_coeff(m, n, paths[std::size_t(l)]);
  return H;
}

/// Selector vector with a single 1 per K-block at the given indices.
inline RVec delay_selector(const std::vector<int>& kappa, int K) {
  RVec e = RVec::Zero(Index(kappa.size()) * K);
  for (std::size_t b = 0; b < kappa.size(); ++b) e(Index(b) * K + kappa[b]) = 1.0;
  return e;
}

/// Quantised delay indices for every (m, n, l) given the path geometry.
inline std::vector<int> delay_indices(const std::vector<PathParams>& paths, const SystemConfig& cfg,
                                      Warnings* w = nullptr) {
  const Index L = Index(paths.size());
  std::vector<int> kappa(std::size_t(Index(cfg.M) * cfg.N * L));
  long clamped = 0;
  for (Index m = 0; m < cfg.M; ++m)
    for (Index n = 0; n < cfg.N; ++n)
      for (Index l = 0; l < L; ++l) {
        const auto& p = paths[std::size_t(l)];
        auto d = delay_index(p.tau_path + aperture_delay(m, n, p, cfg.f_c), cfg);
        clamped += d.clamped ? 1 : 0;
        kappa[std::size_t((m * cfg.N + n) * L + l)] = d.index;
      }
  if (clamped > 0)
    warn(w, std::to_string(clamped) + " delay(s) clamped into [0, K-1]");
  return kappa;
}

/// Assemble a realization from explicit path parameters.
inline ChannelRealization assemble_channel(std::vector<PathParams> paths, const SystemConfig& cfg) {
  if (int(paths.size()) != cfg.L_p) throw ConfigError("path count must equal L_p");
  ChannelRealization ch;
  ch.M = cfg.M;
  ch.N = cfg.N;
  ch.L_p = cfg.L_p;
  ch.K = cfg.K;
  ch.kappa_idx = delay_indices(paths, cfg, &ch.warnings);
  ch.e = delay_selector(ch.kappa_idx, cfg.K);
  ch.H = effective_channel(paths, cfg.M, cfg.N);
  ch.Z = channel_to_beamspace(paths, cfg.M, cfg.N);
  ch.paths = std::move(paths);
  return ch;
}

/// Gross path delays in seconds, LoS first and the rest in increasing order.
/// Consecutive paths are separated by one sample plus the full aperture
/// spread so that every (m, n) pair resolves each path at its own index, and
/// the latest path still fits inside the K-sample selector.
inline std::vector<double> draw_path_delays(const SystemConfig& cfg, std::mt19937_64& rng,
                                            Warnings* w = nullptr) {
  std::vector<double> tau(std::size_t(cfg.L_p), 0.0);
  if (cfg.L_p == 1) return tau;
  const double ts = cfg.T_s();
  const double spread = double(cfg.M - 1 + cfg.N - 1) / (2.0 * cfg.f_c);
  const double sep = ts + spread;
  const double hi = double(cfg.K - 1) * ts - double(cfg.M - 1) / (2.0 * cfg.f_c);
  const double slack = hi - double(cfg.L_p - 1) * sep;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> u(std::size_t(cfg.L_p - 1));
  if (slack >= 0.0) {
    for (auto& x : u) x = slack * U(rng);
    std::sort(u.begin(), u.end());
    for (std::size_t i = 0; i < u.size(); ++i) tau[i + 1] = u[i] + double(i + 1) * sep;
  } else {
    warn(w, "delay budget K too small to resolve all paths; drawing unresolved delays");
    for (auto& x : u) x = 0.5 * cfg.K * ts * U(rng);
    std::sort(u.begin(), u.end());
    for (std::size_t i = 0; i < u.size(); ++i) tau[i + 1] = u[i];
  }
  return tau;
}

/// Random realization: angles uniform on [-pi/2, pi/2], complex Gaussian
/// gains of variance path_gain_variance(), common distance phase, and delays
/// from draw_path_delays(). The same generator state yields the same result.
inline ChannelRealization realize_channel(const SystemConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> angle(-0.5 * kPi, 0.5 * kPi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Warnings w;
  aliasing_budget(cfg, &w);
  const cd dist_phase = std::polar(1.0, -2.0 * kPi * cfg.d_tx_rx / cfg.wavelength());

  std::vector<PathParams> paths(std::size_t(cfg.L_p));
  for (int l = 0; l < cfg.L_p; ++l) {
    double aoa = angle(rng);
    double aod = angle(rng);
    double s = path_gain_std(cfg, l) / std::sqrt(2.0);
    double re = gauss(rng), im = gauss(rng);
    paths[std::size_t(l)] = make_path(cd(s * re, s * im) * dist_phase, aoa, aod);
  }
  auto tau = draw_path_delays(cfg, rng, &w);
  for (int l = 0; l < cfg.L_p; ++l) paths[std::size_t(l)].tau_path = tau[std::size_t(l)];

  auto ch = assemble_channel(std::move(paths), cfg);
  ch.warnings.insert(ch.warnings.begin(), w.begin(), w.end());
  return ch;
}

/// Continuous-delay impulse response h_{m,n}(t) with the full sinc kernel,
/// t in samples. Diagnostic only; the estimation model uses quantised delays.
inline cd impulse_response(const ChannelRealization& ch, const SystemConfig& cfg, Index m, Index n,
                           double t) {
  auto sinc = [](double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(kPi * x) / (kPi * x); };
  cd acc{0.0, 0.0};
  for (const auto& p : ch.paths) {
    double tau = (p.tau_path + aperture_delay(m, n, p, cfg.f_c)) / cfg.T_s();
    acc += p.alpha_bar * steering_coeff(m, n, p) * sinc(t - tau);
  }
  return acc;
}

}  // namespace xlmimo
