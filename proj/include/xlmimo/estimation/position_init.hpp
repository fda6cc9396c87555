// SPDX-License-Identifier: Apache-2.0
#pragma once

// LoS channel initialisation from BS/UE positions on the 2-D plane.

#include "xlmimo/config.hpp"
#include "xlmimo/geometry.hpp"
#include "xlmimo/types.hpp"

#include <cmath>
#include <random>

namespace xlmimo::estimation {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

struct LosAngles {
  double aoa = 0.0;  // rad
  double aod = 0.0;  // rad
};

/// AoA = asin(x_UE / d), AoD = asin(x_BS / d) with d the BS-UE distance.
inline LosAngles los_angles(Position bs, Position ue) {
  const double d = std::hypot(bs.x - ue.x, bs.y - ue.y);
  if (d == 0.0) throw GeometryError("init_from_position: BS and UE positions coincide");
  const double s_rx = ue.x / d, s_tx = bs.x / d;
  if (std::abs(s_rx) > 1.0 + 1e-12 || std::abs(s_tx) > 1.0 + 1e-12)
    throw GeometryError("init_from_position: |x| exceeds the BS-UE distance");
  return {std::asin(std::clamp(s_rx, -1.0, 1.0)), std::asin(std::clamp(s_tx, -1.0, 1.0))};
}

/// Positions whose asin-geometry reproduces the normalised LoS angles of a
/// path (sin of the estimate equals cos of the physical angle), BS on the
/// x-axis offset and UE displaced in y so that the separation is d.
inline std::pair<Position, Position> positions_for_path(const PathParams& los, double d) {
  const double x_ue = d * std::cos(los.theta_rx_phys);
  const double x_bs = d * std::cos(los.theta_tx_phys);
  const double dx = x_bs - x_ue;
  const double dy = std::sqrt(std::max(0.0, d * d - dx * dx));
  return {Position{x_bs, 0.0}, Position{x_ue, dy}};
}

/// H0 with h_m = [a_rx]_m a_tx^H in the LoS columns and zero nLoS columns.
/// sigma_p2 (linear) > 0 adds CN(0, sigma_p2) noise to every in-block entry.
inline CMat init_from_position(const SystemConfig& cfg, Position bs, Position ue, double sigma_p2,
                               std::mt19937_64& rng) {
  const LosAngles ang = los_angles(bs, ue);
  const double th_rx = 0.5 * std::sin(ang.aoa);
  const double th_tx = 0.5 * std::sin(ang.aod);
  const Index M = cfg.M, N = cfg.N, L = cfg.L_p, width = N * L;
  CMat H = CMat::Zero(M, M * width);
  const double s = 1.0 / std::sqrt(double(M) * double(N));
  for (Index m = 0; m < M; ++m)
    for (Index n = 0; n < N; ++n)
      H(m, m * width + n * L) = s * std::polar(1.0, 2.0 * kPi * (double(n) * th_tx - double(m) * th_rx));
  if (sigma_p2 > 0.0) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5 * sigma_p2));
    for (Index m = 0; m < M; ++m)
      for (Index c = 0; c < width; ++c) {
        double re = g(rng), im = g(rng);
        H(m, m * width + c) += cd(re, im);
      }
  }
  return H;
}

}  // namespace xlmimo::estimation
