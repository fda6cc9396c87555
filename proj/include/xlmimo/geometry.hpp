// SPDX-License-Identifier: Apache-2.0
#pragma once

// ULA path geometry shared by the channel and beamspace modules.

#include "xlmimo/types.hpp"

#include <cmath>

namespace xlmimo {

struct PathParams {
  cd alpha_bar{0.0, 0.0};     // complex gain incl. the common distance phase
  double theta_rx_phys = 0.0;  // physical AoA, rad
  double theta_tx_phys = 0.0;  // physical AoD, rad
  double theta_rx = 0.0;       // normalized AoA, cos(AoA)/2
  double theta_tx = 0.0;       // normalized AoD, cos(AoD)/2
  double tau_path = 0.0;       // gross path delay, s
};

inline double normalized_angle(double physical) { return 0.5 * std::cos(physical); }

inline PathParams make_path(cd alpha_bar, double aoa, double aod, double tau = 0.0) {
  PathParams p;
  p.alpha_bar = alpha_bar;
  p.theta_rx_phys = aoa;
  p.theta_tx_phys = aod;
  p.theta_rx = normalized_angle(aoa);
  p.theta_tx = normalized_angle(aod);
  p.tau_path = tau;
  return p;
}

/// exp(-j 2 pi m theta_rx) * exp(+j 2 pi n theta_tx). Unit modulus.
inline cd steering_coeff(Index m, Index n, const PathParams& p) {
  double phase = 2.0 * kPi * (double(n) * p.theta_tx - double(m) * p.theta_rx);
  return std::polar(1.0, phase);
}

/// Aperture delay of element pair (m, n) along path p, in seconds.
inline double aperture_delay(Index m, Index n, const PathParams& p, double f_c) {
  return (double(m) * std::cos(p.theta_rx_phys) - double(n) * std::cos(p.theta_tx_phys)) /
         (2.0 * f_c);
}

}  // namespace xlmimo
