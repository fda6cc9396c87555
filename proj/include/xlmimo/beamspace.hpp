// SPDX-License-Identifier: Apache-2.0
#pragma once

// Block-sparse beamspace factorization H = F1 * Z * F2 of the block-diagonal
// effective channel.
//
// Z has the fixed layout I_M (x) I_N (x) blkdiag(Z_0, ..., Z_{L-1}) with one
// M x N beamspace block Z_l = alpha_l z_rx(l) z_tx(l)^H per path, where
// z = F^H a for the unitary DFT F. Only the L blocks are stored; the dense
// M^2 N L x M N^2 L form is materialised on request for small arrays.

#include "xlmimo/geometry.hpp"
#include "xlmimo/types.hpp"

#include <cmath>
#include <ostream>
#include <vector>

namespace xlmimo {

/// Unitary DFT, [F]_{i,k} = exp(-j 2 pi i k / n) / sqrt(n).
inline CMat dft_matrix(Index n) {
  CMat F(n, n);
  const double s = 1.0 / std::sqrt(double(n));
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k)
      F(i, k) = std::polar(s, -2.0 * kPi * double((i * k) % n) / double(n));
  return F;
}

/// blkdiag over m of (1_{1 x L N} (x) delta_m^T F_rx); M x M^2 N L.
inline CMat build_f1(int M, int N, int L) {
  if (M < 1 || N < 1 || L < 1) throw DimensionError("build_f1: dimensions must be positive");
  const CMat F = dft_matrix(M);
  const Index width = Index(L) * N * M;
  CMat F1 = CMat::Zero(M, Index(M) * width);
  for (Index m = 0; m < M; ++m)
    for (Index rep = 0; rep < Index(L) * N; ++rep)
      F1.row(m).segment(m * width + rep * M, M) = F.row(m);
  return F1;
}

/// I_M (x) blkdiag_n(I_L (x) F_tx^H delta_n); M N^2 L x M N L.
inline CMat build_f2(int M, int N, int L) {
  if (M < 1 || N < 1 || L < 1) throw DimensionError("build_f2: dimensions must be positive");
  const CMat FH = dft_matrix(N).adjoint();
  const Index rows_m = Index(N) * N * L, cols_m = Index(N) * L;
  CMat F2 = CMat::Zero(Index(M) * rows_m, Index(M) * cols_m);
  for (Index m = 0; m < M; ++m)
    for (Index n = 0; n < N; ++n)
      for (Index l = 0; l < L; ++l) {
        Index r0 = m * rows_m + n * (Index(L) * N) + l * N;
        Index c = m * cols_m + n * L + l;
        F2.col(c).segment(r0, N) = FH.col(n);
      }
  return F2;
}

/// Compact beamspace: one M x N block per path.
struct Beamspace {
  int M = 0, N = 0, L = 0;
  std::vector<CMat> blocks;

  static Beamspace zeros(int M, int N, int L) {
    Beamspace z{M, N, L, {}};
    z.blocks.assign(std::size_t(L), CMat::Zero(M, N));
    return z;
  }

  Index size() const { return Index(M) * N * L; }

  /// Column-major stacking of the blocks, block 0 first.
  CVec vec() const {
    CVec v(size());
    const Index mn = Index(M) * N;
    for (int l = 0; l < L; ++l)
      v.segment(l * mn, mn) = Eigen::Map<const CVec>(blocks[std::size_t(l)].data(), mn);
    return v;
  }

  static Beamspace from_vec(const CVec& v, int M, int N, int L) {
    require_shape(v.size() == Index(M) * N * L, "Beamspace::from_vec: length mismatch");
    Beamspace z = zeros(M, N, L);
    const Index mn = Index(M) * N;
    for (int l = 0; l < L; ++l)
      z.blocks[std::size_t(l)] = Eigen::Map<const CMat>(v.data() + l * mn, M, N);
    return z;
  }

  double l1_norm() const {
    double s = 0.0;
    for (const auto& b : blocks) s += b.cwiseAbs().sum();
    return s;
  }

  /// Full M^2 N L x M N^2 L matrix.
  CMat dense() const {
    const Index rows_m = Index(M) * N * L, cols_m = Index(N) * N * L;
    CMat Z = CMat::Zero(Index(M) * rows_m, Index(M) * cols_m);
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n)
        for (Index l = 0; l < L; ++l)
          Z.block(m * rows_m + (n * L + l) * M, m * cols_m + (n * L + l) * N, M, N) =
              blocks[std::size_t(l)];
    return Z;
  }
};

/// Z from path parameters: Z_l = alpha_l (F_rx^H a_rx)(F_tx^H a_tx)^H.
inline Beamspace channel_to_beamspace(const std::vector<PathParams>& paths, int M, int N) {
  const int L = int(paths.size());
  Beamspace Z = Beamspace::zeros(M, N, L);
  const CMat FrH = dft_matrix(M).adjoint(), FtH = dft_matrix(N).adjoint();
  for (int l = 0; l < L; ++l) {
    const auto& p = paths[std::size_t(l)];
    CVec a_rx(M), a_tx(N);
    for (Index m = 0; m < M; ++m) a_rx(m) = std::polar(1.0, -2.0 * kPi * double(m) * p.theta_rx);
    for (Index n = 0; n < N; ++n) a_tx(n) = std::polar(1.0, -2.0 * kPi * double(n) * p.theta_tx);
    CVec z_rx = FrH * a_rx, z_tx = FtH * a_tx;
    Z.blocks[std::size_t(l)] = p.alpha_bar * z_rx * z_tx.adjoint();
  }
  return Z;
}

/// Beamspace coordinates of an arbitrary block-diagonal H (exact inverse of
/// beamspace_to_channel on the block pattern).
inline Beamspace channel_to_beamspace(const CMat& H, int M, int N, int L) {
  require_shape(H.rows() == M && H.cols() == Index(M) * N * L,
                "channel_to_beamspace: H must be M x MNL");
  const CMat Fr = dft_matrix(M), Ft = dft_matrix(N);
  Beamspace Z = Beamspace::zeros(M, N, L);
  const Index width = Index(N) * L;
  for (int l = 0; l < L; ++l) {
    CMat G(M, N);
    for (Index m = 0; m < M; ++m)
      for (Index n = 0; n < N; ++n) G(m, n) = H(m, m * width + n * L + l);
    Z.blocks[std::size_t(l)] = Fr.adjoint() * G * Ft;
  }
  return Z;
}

/// H = F1 Z F2 without materialising Z: h_{m,n,l} = [F_rx Z_l F_tx^H]_{m,n}.
inline CMat beamspace_to_channel(const Beamspace& Z) {
  const CMat Fr = dft_matrix(Z.M), Ft = dft_matrix(Z.N);
  const Index width = Index(Z.N) * Z.L;
  CMat H = CMat::Zero(Z.M, Index(Z.M) * width);
  for (int l = 0; l < Z.L; ++l) {
    CMat G = Fr * Z.blocks[std::size_t(l)] * Ft.adjoint();
    for (Index m = 0; m < Z.M; ++m)
      for (Index n = 0; n < Z.N; ++n) H(m, m * width + n * Z.L + l) = G(m, n);
  }
  return H;
}

/// Dense product F1 * Z * F2 with shape checks.
inline CMat beamspace_to_channel(const CMat& Z, const CMat& F1, const CMat& F2) {
  require_shape(F1.cols() == Z.rows(), "beamspace_to_channel: F1 columns != Z rows");
  require_shape(Z.cols() == F2.rows(), "beamspace_to_channel: Z columns != F2 rows");
  return F1 * Z * F2;
}

/// |Z|^2 heatmap rows "row,col,magnitude" for every entry of the dense Z
/// (or, when dense is false, of the M x (N L) side-by-side compact blocks).
inline void write_beamspace_heatmap(std::ostream& os, const Beamspace& Z, bool dense) {
  os << "row,col,magnitude\n";
  auto emit = [&](const CMat& A) {
    for (Index c = 0; c < A.cols(); ++c)
      for (Index r = 0; r < A.rows(); ++r) os << r << ',' << c << ',' << std::norm(A(r, c)) << '\n';
  };
  if (dense) {
    emit(Z.dense());
  } else {
    CMat side(Z.M, Index(Z.N) * Z.L);
    for (int l = 0; l < Z.L; ++l) side.middleCols(Index(l) * Z.N, Z.N) = Z.blocks[std::size_t(l)];
    emit(side);
  }
}

}  // namespace xlmimo
