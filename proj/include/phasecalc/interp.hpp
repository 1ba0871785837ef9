#pragma once

// Band-limited interpolation of symbols on the periodic phase-space grid:
// FFT zero-padding oversample followed by windowed Lagrange interpolation on
// the fine grid. Exact (to roundoff) for band-limited data at the nodes.

#include <array>
#include "grid.hpp"
#include "fft.hpp"

namespace phasecalc {

// zero-pad the spectrum of F (2N x N symbol layout) by a factor o per axis;
// the xi axis is rotated so that fine index 0 sits at xi = 0
inline Arr oversample_symbol(const Arr& F, int N, int o) {
  const int H = 2 * N;
  const int c = (N - 1) / 2;
  Arr B(H, N);
  for (int j = 0; j < N; ++j) B.col(j) = F.col((j + c) % N);
  fft_cols(B);
  const int M0 = o * H;
  Arr Y = Arr::Zero(M0, N);
  Y.topRows(N) = B.topRows(N);
  Y.row(N) = 0.5 * B.row(N);
  Y.row(M0 - N) = 0.5 * B.row(N);
  Y.bottomRows(N - 1) = B.bottomRows(N - 1);
  ifft_cols(Y);
  Y *= double(o);
  fft_rows(Y);
  const int M1 = o * N;
  const int halfw = (N + 1) / 2;
  Arr Z = Arr::Zero(M0, M1);
  Z.leftCols(halfw) = Y.leftCols(halfw);
  Z.rightCols(N - halfw) = Y.rightCols(N - halfw);
  ifft_rows(Z);
  Z *= double(o);
  return Z;
}

// Lagrange weights on the stencil offsets j - (w/2 - 1), j = 0..w-1, for a
// fractional position f in [0, 1); exact node hits get an indicator row
template <int W = 14>
inline std::array<double, W> lagrange_weights(double f) {
  std::array<double, W> offs, wts;
  for (int j = 0; j < W; ++j) offs[j] = j - (W / 2 - 1);
  for (int j = 0; j < W; ++j)
    if (std::abs(f - offs[j]) < 1e-13) {
      wts.fill(0.0);
      wts[j] = 1.0;
      return wts;
    }
  double full = 1.0;
  for (int j = 0; j < W; ++j) full *= f - offs[j];
  for (int j = 0; j < W; ++j) {
    double denom = 1.0;
    for (int k = 0; k < W; ++k)
      if (k != j) denom *= offs[j] - offs[k];
    wts[j] = full / ((f - offs[j]) * denom);
  }
  return wts;
}

struct SymbolInterp {
  GridSpec grid;
  int o;
  Arr fine;  // (o*2N, o*N); x index 0 at -L/2, xi index 0 at 0 (periodic)

  SymbolInterp(const SymbolGrid& a, int oversample = 4)
      : grid(a.grid), o(oversample),
        fine(oversample_symbol(a.values, a.grid.N, oversample)) {}

  cplx operator()(double xq, double xiq) const {
    constexpr int W = 14;
    const int M0 = static_cast<int>(fine.rows());
    const int M1 = static_cast<int>(fine.cols());
    const double per = grid.xi_period();
    auto wrap0 = [](double u, double P) {
      double r = std::fmod(u, P);
      return r < 0 ? r + P : r;
    };
    double tx = wrap0(xq + grid.L / 2, grid.L) / (grid.L / M0);
    double ti = wrap0(xiq, per) / (per / M1);
    int i0 = static_cast<int>(std::floor(tx));
    int j0 = static_cast<int>(std::floor(ti));
    auto wx = lagrange_weights<W>(tx - i0);
    auto wi = lagrange_weights<W>(ti - j0);
    cplx out = 0;
    for (int a_ = 0; a_ < W; ++a_) {
      if (wx[a_] == 0.0) continue;
      int row = (i0 + a_ - (W / 2 - 1)) % M0;
      if (row < 0) row += M0;
      cplx acc = 0;
      for (int b_ = 0; b_ < W; ++b_) {
        if (wi[b_] == 0.0) continue;
        int col = (j0 + b_ - (W / 2 - 1)) % M1;
        if (col < 0) col += M1;
        acc += wi[b_] * fine(row, col);
      }
      out += wx[a_] * acc;
    }
    return out;
  }
};

// fraction of spectral energy in the outer band (top `frac` of frequencies
// along either axis); small values certify the grid resolves the symbol
inline double spectral_tail_fraction(const SymbolGrid& a, double frac = 0.1) {
  const int N = a.grid.N, H = 2 * N;
  Arr F = a.values;
  fft_cols(F);
  fft_rows(F);
  double total = 0, tail = 0;
  for (int h = 0; h < H; ++h) {
    int kx = h <= H / 2 ? h : h - H;
    for (int k = 0; k < N; ++k) {
      int kk = k <= N / 2 ? k : k - N;
      double e = std::norm(F(h, k));
      total += e;
      if (std::abs(kx) >= (1.0 - frac) * (H / 2) ||
          std::abs(kk) >= (1.0 - frac) * (N / 2))
        tail += e;
    }
  }
  return total > 0 ? tail / total : 0.0;
}

}  // namespace phasecalc
