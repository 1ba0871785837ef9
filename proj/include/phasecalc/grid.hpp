#pragma once

// Periodic phase-space grid used by the discrete Weyl transform.
//
// Position nodes   x_m  = -L/2 + m dx,  dx = L/N,  N odd.
// Momentum nodes   xi_k = 2 pi hbar k / L,  k = -(N-1)/2 .. (N-1)/2.
// Symbols live on the doubled position grid of 2N midpoints
// x_h = -L/2 + h dx/2 (so that (x_m + x_n)/2 is always a node) times the
// momentum grid: arrays of shape (2N, N).
//
// The momentum axis is periodic with period 2 pi hbar N / L; both axes wrap.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>
#include <cmath>
#include <cstdint>
#include <Eigen/Dense>

namespace phasecalc {

inline constexpr double pi = 3.14159265358979323846;
using cplx = std::complex<double>;
using Arr  = Eigen::ArrayXXcd;  // symbol arrays, (2N, N), column-major
using ArrR = Eigen::ArrayXXd;
using Mat  = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using Vec  = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

struct GridSpec {
  double L = 0;
  int N = 0;
  double hbar = 0;

  GridSpec() = default;
  GridSpec(double L_, int N_, double hbar_) : L(L_), N(N_), hbar(hbar_) {
    if (N < 3 || N % 2 == 0)
      throw std::invalid_argument("GridSpec: N must be odd and >= 3, got " + std::to_string(N));
    if (!(L > 0))
      throw std::invalid_argument("GridSpec: L must be positive");
    if (!(hbar > 0) || hbar > 1)
      throw std::invalid_argument("GridSpec: hbar must lie in (0, 1]");
  }

  double dx() const { return L / N; }
  double dxi() const { return 2 * pi * hbar / L; }
  double xi_period() const { return 2 * pi * hbar * N / L; }
  int khalf() const { return (N - 1) / 2; }

  double x(int m) const { return -L / 2 + m * dx(); }
  double xh(int h) const { return -L / 2 + h * dx() / 2; }
  double xi(int kidx) const { return (kidx - khalf()) * dxi(); }

  Eigen::ArrayXd xgrid() const {
    Eigen::ArrayXd v(N);
    for (int m = 0; m < N; ++m) v[m] = x(m);
    return v;
  }
  Eigen::ArrayXd halfgrid() const {
    Eigen::ArrayXd v(2 * N);
    for (int h = 0; h < 2 * N; ++h) v[h] = xh(h);
    return v;
  }
  Eigen::ArrayXd xigrid() const {
    Eigen::ArrayXd v(N);
    for (int k = 0; k < N; ++k) v[k] = xi(k);
    return v;
  }

  bool same(const GridSpec& o) const {
    return N == o.N && L == o.L && hbar == o.hbar;
  }
};

// signed residue in (-N/2, N/2]
inline int symres(int a, int N) {
  int r = ((a % N) + N) % N;
  if (r > (N - 1) / 2) r -= N;
  return r;
}

// wrap a coordinate into [-P/2, P/2)
inline double wrap_per(double u, double P) {
  double r = std::fmod(u + P / 2, P);
  if (r < 0) r += P;
  return r - P / 2;
}

struct SymbolGrid {
  GridSpec grid;
  Arr values;  // (2N, N)
  std::vector<std::string> warnings;

  SymbolGrid() = default;
  SymbolGrid(const GridSpec& g, Arr v) : grid(g), values(std::move(v)) {
    if (values.rows() != 2 * grid.N || values.cols() != grid.N)
      throw std::invalid_argument("SymbolGrid: values must be (2N, N)");
  }
};

// build a symbol from a callable f(x, xi)
template <class F>
SymbolGrid sample_symbol(const GridSpec& g, F&& f) {
  Arr v(2 * g.N, g.N);
  for (int k = 0; k < g.N; ++k) {
    double xi = g.xi(k);
    for (int h = 0; h < 2 * g.N; ++h) v(h, k) = cplx(f(g.xh(h), xi));
  }
  return SymbolGrid(g, std::move(v));
}

// position-only and momentum-only meshes, shape (2N, N)
inline ArrR mesh_x(const GridSpec& g) {
  ArrR v(2 * g.N, g.N);
  for (int k = 0; k < g.N; ++k)
    for (int h = 0; h < 2 * g.N; ++h) v(h, k) = g.xh(h);
  return v;
}
inline ArrR mesh_xi(const GridSpec& g) {
  ArrR v(2 * g.N, g.N);
  for (int k = 0; k < g.N; ++k)
    for (int h = 0; h < 2 * g.N; ++h) v(h, k) = g.xi(k);
  return v;
}

// L2 norm with the phase-space measure (dx/2) * dxi
inline double symbol_l2(const GridSpec& g, const Arr& v) {
  return std::sqrt(v.abs2().sum() * (g.dx() / 2) * g.dxi());
}
inline double symbol_l2(const SymbolGrid& a) { return symbol_l2(a.grid, a.values); }

// deterministic RNG (Box-Muller over mt19937_64; independent of libstdc++
// distribution internals so outputs are reproducible everywhere)
struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() {  // in (0,1)
    return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * pi * u2);
  }
};

// smooth plateau window: ~1 on |u| < R, ~0 beyond, transition scale s
inline double erf_window(double u, double R, double s) {
  return 0.5 * (std::erf((u + R) / s) - std::erf((u - R) / s));
}
inline double erf_window_d1(double u, double R, double s) {
  return (std::exp(-((u + R) / s) * ((u + R) / s)) -
          std::exp(-((u - R) / s) * ((u - R) / s))) / (s * std::sqrt(pi));
}
inline double erf_window_d2(double u, double R, double s) {
  double up = (u + R) / s, um = (u - R) / s;
  return -2.0 * (up * std::exp(-up * up) - um * std::exp(-um * um)) /
         (s * s * std::sqrt(pi));
}
inline double erf_window_d3(double u, double R, double s) {
  double up = (u + R) / s, um = (u - R) / s;
  return -2.0 * ((1 - 2 * up * up) * std::exp(-up * up) -
                 (1 - 2 * um * um) * std::exp(-um * um)) /
         (s * s * s * std::sqrt(pi));
}

}  // namespace phasecalc
