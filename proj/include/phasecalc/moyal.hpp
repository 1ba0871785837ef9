#pragma once

// Star product of grid symbols and its semiclassical expansion.
//
// The product itself is computed at the operator level, so it inherits the
// exact algebra of the discrete quantization (associativity, unit, adjoints).
// The expansion terms
//   P_j(a, b) = (hbar/2i)^j / j! sum_k (-1)^k C(j,k)
//               (dxi^{j-k} dx^k a) (dx^{j-k} dxi^k b)
// are evaluated with spectral derivatives, and the order-j0 remainder is
// a # b - sum_{j <= j0} P_j(a, b).

#include <algorithm>
#include <functional>
#include <string>
#include <vector>
#include "fit.hpp"
#include "io.hpp"
#include "quantize.hpp"

namespace phasecalc {

namespace detail {

inline cplx ipow(cplx z, int n) {
  cplx r(1.0, 0.0);
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

inline double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

// spectral partial derivative dx^nx dxi^nxi of a symbol array
inline Arr symbol_derivative(const GridSpec& g, const Arr& v, int nx, int nxi) {
  if (nx < 0 || nxi < 0)
    throw std::invalid_argument("symbol_derivative: negative order");
  Arr w = v;
  if (nx > 0) {
    fft_cols(w);
    Eigen::ArrayXd f = fftfreq(2 * g.N, g.L / (2 * g.N));
    for (int h = 0; h < 2 * g.N; ++h)
      w.row(h) *= detail::ipow(cplx(0.0, 2 * pi * f[h]), nx);
    ifft_cols(w);
  }
  if (nxi > 0) {
    fft_rows(w);
    Eigen::ArrayXd f = fftfreq(g.N, g.dxi());
    for (int k = 0; k < g.N; ++k)
      w.col(k) *= detail::ipow(cplx(0.0, 2 * pi * f[k]), nxi);
    ifft_rows(w);
  }
  return w;
}

inline SymbolGrid moyal_product(const SymbolGrid& a, const SymbolGrid& b) {
  if (!a.grid.same(b.grid))
    throw std::invalid_argument("moyal_product: grid mismatch");
  Mat M = weyl_quantize(a) * weyl_quantize(b);
  return weyl_symbol(a.grid, M);
}

// {p, a} = dxi p dx a - dx p dxi a, the generator convention used by the flows
inline SymbolGrid poisson_bracket(const SymbolGrid& p, const SymbolGrid& a) {
  if (!p.grid.same(a.grid))
    throw std::invalid_argument("poisson_bracket: grid mismatch");
  const GridSpec& g = p.grid;
  Arr v = symbol_derivative(g, p.values, 0, 1) * symbol_derivative(g, a.values, 1, 0) -
          symbol_derivative(g, p.values, 1, 0) * symbol_derivative(g, a.values, 0, 1);
  return SymbolGrid(g, std::move(v));
}

inline constexpr int moyal_order_cap = 6;

inline SymbolGrid moyal_term(int j, const SymbolGrid& a, const SymbolGrid& b) {
  if (!a.grid.same(b.grid))
    throw std::invalid_argument("moyal_term: grid mismatch");
  if (j < 0 || j > moyal_order_cap)
    throw std::invalid_argument("moyal_term: unsupported expansion order " +
                                std::to_string(j) + ", cap is " +
                                std::to_string(moyal_order_cap));
  const GridSpec& g = a.grid;
  Arr acc = Arr::Zero(2 * g.N, g.N);
  for (int k = 0; k <= j; ++k) {
    double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    acc += (sgn * detail::binom(j, k)) *
           symbol_derivative(g, a.values, k, j - k) *
           symbol_derivative(g, b.values, j - k, k);
  }
  cplx pref = detail::ipow(cplx(0.0, -g.hbar / 2), j);  // (hbar/2i)^j
  double fact = 1;
  for (int i = 2; i <= j; ++i) fact *= i;
  acc *= pref / fact;
  return SymbolGrid(g, std::move(acc));
}

inline SymbolGrid moyal_remainder(int j0, const SymbolGrid& a, const SymbolGrid& b) {
  SymbolGrid r = moyal_product(a, b);
  for (int j = 0; j <= j0; ++j) r.values -= moyal_term(j, a, b).values;
  return r;
}

struct MoyalScanRow {
  double hbar = 0;
  int j0 = 0;
  double remainder_norm = 0;  // sup norm over the grid
  double fitted_slope = 0;    // shared across the rows of one order
};

// remainder decay of the same symbol pair across grids of decreasing hbar
inline std::vector<MoyalScanRow> moyal_scan(
    const std::vector<GridSpec>& grids,
    const std::function<double(double, double)>& fa,
    const std::function<double(double, double)>& fb,
    const std::vector<int>& orders) {
  if (grids.size() < 2)
    throw std::invalid_argument("moyal_scan: need two or more grids to fit a slope");
  int jmax = 0;
  for (int j0 : orders) jmax = std::max(jmax, j0);
  std::vector<double> hbars;
  for (const auto& g : grids) hbars.push_back(g.hbar);
  // norms[oi][gi]: one product per grid, terms peeled off cumulatively
  std::vector<std::vector<double>> norms(orders.size(),
                                         std::vector<double>(grids.size()));
  for (size_t gi = 0; gi < grids.size(); ++gi) {
    const GridSpec& g = grids[gi];
    SymbolGrid a = sample_symbol(g, fa), b = sample_symbol(g, fb);
    Arr rem = moyal_product(a, b).values;
    for (int j = 0; j <= jmax; ++j) {
      rem -= moyal_term(j, a, b).values;
      for (size_t oi = 0; oi < orders.size(); ++oi)
        if (orders[oi] == j) norms[oi][gi] = rem.abs().maxCoeff();
    }
  }
  std::vector<MoyalScanRow> rows;
  for (size_t oi = 0; oi < orders.size(); ++oi) {
    double slope = fit_loglog(hbars, norms[oi]).slope;
    for (size_t gi = 0; gi < grids.size(); ++gi)
      rows.push_back({hbars[gi], orders[oi], norms[oi][gi], slope});
  }
  return rows;
}

inline std::string moyal_scan_csv(const std::vector<MoyalScanRow>& rows) {
  std::string out = "hbar,j0,remainder_norm,fitted_slope\n";
  for (const auto& r : rows)
    out += g17(r.hbar) + "," + std::to_string(r.j0) + "," +
           g17(r.remainder_norm) + "," + g17(r.fitted_slope) + "\n";
  return out;
}

}  // namespace phasecalc
