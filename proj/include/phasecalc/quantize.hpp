#pragma once

// Exact discrete hbar-Weyl quantization on the periodic grid.
//
// Forward map (symbol -> N x N matrix):
//   acheck(h, s) = (1/N) sum_k A(h, k) w^{-ks},  w = exp(2 pi i / N)
//   M_{mn} = acheck((2m + s*) mod 2N, s*),       s* = symres(n - m)
// which realizes the midpoint rule M_{mn} = (1/N) sum_k a((x_m+x_n)/2, xi_k)
// e^{i xi_k (x_m - x_n)/hbar} with periodic index arithmetic.
//
// Inverse map (matrix -> symbol), per diagonal s:
//   d_s(m) = M_{m,(m+s) mod N},  ghat(q,s) = (1/N) sum_m d_s(m) w^{-qm}
//   ahat(q,s) = z^{-qs} ghat(q,s),  z = exp(i pi / N)
//   A(h,k) = sum_{q,s} ahat(q,s) z^{qh} w^{sk}
//
// Both directions are evaluated with FFTs (all index ranges symmetric, with
// integer phase reduction so exponentials stay exact). The pair is exactly
// mutually inverse on the grid; this is checked to 1e-12 in tests.

#include "grid.hpp"
#include "fft.hpp"

namespace phasecalc {

namespace detail {

// exp(2 pi i e / n) with integer phase reduction
inline cplx unit_phase(long long e, long long n) {
  long long r = e % n;
  return std::exp(cplx(0.0, 2 * pi * static_cast<double>(r) / static_cast<double>(n)));
}

// A(h,k) = sum_{q,s} coef(q,s) z^{qh} w^{sk}, q and s in symmetric range
inline Arr eval_symbol_coeffs(const Arr& coef, int N) {
  const int c = (N - 1) / 2;
  Arr C = Arr::Zero(2 * N, N);
  for (int qi = 0; qi < N; ++qi) {
    int q = qi - c;
    int j = (q + 2 * N) % (2 * N);
    C.row(j) = coef.row(qi);
  }
  bfft_cols(C);  // C(h, si) = sum_q coef(q, si) exp(2 pi i q h / (2N))
  for (int si = 0; si < N; ++si)
    C.col(si) *= unit_phase(-static_cast<long long>(c) * si, N);
  bfft_rows(C);
  for (int ki = 0; ki < N; ++ki)
    C.col(ki) *= unit_phase(static_cast<long long>(c) * c -
                            static_cast<long long>(c) * ki, N);
  return C;
}

}  // namespace detail

inline Mat weyl_quantize(const SymbolGrid& a) {
  const int N = a.grid.N;
  const int c = (N - 1) / 2;
  Arr B = a.values;
  for (int ki = 0; ki < N; ++ki)
    B.col(ki) *= detail::unit_phase(static_cast<long long>(c) * ki, N);
  fft_rows(B);  // B(h, si) = sum_ki [A w^{c ki}](h, ki) w^{-ki si}
  for (int si = 0; si < N; ++si)
    B.col(si) *= detail::unit_phase(static_cast<long long>(c) * si -
                                    static_cast<long long>(c) * c, N) /
                 static_cast<double>(N);
  Mat M(N, N);
  for (int si = 0; si < N; ++si) {
    int s = si - c;
    for (int m = 0; m < N; ++m) {
      int n = ((m + s) % N + N) % N;
      int h = ((2 * m + s) % (2 * N) + 2 * N) % (2 * N);
      M(m, n) = B(h, si);
    }
  }
  return M;
}

inline SymbolGrid weyl_symbol(const GridSpec& g, const Mat& M) {
  const int N = g.N;
  if (M.rows() != N || M.cols() != N)
    throw std::invalid_argument("weyl_symbol: matrix size does not match grid");
  const int c = (N - 1) / 2;
  Arr ahat(N, N);
  Vec d(N);
  for (int si = 0; si < N; ++si) {
    int s = si - c;
    for (int m = 0; m < N; ++m) d[m] = M(m, ((m + s) % N + N) % N);
    fft_vec(d, FFTW_FORWARD);
    // fftshift and scale, then the z^{-qs} twist
    for (int qi = 0; qi < N; ++qi) {
      int q = qi - c;
      cplx ghat = d[(qi + c + 1) % N] / static_cast<double>(N);
      ahat(qi, si) = ghat * detail::unit_phase(-static_cast<long long>(q) * s, 2 * N);
    }
  }
  return SymbolGrid(g, detail::eval_symbol_coeffs(ahat, N));
}

// random band-limited symbol; qw, sw are Gaussian mode-decay widths
inline SymbolGrid bl_random(const GridSpec& g, Rng& rng,
                            double qw = 0, double sw = 0) {
  const int N = g.N;
  if (qw <= 0) qw = N / 10.0;
  if (sw <= 0) sw = N / 10.0;
  const int c = (N - 1) / 2;
  Arr coef(N, N);
  for (int si = 0; si < N; ++si)
    for (int qi = 0; qi < N; ++qi) {
      double q = qi - c, s = si - c;
      double damp = std::exp(-(q / qw) * (q / qw) - (s / sw) * (s / sw));
      coef(qi, si) = cplx(rng.normal(), rng.normal()) * damp;
    }
  return SymbolGrid(g, detail::eval_symbol_coeffs(coef, N));
}

// discrete Wigner transform of a pair of states: the symbol of |u><v|.
// Normalization: sum_grid W(u,u) * dx * dxi / (2 pi hbar) = |u|^2, and the
// pairing <Op(a)u, v> = (1/2N) sum_grid a .* W(u,v) holds exactly.
inline SymbolGrid wigner_transform(const GridSpec& g, const Vec& u, const Vec& v) {
  if (u.size() != g.N || v.size() != g.N)
    throw std::invalid_argument("wigner_transform: state length must equal N");
  return weyl_symbol(g, u * v.adjoint());
}

// grid sesquilinear pairing matching tr(Op(a)^* Op(b)) exactly (c_grid = 1)
inline cplx symbol_pairing(const SymbolGrid& a, const SymbolGrid& b) {
  if (!a.grid.same(b.grid))
    throw std::invalid_argument("symbol_pairing: grid mismatch");
  return (a.values.conjugate() * b.values).sum() / static_cast<double>(2 * a.grid.N);
}

// |<a,b>_grid - tr(Op(a)^* Op(b))|; the quantization isometry defect
inline double hs_isometry_check(const SymbolGrid& a, const SymbolGrid& b) {
  Mat Ma = weyl_quantize(a), Mb = weyl_quantize(b);
  cplx lhs = symbol_pairing(a, b);
  cplx rhs = (Ma.adjoint() * Mb).trace();
  return std::abs(lhs - rhs);
}

}  // namespace phasecalc
