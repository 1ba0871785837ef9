#pragma once

// Thin FFTW wrappers for the (2N, N) column-major symbol arrays.
//
// fft_cols transforms along axis 0 (each column is contiguous), fft_rows
// along axis 1 (stride = rows). Forward transforms are unnormalized,
// inverse transforms divide by the length, matching the usual DFT pair.
// FFTW planning is not thread-safe, so plan creation is mutex-guarded.

#include <complex>
#include <mutex>
#include <fftw3.h>
#include "grid.hpp"

namespace phasecalc {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

namespace detail {

inline void fft_axis(Arr& A, int axis, int sign) {
  const int rows = static_cast<int>(A.rows());
  const int cols = static_cast<int>(A.cols());
  auto* p = reinterpret_cast<fftw_complex*>(A.data());
  int n = (axis == 0) ? rows : cols;
  int howmany = (axis == 0) ? cols : rows;
  int stride = (axis == 0) ? 1 : rows;
  int dist = (axis == 0) ? rows : 1;
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_many_dft(1, &n, howmany, p, nullptr, stride, dist,
                              p, nullptr, stride, dist, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace detail

inline void fft_cols(Arr& A) { detail::fft_axis(A, 0, FFTW_FORWARD); }
inline void ifft_cols(Arr& A) {
  detail::fft_axis(A, 0, FFTW_BACKWARD);
  A /= static_cast<double>(A.rows());
}
// backward transform without the 1/n factor
inline void bfft_cols(Arr& A) { detail::fft_axis(A, 0, FFTW_BACKWARD); }

inline void fft_rows(Arr& A) { detail::fft_axis(A, 1, FFTW_FORWARD); }
inline void ifft_rows(Arr& A) {
  detail::fft_axis(A, 1, FFTW_BACKWARD);
  A /= static_cast<double>(A.cols());
}
inline void bfft_rows(Arr& A) { detail::fft_axis(A, 1, FFTW_BACKWARD); }

inline void fft_vec(Vec& v, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(v.data());
  int n = static_cast<int>(v.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  if (sign == FFTW_BACKWARD) v /= static_cast<double>(n);
}

// DFT sample frequencies (cycles per unit), numpy fftfreq convention
inline Eigen::ArrayXd fftfreq(int n, double d) {
  Eigen::ArrayXd f(n);
  int half = (n - 1) / 2;  // for even n: n/2 - 1 positive entries handled below
  for (int j = 0; j < n; ++j) {
    int jj = (j <= (n % 2 ? half : n / 2 - 1)) ? j : j - n;
    f[j] = jj / (n * d);
  }
  return f;
}

}  // namespace phasecalc
