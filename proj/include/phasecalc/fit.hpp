#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace phasecalc {

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;      // rms of fit residuals
  double slope_stderr = 0;  // standard error of the slope (0 when n <= 2)
};

inline SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need two or more paired samples");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw std::invalid_argument("fit_line: degenerate abscissae");
  SlopeFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double sse = 0;
  for (int i = 0; i < n; ++i) {
    double r = y[i] - (f.slope * x[i] + f.intercept);
    sse += r * r;
  }
  f.residual = std::sqrt(sse / n);
  if (n > 2) f.slope_stderr = std::sqrt(sse / (n - 2) * n / det);
  return f;
}

// slope of log(y) against log(x); entries must be positive
inline SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw std::invalid_argument("fit_loglog: samples must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

}  // namespace phasecalc
