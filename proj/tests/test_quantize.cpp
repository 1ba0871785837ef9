#include <catch2/catch_amalgamated.hpp>
#include <phasecalc/quantize.hpp>

using namespace phasecalc;

namespace {

Mat cyclic_shift(int N) {
  Mat S = Mat::Zero(N, N);
  for (int m = 0; m < N; ++m) S((m + 1) % N, m) = 1.0;
  return S;
}

// brute-force O(N^3) reference of the forward map, for small N
Mat quantize_ref(const SymbolGrid& a) {
  const int N = a.grid.N;
  const int c = (N - 1) / 2;
  Mat M = Mat::Zero(N, N);
  for (int m = 0; m < N; ++m)
    for (int n = 0; n < N; ++n) {
      int s = symres(n - m, N);
      int h = ((2 * m + s) % (2 * N) + 2 * N) % (2 * N);
      cplx acc = 0;
      for (int ki = 0; ki < N; ++ki) {
        int k = ki - c;
        double ph = -2 * pi * double((long long)(k) * s % N) / N;
        acc += a.values(h, ki) * std::exp(cplx(0, ph));
      }
      M(m, n) = acc / double(N);
    }
  return M;
}

}  // namespace

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec(12.0, 256, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(12.0, 257, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(12.0, 257, 1.5), std::invalid_argument);
  GridSpec g(12.0, 257, 0.1);
  CHECK(g.dx() == Catch::Approx(12.0 / 257));
  CHECK(g.xi(g.khalf()) == Catch::Approx(0.0).margin(1e-15));
  CHECK(g.xigrid().maxCoeff() == Catch::Approx(2 * pi * 0.1 * 128 / 12.0));
}

TEST_CASE("FFT quantizer matches dense reference") {
  GridSpec g(7.0, 33, 0.3);
  Rng rng(11);
  SymbolGrid a = bl_random(g, rng, 5.0, 5.0);
  Mat M1 = weyl_quantize(a);
  Mat M2 = quantize_ref(a);
  CHECK((M1 - M2).cwiseAbs().maxCoeff() < 1e-12 * M2.cwiseAbs().maxCoeff());
}

TEST_CASE("constant symbol quantizes to the identity") {
  GridSpec g(12.0, 257, 0.1);
  SymbolGrid one = sample_symbol(g, [](double, double) { return 1.0; });
  Mat M = weyl_quantize(one);
  CHECK((M - Mat::Identity(g.N, g.N)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("round trip is the identity to 1e-12") {
  GridSpec g(12.0, 257, 0.1);
  Rng rng(7);
  SymbolGrid a = bl_random(g, rng);
  Mat M = weyl_quantize(a);
  SymbolGrid back = weyl_symbol(g, M);
  double rel = (back.values - a.values).abs().maxCoeff() / a.values.abs().maxCoeff();
  CHECK(rel < 1e-12);

  // matrix-side round trip
  Rng rng2(13);
  Mat H(g.N, g.N);
  for (int j = 0; j < g.N; ++j)
    for (int i = 0; i < g.N; ++i) H(i, j) = cplx(rng2.normal(), rng2.normal());
  H = (H + Mat(H.adjoint())).eval();
  Mat H2 = weyl_quantize(weyl_symbol(g, H));
  CHECK((H2 - H).cwiseAbs().maxCoeff() < 1e-12 * H.cwiseAbs().maxCoeff());
}

TEST_CASE("reality-Hermiticity correspondence both ways") {
  GridSpec g(12.0, 129, 0.1);
  Rng rng(3);
  SymbolGrid a = bl_random(g, rng);
  a.values = a.values.real().cast<cplx>();
  Mat M = weyl_quantize(a);
  CHECK((M - Mat(M.adjoint())).cwiseAbs().maxCoeff() < 1e-12 * M.cwiseAbs().maxCoeff());

  Mat H = M;  // already Hermitian
  SymbolGrid s = weyl_symbol(g, H);
  CHECK(s.values.imag().abs().maxCoeff() < 1e-12 * s.values.abs().maxCoeff());
}

TEST_CASE("quantization isometry: pairing equals trace form") {
  GridSpec g(12.0, 257, 0.1);
  Rng rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    SymbolGrid a = bl_random(g, rng);
    SymbolGrid b = bl_random(g, rng);
    double na = symbol_l2(a), nb = symbol_l2(b);
    a.values /= na;
    b.values /= nb;
    CHECK(hs_isometry_check(a, b) < 1e-10);
  }
}

TEST_CASE("translation covariance is exact on the torus") {
  GridSpec g(12.0, 65, 0.1);
  Rng rng(5);
  SymbolGrid a = bl_random(g, rng);
  Mat M = weyl_quantize(a);
  // shift the symbol by one full dx (= 2 half-grid rows)
  Arr shifted(2 * g.N, g.N);
  for (int h = 0; h < 2 * g.N; ++h)
    shifted.row(h) = a.values.row(((h - 2) % (2 * g.N) + 2 * g.N) % (2 * g.N));
  Mat S = cyclic_shift(g.N);
  Mat lhs = S * M * S.adjoint();
  Mat rhs = weyl_quantize(SymbolGrid(g, shifted));
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13 * M.cwiseAbs().maxCoeff());
}

TEST_CASE("position symbol quantizes to diagonal multiplication") {
  GridSpec g(12.0, 257, 0.1);
  SymbolGrid a = sample_symbol(g, [](double x, double) {
    return x * erf_window(x, 3.6, 0.7);
  });
  Mat M = weyl_quantize(a);
  double offdiag = 0, diagerr = 0;
  for (int m = 0; m < g.N; ++m) {
    for (int n = 0; n < g.N; ++n)
      if (n != m) offdiag = std::max(offdiag, std::abs(M(m, n)));
    double want = g.x(m) * erf_window(g.x(m), 3.6, 0.7);
    diagerr = std::max(diagerr, std::abs(M(m, m) - want));
  }
  CHECK(offdiag < 1e-14);
  CHECK(diagerr < 1e-12);
}

TEST_CASE("momentum symbol acts as the spectral derivative on band-limited states") {
  GridSpec g(12.0, 257, 0.1);
  double xim = g.xigrid().maxCoeff();
  SymbolGrid a = sample_symbol(g, [xim](double, double xi) {
    return xi * erf_window(xi, 0.7 * xim, 0.08 * xim);
  });
  Mat M = weyl_quantize(a);
  // u = Gaussian superposition of plane waves with |xi_k| <= 0.3 xi_max
  Vec u = Vec::Zero(g.N);
  const int c = g.khalf();
  for (int ki = 0; ki < g.N; ++ki) {
    int k = ki - c;
    double xi = g.xi(ki);
    if (std::abs(xi) > 0.3 * xim) continue;
    double amp = std::exp(-std::pow(xi / (0.1 * xim), 2));
    for (int m = 0; m < g.N; ++m)
      u[m] += amp * std::exp(cplx(0, 2 * pi * double((long long)(k)*m % g.N) / g.N));
  }
  // exact momentum action on those modes
  Vec du = Vec::Zero(g.N);
  for (int ki = 0; ki < g.N; ++ki) {
    int k = ki - c;
    double xi = g.xi(ki);
    if (std::abs(xi) > 0.3 * xim) continue;
    double amp = std::exp(-std::pow(xi / (0.1 * xim), 2));
    for (int m = 0; m < g.N; ++m)
      du[m] += xi * amp * std::exp(cplx(0, 2 * pi * double((long long)(k)*m % g.N) / g.N));
  }
  CHECK((M * u - du).norm() / du.norm() < 1e-8);
}

TEST_CASE("canonical commutator anchor x # xi - xi # x = i hbar") {
  GridSpec g(12.0, 257, 0.1);
  // windows flat to ~1e-13 on the |.| < 1 interior and dead at the wrap seam
  SymbolGrid ax = sample_symbol(g, [](double x, double) {
    return x * erf_window(x, 3.5, 0.48);
  });
  SymbolGrid axi = sample_symbol(g, [](double, double xi) {
    return xi * erf_window(xi, 3.85, 0.55);
  });
  Mat Mx = weyl_quantize(ax), Mxi = weyl_quantize(axi);
  SymbolGrid comm = weyl_symbol(g, Mx * Mxi - Mxi * Mx);
  SymbolGrid prod = weyl_symbol(g, Mx * Mxi);
  double err_comm = 0, err_prod = 0;
  for (int ki = 0; ki < g.N; ++ki)
    for (int h = 0; h < 2 * g.N; ++h) {
      double x = g.xh(h), xi = g.xi(ki);
      if (std::abs(x) < 1.0 && std::abs(xi) < 1.0) {
        err_comm = std::max(err_comm, std::abs(comm.values(h, ki) - cplx(0, g.hbar)));
        cplx want = x * xi + cplx(0, 0.5 * g.hbar);
        err_prod = std::max(err_prod, std::abs(prod.values(h, ki) - want));
      }
    }
  CHECK(err_comm < 1e-10);
  CHECK(err_prod < 1e-10);
}

TEST_CASE("Wigner transform of a Gaussian matches the closed form") {
  GridSpec g(25.0, 127, 1.0);
  Vec u(g.N);
  for (int m = 0; m < g.N; ++m) u[m] = std::exp(-g.x(m) * g.x(m) / 2);
  SymbolGrid W = wigner_transform(g, u, u);
  // W proportional to exp(-(x^2 + xi^2)); fix the constant at the center
  int h0 = g.N, k0 = g.khalf();
  REQUIRE(std::abs(g.xh(h0)) < 1e-12);
  cplx c0 = W.values(h0, k0);
  double err = 0;
  for (int ki = 0; ki < g.N; ++ki)
    for (int h = 0; h < 2 * g.N; ++h) {
      double x = g.xh(h), xi = g.xi(ki);
      if (x * x + xi * xi > 4.0) continue;
      cplx want = c0 * std::exp(-(x * x + xi * xi));
      err = std::max(err, std::abs(W.values(h, ki) - want) / std::abs(c0));
    }
  CHECK(err < 1e-6);
}

TEST_CASE("Wigner trace identity and operator pairing") {
  GridSpec g(12.0, 129, 0.1);
  Rng rng(17);
  Vec u(g.N), v(g.N);
  for (int m = 0; m < g.N; ++m) {
    u[m] = cplx(rng.normal(), rng.normal());
    v[m] = cplx(rng.normal(), rng.normal());
  }
  u /= u.norm();
  v /= v.norm();
  SymbolGrid Wuu = wigner_transform(g, u, u);
  double mass = (Wuu.values.sum() * (g.dx() / 2) * g.dxi() / (2 * pi * g.hbar)).real();
  CHECK(mass == Catch::Approx(1.0).margin(1e-10));

  SymbolGrid a = bl_random(g, rng);
  Mat Ma = weyl_quantize(a);
  cplx lhs = (v.adjoint() * (Ma * u))(0, 0);
  SymbolGrid Wuv = wigner_transform(g, u, v);
  cplx rhs = (a.values * Wuv.values).sum() / double(2 * g.N);
  CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("two-point state pair localizes at the midpoint") {
  GridSpec g(12.0, 65, 0.1);
  int m1 = 10, m2 = 40;
  Vec u = Vec::Zero(g.N), v = Vec::Zero(g.N);
  u[m1] = 1.0;
  v[m2] = 1.0;
  SymbolGrid W = wigner_transform(g, u, v);
  Eigen::ArrayXd marg(2 * g.N);
  for (int h = 0; h < 2 * g.N; ++h) marg[h] = W.values.row(h).abs().sum();
  int hstar;
  marg.maxCoeff(&hstar);
  int s = symres(m2 - m1, g.N);
  int want = ((2 * m1 + s) % (2 * g.N) + 2 * g.N) % (2 * g.N);
  CHECK(hstar == want);
  // dominant peak: nearby Dirichlet sidelobes fall off
  CHECK(marg[want] > 10 * marg[(want + 11) % (2 * g.N)]);
}

TEST_CASE("pairing and Wigner argument checks") {
  GridSpec g(12.0, 65, 0.1);
  GridSpec g2(12.0, 67, 0.1);
  Rng rng(1);
  SymbolGrid a = bl_random(g, rng), b = bl_random(g2, rng);
  CHECK_THROWS_AS(symbol_pairing(a, b), std::invalid_argument);
  Vec u = Vec::Zero(64);
  CHECK_THROWS_AS(wigner_transform(g, u, u), std::invalid_argument);
  Mat M = Mat::Zero(3, 3);
  CHECK_THROWS_AS(weyl_symbol(g, M), std::invalid_argument);
}
