#pragma once

// Phase-space metric algebra: sigma-duality, gain function, symplectic
// intermediate metric, temperance weight, sampled admissibility reports,
// and the Ehrenfest-time bookkeeping.
//
// A metric at a point is an SPD matrix G on R^{2d} with coordinates ordered
// (x_1..x_d, xi_1..xi_d); the standard symplectic matrix is
// J = [[0, I], [-I, 0]], sigma(X, Y) = X^T J Y.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>
#include "grid.hpp"
#include "linalg.hpp"
#include "expr.hpp"

namespace phasecalc {

struct uncertainty_violation : std::domain_error {
  using std::domain_error::domain_error;
};
struct undefined_scale : std::domain_error {
  using std::domain_error::domain_error;
};

struct SymplecticForm {
  int d;
  MatR J;
  static SymplecticForm standard(int d) {
    MatR J = MatR::Zero(2 * d, 2 * d);
    J.topRightCorner(d, d) = MatR::Identity(d, d);
    J.bottomLeftCorner(d, d) = -MatR::Identity(d, d);
    return {d, J};
  }
};

inline MatR standard_J(int dim2) {
  if (dim2 % 2 != 0)
    throw std::invalid_argument("phase-space dimension must be even");
  return SymplecticForm::standard(dim2 / 2).J;
}

// Hamiltonian vector field convention: H_p = J * grad p = (dp/dxi, -dp/dx)

inline MatR sigma_dual(const MatR& G) {
  require_spd(G, "sigma_dual");
  MatR J = standard_J(static_cast<int>(G.rows()));
  return J.transpose() * G.inverse() * J;
}

struct GainDuality {
  double h;       // gain: sqrt(lambda_max((G^sigma)^-1 G)), <= 1 iff uncertainty holds
  double h_alt;   // same quantity from the duality map spectrum (cross-check)
  MatR Jg;        // g(X, Y) = sigma(X, Jg Y)
};

inline GainDuality gain_and_duality(const MatR& G) {
  MatR Gs = sigma_dual(G);
  double h = std::sqrt(max_rel_eig(G, Gs));
  MatR J = standard_J(static_cast<int>(G.rows()));
  MatR Jg = J.transpose() * G;  // from G = J Jg
  // skew W = G^{-1/2} J G^{-1/2} has eigenvalues +- i / (symplectic eigenvalue)
  MatR Gi = spd_inv_sqrt(G);
  MatR W = Gi * J * Gi;
  double mu_min = std::sqrt(sym_eig(W.transpose() * W).eigenvalues().minCoeff());
  return {h, 1.0 / mu_min, Jg};
}

inline double gain(const MatR& G) { return gain_and_duality(G).h; }

// geometric mean of G and G^sigma; self sigma-dual, interpolates g <= g^nat <= g^sigma
inline MatR symplectic_intermediate(const MatR& G) {
  GainDuality gd = gain_and_duality(G);
  if (gd.h > 1 + 1e-12)
    throw uncertainty_violation("symplectic_intermediate: gain " + std::to_string(gd.h) +
                                " exceeds 1, metric violates the uncertainty bound");
  MatR Gh = spd_sqrt(G), Gih = spd_inv_sqrt(G);
  MatR mid = spd_sqrt(Gih * sigma_dual(G) * Gih);
  MatR Gn = Gh * mid * Gh;
  return 0.5 * (Gn + Gn.transpose());
}

// PSD slacks of the chain g <= h g^nat <= g^nat <= h^-1 g^nat <= g^sigma,
// plus the uncertainty ordering g <= g^sigma; all should be >= -tol
inline std::array<double, 5> chain_slacks(const MatR& G) {
  double h = gain(G);
  MatR Gn = symplectic_intermediate(G);
  MatR Gs = sigma_dual(G);
  return {psd_slack(h * Gn - G),
          psd_slack(Gn - h * Gn),
          psd_slack(Gn / h - Gn),
          psd_slack(Gs - Gn / h),
          psd_slack(Gs - G)};
}

// temperance weight against a fixed symplectic (self sigma-dual) background
inline double temperance_weight(const MatR& G, const MatR& Gflat) {
  MatR Fs = sigma_dual(Gflat);
  double dev = (Fs - Gflat).cwiseAbs().maxCoeff();
  if (dev > 1e-10)
    throw std::invalid_argument(
        "temperance_weight: background metric is not self sigma-dual (defect " +
        std::to_string(dev) + ")");
  return std::sqrt(max_rel_eig(sigma_dual(G), Gflat));
}

// default flat background: for a diagonal metric, the symplectic metric
// conformal to it pairwise in (x_i, xi_i); otherwise the identity
inline MatR flat_background(const MatR& G) {
  int n = static_cast<int>(G.rows());
  int d = n / 2;
  bool diag = true;
  for (int i = 0; i < n && diag; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(G(i, j)) > 1e-14 * G.diagonal().maxCoeff()) {
        diag = false;
        break;
      }
  if (!diag) return MatR::Identity(n, n);
  MatR F = MatR::Identity(n, n);
  for (int i = 0; i < d; ++i) {
    double a = G(i, i), b = G(d + i, d + i);
    double c = std::sqrt(a * b);
    F(i, i) = a / c;
    F(d + i, d + i) = b / c;
  }
  return F;
}

struct TimeScaling {
  double Lambda = 0;
  double Upsilon = 0;
  double h_bar_g = 0;
  double T_E = 0;
};

inline double ehrenfest_time(double Lambda, double Upsilon, double h_bar_g) {
  if (!(h_bar_g > 0) || h_bar_g > 1)
    throw uncertainty_violation("ehrenfest_time: h_bar_g must lie in (0, 1], got " +
                                std::to_string(h_bar_g));
  double rate = Lambda + 2 * Upsilon;
  if (!(rate > 0))
    throw undefined_scale("ehrenfest_time: Lambda + 2 Upsilon must be positive");
  return 0.5 / rate * std::log(1.0 / h_bar_g);
}

inline TimeScaling make_time_scaling(double Lambda, double Upsilon, double h_bar_g) {
  return {Lambda, Upsilon, h_bar_g, ehrenfest_time(Lambda, Upsilon, h_bar_g)};
}

// the rescaled metric g(t) = e^{2 (Lambda + 2 Upsilon) |t|} g; its gain grows
// by the same factor, so T_E(g(t)) = T_E(g) - |t|
inline MatR time_scaled_metric(const MatR& G, const TimeScaling& ts, double t) {
  return std::exp(2 * (ts.Lambda + 2 * ts.Upsilon) * std::abs(t)) * G;
}

// ---------------------------------------------------------------------------
// metric fields and sampled admissibility

using MetricField = std::function<MatR(const VecR&)>;

struct PairDiag {
  int i = 0, j = 0;
  double dist_g = 0;      // |rho_j - rho_i| in g_{rho_i}
  double dist_sigma = 0;  // same in g^sigma_{rho_i}
  double ratio = 0;       // lambda_max of G_i^-1 G_j
};

struct AdmissibilityReport {
  double slow_variation_C = 1;
  double temperance_C = 1;
  double temperance_N = 0;
  double temperance_fit_residual = 0;
  double sup_gain = 0;
  int sample_count = 0;
  std::vector<PairDiag> worst_pairs;  // pairs attaining the fitted bounds
};

// Sampled slow-variation constant (over pairs within g-radius r) and
// temperance fit g_rho' <= C^2 (1 + |rho'-rho|^2_{g^sigma_rho})^N g_rho.
// N is chosen on a fixed half-integer grid by least squares in log scale;
// C is then the upper envelope so the bound holds on every sampled pair.
inline AdmissibilityReport admissibility_report(const MetricField& field,
                                                const std::vector<VecR>& samples,
                                                double r) {
  if (samples.empty())
    throw std::invalid_argument("admissibility_report: no samples given");
  const int n = static_cast<int>(samples.size());
  std::vector<MatR> G(n), Gs(n);
  AdmissibilityReport rep;
  rep.sample_count = n;
  for (int i = 0; i < n; ++i) {
    G[i] = field(samples[i]);
    require_spd(G[i], "admissibility_report");
    Gs[i] = sigma_dual(G[i]);
    rep.sup_gain = std::max(rep.sup_gain, gain(G[i]));
  }
  std::vector<double> xs, ys;
  std::vector<PairDiag> diags;
  double slowC2 = 1;
  PairDiag worst_slow, worst_temp;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      VecR dv = samples[j] - samples[i];
      PairDiag pd;
      pd.i = i;
      pd.j = j;
      pd.dist_g = std::sqrt(dv.dot(G[i] * dv));
      pd.dist_sigma = std::sqrt(dv.dot(Gs[i] * dv));
      pd.ratio = max_rel_eig(G[j], G[i]);
      if (pd.dist_g <= r && pd.ratio > slowC2) {
        slowC2 = pd.ratio;
        worst_slow = pd;
      }
      xs.push_back(std::log1p(pd.dist_sigma * pd.dist_sigma));
      ys.push_back(std::log(std::max(pd.ratio, 1e-300)));
      diags.push_back(pd);
    }
  rep.slow_variation_C = std::sqrt(slowC2);
  if (!xs.empty()) {
    double bestN = 0, bestSSE = std::numeric_limits<double>::infinity();
    for (double N = 0; N <= 8.0 + 1e-9; N += 0.5) {
      double c = 0;
      for (size_t k = 0; k < xs.size(); ++k) c += ys[k] - N * xs[k];
      c /= xs.size();
      double sse = 0;
      for (size_t k = 0; k < xs.size(); ++k) {
        double e = ys[k] - N * xs[k] - c;
        sse += e * e;
      }
      if (sse < bestSSE) {
        bestSSE = sse;
        bestN = N;
      }
    }
    rep.temperance_N = bestN;
    double env = -std::numeric_limits<double>::infinity();
    size_t kmax = 0;
    for (size_t k = 0; k < xs.size(); ++k) {
      double e = ys[k] - bestN * xs[k];
      if (e > env) {
        env = e;
        kmax = k;
      }
    }
    rep.temperance_C = std::exp(0.5 * std::max(env, 0.0));
    rep.temperance_fit_residual = std::sqrt(bestSSE / xs.size());
    worst_temp = diags[kmax];
    rep.worst_pairs = {worst_slow, worst_temp};
  }
  return rep;
}

// ---------------------------------------------------------------------------
// named metric field families (2x2, d = 1)

inline MetricField constant_metric(const MatR& G) {
  return [G](const VecR&) { return G; };
}

// two scale functions: g = Phi^-2 dx^2 + Psi^-2 dxi^2
inline MetricField beals_fefferman_metric(double Phi, double Psi) {
  MatR G = MatR::Zero(2, 2);
  G(0, 0) = 1.0 / (Phi * Phi);
  G(1, 1) = 1.0 / (Psi * Psi);
  return constant_metric(G);
}

// g_hbar = gamma dx^2 + hbar^2 gamma^-1 dxi^2
inline MetricField semiclassical_metric(double hbar, double gamma = 1.0) {
  MatR G = MatR::Zero(2, 2);
  G(0, 0) = gamma;
  G(1, 1) = hbar * hbar / gamma;
  return constant_metric(G);
}

// g = p^{1-alpha} gamma dx^2 + p^{-1-alpha} gamma^-1 dxi^2 with
// p = <xi>_{gamma^-1} = sqrt(1 + xi^2 / gamma); gain p^-alpha
inline MetricField halfwave_metric(double alpha,
                                   std::function<double(double)> gamma = {}) {
  return [alpha, gamma](const VecR& rho) {
    double gam = gamma ? gamma(rho[0]) : 1.0;
    double p = std::sqrt(1.0 + rho[1] * rho[1] / gam);
    MatR G = MatR::Zero(2, 2);
    G(0, 0) = std::pow(p, 1 - alpha) * gam;
    G(1, 1) = std::pow(p, -1 - alpha) / gam;
    return G;
  };
}

// g = <xi>^{2 a1} dx^2 + <xi>^{-2 a2} dxi^2; gain <xi>^{-(a2-a1)}
inline MetricField vectorfield_metric(double a1, double a2) {
  auto bad = [&](const std::string& ineq) {
    throw std::invalid_argument("vectorfield_metric: violated " + ineq + " with a1=" +
                                std::to_string(a1) + ", a2=" + std::to_string(a2));
  };
  if (!(0 <= a1)) bad("0 <= a1");
  if (!(a1 <= a2)) bad("a1 <= a2");
  if (!(a2 <= 1)) bad("a2 <= 1");
  if (!(a1 + a2 >= 1)) bad("a1 + a2 >= 1");
  if (!(a1 < 1)) bad("a1 < 1");
  return [a1, a2](const VecR& rho) {
    double br = std::sqrt(1.0 + rho[1] * rho[1]);
    MatR G = MatR::Zero(2, 2);
    G(0, 0) = std::pow(br, 2 * a1);
    G(1, 1) = std::pow(br, -2 * a2);
    return G;
  };
}

// parse a metric field from flat key=value text entries (one per line is not
// required; the caller provides the key lookup)
inline MetricField metric_field_from_config(
    const std::function<std::string(const std::string&, const std::string&)>& get) {
  std::string kind = get("kind", "");
  if (kind == "constant") {
    MatR G(2, 2);
    G(0, 0) = std::stod(get("gxx", "1"));
    G(0, 1) = G(1, 0) = std::stod(get("gxxi", "0"));
    G(1, 1) = std::stod(get("gxixi", "1"));
    return constant_metric(G);
  }
  if (kind == "beals_fefferman")
    return beals_fefferman_metric(std::stod(get("Phi", "1")), std::stod(get("Psi", "1")));
  if (kind == "semiclassical")
    return semiclassical_metric(std::stod(get("hbar", "1")), std::stod(get("gamma", "1")));
  if (kind == "halfwave") {
    double alpha = std::stod(get("alpha", "1"));
    std::string gtxt = get("gamma", "");
    if (gtxt.empty()) return halfwave_metric(alpha);
    Expr ge = Expr::parse(gtxt);
    return halfwave_metric(alpha, [ge](double x) { return ge(x, 0); });
  }
  if (kind == "vectorfield")
    return vectorfield_metric(std::stod(get("a1", "0.5")), std::stod(get("a2", "0.5")));
  if (kind == "expression") {
    Expr exx = Expr::parse(get("gxx", "1"));
    Expr exxi = Expr::parse(get("gxxi", "0"));
    Expr exixi = Expr::parse(get("gxixi", "1"));
    return [exx, exxi, exixi](const VecR& rho) {
      MatR G(2, 2);
      G(0, 0) = exx(rho[0], rho[1]);
      G(0, 1) = G(1, 0) = exxi(rho[0], rho[1]);
      G(1, 1) = exixi(rho[0], rho[1]);
      return G;
    };
  }
  throw std::invalid_argument("metric field: unknown kind '" + kind + "'");
}

}  // namespace phasecalc
