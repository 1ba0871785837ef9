#pragma once

// Quantum propagation and the transport hierarchy. A generator symbol p is
// quantized once and diagonalized; conjugated symbols come from phase
// rotation in the eigenbasis, so a scan over many times costs two dense
// products per checkpoint. The defect generator (full commutator bracket
// minus the classical bracket) feeds a Strang-split hierarchy of transport
// equations whose levels approximate the expansion of the conjugated symbol,
// and two scan drivers measure how the truncation error decays in hbar.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "classical.hpp"
#include "fit.hpp"
#include "interp.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "moyal.hpp"
#include "quantize.hpp"

namespace phasecalc {

namespace detail {

inline void require_same_grid(const GridSpec& a, const GridSpec& b,
                              const char* who) {
  if (a.L != b.L || a.N != b.N || a.hbar != b.hbar)
    throw std::invalid_argument(std::string(who) +
                                ": symbols live on different grids");
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i + 1] < v[i])) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// propagator e^{-i tau P / hbar}, held as the eigendecomposition of Op(p)

struct Propagator {
  GridSpec grid;
  VecR energies;
  Mat modes;  // columns are the eigenvectors of Op(p)

  Vec phases(double tau) const {
    Vec ph(energies.size());
    for (Eigen::Index j = 0; j < energies.size(); ++j)
      ph[j] = std::exp(cplx(0.0, -tau * energies[j] / grid.hbar));
    return ph;
  }
  Mat matrix(double tau) const {
    return modes * phases(tau).asDiagonal() * modes.adjoint();
  }
  Vec apply(double tau, const Vec& u) const {
    if (u.size() != modes.rows())
      throw std::invalid_argument("Propagator::apply: state length mismatch");
    Vec c = modes.adjoint() * u;
    c = phases(tau).cwiseProduct(c);
    return modes * c;
  }
};

inline Propagator schrodinger_propagator(const SymbolGrid& p) {
  Mat P = weyl_quantize(p);
  double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  double defect = (P - P.adjoint()).cwiseAbs().maxCoeff() / scale;
  if (defect > 1e-10)
    throw std::domain_error(
        "schrodinger_propagator: operator Hermiticity defect " + g17(defect) +
        " exceeds 1e-10; window the generator symbol");
  Eigh e = eigh(P);
  return Propagator{p.grid, std::move(e.w), std::move(e.V)};
}

// caches W = V^dag Op(a) V so each conjugation time costs two dense products
struct HeisenbergEvolution {
  const Propagator& prop;
  Mat W;

  HeisenbergEvolution(const Propagator& u, Mat observable)
      : prop(u), W(u.modes.adjoint() * observable * u.modes) {}
  HeisenbergEvolution(const Propagator& u, const SymbolGrid& a) : prop(u) {
    detail::require_same_grid(u.grid, a.grid, "HeisenbergEvolution");
    Mat M = weyl_quantize(a);
    W = u.modes.adjoint() * M * u.modes;
  }

  // U(tau)^dag Op(a) U(tau)
  Mat conjugated(double tau) const {
    const VecR& E = prop.energies;
    const Eigen::Index n = E.size();
    Mat Phi(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j)
        Phi(j, k) =
            std::exp(cplx(0.0, tau * (E[j] - E[k]) / prop.grid.hbar)) * W(j, k);
    return prop.modes * Phi * prop.modes.adjoint();
  }
  SymbolGrid symbol(double tau) const {
    return weyl_symbol(prop.grid, conjugated(tau));
  }
};

inline SymbolGrid conjugated_symbol(const Propagator& u, const SymbolGrid& a,
                                    double tau) {
  HeisenbergEvolution h(u, a);
  SymbolGrid out = h.symbol(tau);
  out.warnings = a.warnings;
  return out;
}

inline SymbolGrid conjugated_symbol(const SymbolGrid& p, const SymbolGrid& a,
                                    double tau) {
  detail::require_same_grid(p.grid, a.grid, "conjugated_symbol");
  return conjugated_symbol(schrodinger_propagator(p), a, tau);
}

// ---------------------------------------------------------------------------
// defect generator: full commutator bracket minus the classical bracket

enum class Hp3Mode { exact, series };

struct Hp3Operator {
  SymbolGrid p;
  Hp3Mode mode = Hp3Mode::exact;
  Mat Mp;  // quantization of p, kept for exact mode
};

inline Hp3Operator make_hp3_operator(const SymbolGrid& p,
                                     Hp3Mode mode = Hp3Mode::exact) {
  Hp3Operator op;
  op.p = p;
  op.mode = mode;
  if (mode == Hp3Mode::exact) op.Mp = weyl_quantize(p);
  return op;
}

inline SymbolGrid hp3_apply(const Hp3Operator& op, const SymbolGrid& c) {
  detail::require_same_grid(op.p.grid, c.grid, "hp3_apply");
  const GridSpec& g = c.grid;
  SymbolGrid out(g, Arr(2 * g.N, g.N));
  if (op.mode == Hp3Mode::exact) {
    Mat Mc = weyl_quantize(c);
    SymbolGrid comm = weyl_symbol(g, (op.Mp * Mc - Mc * op.Mp).eval());
    out.values = cplx(0.0, 1.0 / g.hbar) * comm.values -
                 poisson_bracket(op.p, c).values;
  } else {
    out.values =
        cplx(0.0, 2.0 / g.hbar) *
        (moyal_term(3, op.p, c).values + moyal_term(5, op.p, c).values);
  }
  out.warnings = op.p.warnings;
  out.warnings.insert(out.warnings.end(), c.warnings.begin(),
                      c.warnings.end());
  return out;
}

inline SymbolGrid hp3_apply(const SymbolGrid& p, const SymbolGrid& c,
                            Hp3Mode mode = Hp3Mode::exact) {
  return hp3_apply(make_hp3_operator(p, mode), c);
}

// ---------------------------------------------------------------------------
// semi-Lagrangian transport along a frozen node map

struct NodeMap {
  GridSpec grid;
  ArrR X, Xi;
};

inline NodeMap make_node_map(const GridSpec& g) {
  return NodeMap{g, mesh_x(g), mesh_xi(g)};
}

inline void advance_node_map(const HamiltonianModel& m, NodeMap& map, double t,
                             double dt_target = 2.5e-3,
                             double speed_cap = 0.0) {
  flow_nodes(m, map.X, map.Xi, t, dt_target, speed_cap);
}

// b <- b(map(.)) by oversampled Lagrange interpolation (periodic wrap)
inline SymbolGrid transport_apply(const SymbolGrid& b, const NodeMap& map,
                                  int oversample = 4) {
  detail::require_same_grid(b.grid, map.grid, "transport_apply");
  SymbolGrid out(b.grid, Arr(2 * b.grid.N, b.grid.N));
  out.warnings = b.warnings;
  SymbolInterp itp(b, oversample);
  for (int k = 0; k < b.grid.N; ++k)
    for (int h = 0; h < 2 * b.grid.N; ++h)
      out.values(h, k) = itp(map.X(h, k), map.Xi(h, k));
  return out;
}

// ---------------------------------------------------------------------------
// transport hierarchy with defect sources, integrated by Strang splitting

struct DysonOptions {
  double dtau = 0.01;            // splitting step
  Hp3Mode mode = Hp3Mode::exact;
  int oversample = 4;
  double flow_dt = 2.5e-3;       // RK4 step building the half-step node map
  double speed_cap = 0.0;
};

struct DysonState {
  GridSpec grid;
  double tau = 0;
  int j0 = 0;
  std::vector<SymbolGrid> levels;  // levels[j] approximates the j-th term

  SymbolGrid sum() const {
    SymbolGrid s = levels.at(0);
    for (size_t j = 1; j < levels.size(); ++j) s.values += levels[j].values;
    return s;
  }
};

// d/dtau b_j = {p, b_j} + (defect generator) b_{j-1}, b_0(0) = a, b_j(0) = 0.
// Each step transports every level a half step along the flow, applies the
// exact exponential of the nilpotent source ladder, then transports the
// second half step.
inline DysonState dyson_hierarchy(const HamiltonianModel& m,
                                  const SymbolGrid& p, const SymbolGrid& a,
                                  double tau, int j0,
                                  const DysonOptions& opt = {}) {
  if (j0 < 0 || j0 > 3)
    throw std::invalid_argument(
        "dyson_hierarchy: level count j0 must be in [0, 3]");
  detail::require_same_grid(p.grid, a.grid, "dyson_hierarchy");
  DysonState st;
  st.grid = a.grid;
  st.j0 = j0;
  st.levels.assign(j0 + 1,
                   SymbolGrid(a.grid, Arr::Zero(2 * a.grid.N, a.grid.N)));
  st.levels[0].values = a.values;
  if (tau == 0.0) return st;
  int nsteps =
      std::max(1, static_cast<int>(std::ceil(std::abs(tau) / opt.dtau)));
  double dt = tau / nsteps;
  NodeMap half = make_node_map(a.grid);
  advance_node_map(m, half, 0.5 * dt, opt.flow_dt, opt.speed_cap);
  Hp3Operator gen;
  if (j0 > 0) gen = make_hp3_operator(p, opt.mode);
  for (int n = 0; n < nsteps; ++n) {
    for (auto& b : st.levels) b = transport_apply(b, half, opt.oversample);
    if (j0 > 0) {
      std::vector<SymbolGrid> powers = st.levels;
      double fac = 1.0;
      for (int mo = 1; mo <= j0; ++mo) {
        fac *= dt / mo;
        for (int j = 0; j + mo <= j0; ++j) {
          powers[j] = hp3_apply(gen, powers[j]);
          st.levels[j + mo].values += fac * powers[j].values;
        }
      }
    }
    for (auto& b : st.levels) b = transport_apply(b, half, opt.oversample);
    st.tau = dt * (n + 1);
    for (int j = 0; j <= j0; ++j)
      if (!st.levels[j].values.allFinite())
        throw divergence_error("dyson_hierarchy: level " + std::to_string(j) +
                                   " lost finiteness at tau " + g17(st.tau),
                               VecR::Zero(2), st.tau, n + 1);
  }
  return st;
}

// ---------------------------------------------------------------------------
// residual scans across hbar

// one scan instance: grid, classical flow, generator and observable symbols,
// and (for node-evaluated scans) the observable in closed form
struct EgorovProblem {
  GridSpec grid;
  HamiltonianModel model;
  SymbolGrid p;
  SymbolGrid a;
  std::function<double(double, double)> a_eval;
};

using EgorovFactory = std::function<EgorovProblem(double)>;

// measured sup of the defect against the remainder-class gauge
// (hbar e^{2 Lambda |tau|})^{2(j0+1)}; informational, the L2 column decides
inline double weighted_sup(const Arr& r, double hbar, double tau, int j0,
                           double lambda_hat) {
  double gauge =
      std::pow(hbar * std::exp(2 * lambda_hat * std::abs(tau)), 2 * (j0 + 1));
  return r.abs().maxCoeff() / gauge;
}

struct EgorovRow {
  double hbar = 0, tau = 0;
  int j0 = 0;
  double residual_l2 = 0, residual_wsup = 0, envelope = 0;
};

struct EgorovTable {
  std::vector<EgorovRow> rows;
  double slope = 0, slope_ci = 0;
  bool reliable = true;
};

struct ResidualScanOptions {
  DysonOptions dyson;
  double lambda_hat = 0.0;  // enters only the informational weighted sup
};

inline EgorovTable egorov_residual(const EgorovFactory& make,
                                   std::vector<double> hbars, double tau,
                                   int j0,
                                   const ResidualScanOptions& opt = {}) {
  if (hbars.size() < 2)
    throw std::invalid_argument(
        "egorov_residual: need at least two hbar samples");
  std::sort(hbars.begin(), hbars.end(), std::greater<double>());
  EgorovTable tab;
  std::vector<double> res;
  for (double hb : hbars) {
    EgorovProblem prob = make(hb);
    detail::require_same_grid(prob.grid, prob.p.grid, "egorov_residual");
    Propagator u = schrodinger_propagator(prob.p);
    SymbolGrid conj = conjugated_symbol(u, prob.a, tau);
    DysonState st =
        dyson_hierarchy(prob.model, prob.p, prob.a, tau, j0, opt.dyson);
    Arr r = conj.values - st.sum().values;
    EgorovRow row;
    row.hbar = hb;
    row.tau = tau;
    row.j0 = j0;
    row.residual_l2 = symbol_l2(prob.grid, r);
    row.residual_wsup = weighted_sup(r, hb, tau, j0, opt.lambda_hat);
    row.envelope = std::pow(hb, 2 * (j0 + 1));
    tab.rows.push_back(row);
    res.push_back(row.residual_l2);
  }
  tab.reliable = detail::strictly_decreasing(res);
  bool positive = std::all_of(res.begin(), res.end(),
                              [](double v) { return v > 0; });
  if (positive) {
    SlopeFit f = fit_loglog(hbars, res);
    tab.slope = f.slope;
    tab.slope_ci = 2 * f.slope_stderr;
  } else {
    tab.reliable = false;
  }
  return tab;
}

inline std::string egorov_scan_csv(const EgorovTable& t) {
  std::string s =
      "hbar,tau,j0,residual_l2,residual_wsup,envelope,slope_fit,slope_ci\n";
  for (const EgorovRow& r : t.rows)
    s += g17(r.hbar) + "," + g17(r.tau) + "," + std::to_string(r.j0) + "," +
         g17(r.residual_l2) + "," + g17(r.residual_wsup) + "," +
         g17(r.envelope) + "," + g17(t.slope) + "," + g17(t.slope_ci) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Ehrenfest-window scan: leading residual against e^{2 Lambda tau} hbar^2

struct EhrenfestRow {
  double hbar = 0, tau = 0;
  double residual_l2 = 0, residual_wsup = 0, envelope = 0, ratio = 0;
};

struct EhrenfestLeg {
  double hbar = 0, tau_max = 0, lambda_hat = 0;
  double slope_full = 0, slope_tail = 0, slope_tail_ci = 0;
  double c_env = 0;  // max residual/envelope ratio within the leg
  std::vector<EhrenfestRow> rows;
};

struct EhrenfestResult {
  std::vector<EhrenfestLeg> legs;
  double C_env = 0;  // single fitted constant across the whole scan
  // adjacent-pair residual ratios at the coarser leg's horizon
  std::vector<double> halving_ratios;
};

struct EhrenfestOptions {
  int ncheck = 12;
  double flow_dt = 2.5e-3;
  double speed_cap = 0.0;
  double burn_in = 0.4;  // tail slope fit keeps tau >= burn_in * tau_max
  int oversample = 4;    // unused by the node-evaluated leading term, kept
                         // for option-struct symmetry with DysonOptions
};

inline EhrenfestResult ehrenfest_scan(const EgorovFactory& make,
                                      std::vector<double> hbars,
                                      double lambda_hat, double c_frac,
                                      const EhrenfestOptions& opt = {}) {
  if (!(c_frac > 0.0) || c_frac > 1.0)
    throw std::invalid_argument(
        "ehrenfest_scan: window fraction must be in (0, 1]");
  if (hbars.empty())
    throw std::invalid_argument("ehrenfest_scan: empty hbar list");
  if (!(lambda_hat > 0))
    throw std::invalid_argument("ehrenfest_scan: growth rate must be positive");
  std::sort(hbars.begin(), hbars.end(), std::greater<double>());
  EhrenfestResult res;
  for (double hb : hbars) {
    EgorovProblem prob = make(hb);
    if (!prob.a_eval)
      throw std::invalid_argument(
          "ehrenfest_scan: problem needs a closed-form observable");
    EhrenfestLeg leg;
    leg.hbar = hb;
    leg.lambda_hat = lambda_hat;
    leg.tau_max = c_frac * std::log(1.0 / hb) / (2 * lambda_hat);
    Propagator u = schrodinger_propagator(prob.p);
    HeisenbergEvolution heis(u, prob.a);
    NodeMap nodes = make_node_map(prob.grid);
    double tprev = 0;
    for (int i = 1; i <= opt.ncheck; ++i) {
      double tc = leg.tau_max * i / opt.ncheck;
      advance_node_map(prob.model, nodes, tc - tprev, opt.flow_dt,
                       opt.speed_cap);
      tprev = tc;
      SymbolGrid conj = heis.symbol(tc);
      Arr r = conj.values;
      for (int k = 0; k < prob.grid.N; ++k)
        for (int h = 0; h < 2 * prob.grid.N; ++h)
          r(h, k) -= prob.a_eval(nodes.X(h, k), nodes.Xi(h, k));
      EhrenfestRow row;
      row.hbar = hb;
      row.tau = tc;
      row.residual_l2 = symbol_l2(prob.grid, r);
      row.residual_wsup = weighted_sup(r, hb, tc, 0, lambda_hat);
      row.envelope = std::exp(2 * lambda_hat * tc) * hb * hb;
      row.ratio = row.residual_l2 / row.envelope;
      leg.c_env = std::max(leg.c_env, row.ratio);
      leg.rows.push_back(row);
    }
    std::vector<double> ta, lr, tat, lrt;
    bool positive = true;
    for (const EhrenfestRow& row : leg.rows) {
      if (!(row.residual_l2 > 0)) {
        positive = false;
        break;
      }
      ta.push_back(row.tau);
      lr.push_back(std::log(row.residual_l2));
      if (row.tau >= opt.burn_in * leg.tau_max) {
        tat.push_back(row.tau);
        lrt.push_back(std::log(row.residual_l2));
      }
    }
    if (positive && ta.size() >= 2) leg.slope_full = fit_line(ta, lr).slope;
    if (positive && tat.size() >= 2) {
      SlopeFit f = fit_line(tat, lrt);
      leg.slope_tail = f.slope;
      leg.slope_tail_ci = 2 * f.slope_stderr;
    }
    res.C_env = std::max(res.C_env, leg.c_env);
    res.legs.push_back(std::move(leg));
  }
  for (size_t i = 0; i + 1 < res.legs.size(); ++i) {
    const EhrenfestLeg& coarse = res.legs[i];
    const EhrenfestLeg& fine = res.legs[i + 1];
    double ts = coarse.tau_max;
    double rc = coarse.rows.back().residual_l2;
    // log-linear interpolation of the finer leg at the shared time
    double rf = 0;
    for (size_t k = 0; k + 1 < fine.rows.size(); ++k) {
      double t0 = fine.rows[k].tau, t1 = fine.rows[k + 1].tau;
      if (ts >= t0 && ts <= t1) {
        double w = (ts - t0) / (t1 - t0);
        rf = std::exp((1 - w) * std::log(fine.rows[k].residual_l2) +
                      w * std::log(fine.rows[k + 1].residual_l2));
        break;
      }
    }
    if (rf > 0 && rc > 0) res.halving_ratios.push_back(rc / rf);
  }
  return res;
}

inline std::string ehrenfest_csv(const EhrenfestResult& res) {
  std::string s =
      "hbar,tau,j0,residual_l2,residual_wsup,envelope,slope_fit,slope_ci\n";
  for (const EhrenfestLeg& leg : res.legs)
    for (const EhrenfestRow& r : leg.rows)
      s += g17(r.hbar) + "," + g17(r.tau) + ",0," + g17(r.residual_l2) + "," +
           g17(r.residual_wsup) + "," + g17(r.envelope) + "," +
           g17(leg.slope_tail) + "," + g17(leg.slope_tail_ci) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// model factories shared by the scans

// dispersion (1 - cos(kappa xi))/kappa^2 on the momentum torus, kappa matched
// to the grid period, plus an x-windowed potential c2 x^2/2 + c4 x^4; the
// dispersion is entire and periodic, so the symbol quantizes without seams
inline HamiltonianModel torus_kinetic_model(const GridSpec& g, double c2,
                                            double c4, double Rw, double sw) {
  const double kap = 2 * pi / g.xi_period();
  auto V = [c2, c4](double u) { return c2 * u * u / 2 + c4 * u * u * u * u; };
  auto V1 = [c2, c4](double u) { return c2 * u + 4 * c4 * u * u * u; };
  auto V2 = [c2, c4](double u) { return c2 + 12 * c4 * u * u; };
  auto V3 = [c4](double u) { return 24 * c4 * u; };
  auto vw1 = [=](double x) {
    return erf_window_d1(x, Rw, sw) * V(x) + erf_window(x, Rw, sw) * V1(x);
  };
  auto vw2 = [=](double x) {
    return erf_window_d2(x, Rw, sw) * V(x) +
           2 * erf_window_d1(x, Rw, sw) * V1(x) + erf_window(x, Rw, sw) * V2(x);
  };
  auto vw3 = [=](double x) {
    return erf_window_d3(x, Rw, sw) * V(x) +
           3 * erf_window_d2(x, Rw, sw) * V1(x) +
           3 * erf_window_d1(x, Rw, sw) * V2(x) + erf_window(x, Rw, sw) * V3(x);
  };
  return make_hamiltonian(
      "torus_kinetic", g.hbar,
      [=](double x, double xi) {
        return (1 - std::cos(kap * xi)) / (kap * kap) +
               erf_window(x, Rw, sw) * V(x);
      },
      [=](double x, double xi) {
        return (VecR(2) << vw1(x), std::sin(kap * xi) / kap).finished();
      },
      [=](double x, double xi) {
        MatR H = MatR::Zero(2, 2);
        H(0, 0) = vw2(x);
        H(1, 1) = std::cos(kap * xi);
        return H;
      },
      [=](double x, double xi) {
        Ten3 T = zero_ten3();
        T[0](0, 0) = vw3(x);
        T[1](1, 1) = -kap * std::sin(kap * xi);
        return T;
      },
      [=](const ArrR& X, const ArrR& Xi, ArrR& px, ArrR& pxi) {
        px.resizeLike(X);
        for (Eigen::Index j = 0; j < X.cols(); ++j)
          for (Eigen::Index i = 0; i < X.rows(); ++i) px(i, j) = vw1(X(i, j));
        pxi = (kap * Xi).sin() / kap;
      });
}

inline SymbolGrid torus_kinetic_symbol(const GridSpec& g, double c2, double c4,
                                       double Rw, double sw) {
  const double kap = 2 * pi / g.xi_period();
  return sample_symbol(g, [=](double x, double xi) {
    return (1 - std::cos(kap * xi)) / (kap * kap) +
           erf_window(x, Rw, sw) * (c2 * x * x / 2 + c4 * x * x * x * x);
  });
}

// true quadratic Hamiltonian inside erf-window plateaus on both axes
inline HamiltonianModel windowed_quadratic_model(double Rx, double sx,
                                                 double Rxi, double sxi,
                                                 double hbar = 1.0) {
  auto f = [](double u, double R, double s) {
    return erf_window(u, R, s) * u * u / 2;
  };
  auto f1 = [](double u, double R, double s) {
    return erf_window_d1(u, R, s) * u * u / 2 + erf_window(u, R, s) * u;
  };
  auto f2 = [](double u, double R, double s) {
    return erf_window_d2(u, R, s) * u * u / 2 +
           2 * erf_window_d1(u, R, s) * u + erf_window(u, R, s);
  };
  auto f3 = [](double u, double R, double s) {
    return erf_window_d3(u, R, s) * u * u / 2 +
           3 * erf_window_d2(u, R, s) * u + 3 * erf_window_d1(u, R, s);
  };
  return make_hamiltonian(
      "windowed_quadratic", hbar,
      [=](double x, double xi) { return f(x, Rx, sx) + f(xi, Rxi, sxi); },
      [=](double x, double xi) {
        return (VecR(2) << f1(x, Rx, sx), f1(xi, Rxi, sxi)).finished();
      },
      [=](double x, double xi) {
        MatR H = MatR::Zero(2, 2);
        H(0, 0) = f2(x, Rx, sx);
        H(1, 1) = f2(xi, Rxi, sxi);
        return H;
      },
      [=](double x, double xi) {
        Ten3 T = zero_ten3();
        T[0](0, 0) = f3(x, Rx, sx);
        T[1](1, 1) = f3(xi, Rxi, sxi);
        return T;
      },
      [=](const ArrR& X, const ArrR& Xi, ArrR& px, ArrR& pxi) {
        px.resizeLike(X);
        pxi.resizeLike(X);
        for (Eigen::Index j = 0; j < X.cols(); ++j)
          for (Eigen::Index i = 0; i < X.rows(); ++i) {
            px(i, j) = f1(X(i, j), Rx, sx);
            pxi(i, j) = f1(Xi(i, j), Rxi, sxi);
          }
      });
}

inline SymbolGrid windowed_quadratic_symbol(const GridSpec& g, double Rx,
                                            double sx, double Rxi,
                                            double sxi) {
  return sample_symbol(g, [=](double x, double xi) {
    return erf_window(x, Rx, sx) * x * x / 2 +
           erf_window(xi, Rxi, sxi) * xi * xi / 2;
  });
}

}  // namespace phasecalc
