#pragma once

// Classical phase-space dynamics: Hamiltonian models with derivative
// closures, adaptive flow integration carrying the variational equations,
// symbol pullback along the flow, and audits of the growth estimates
// (Lyapunov rate, flow expansion, derivative growth, Lipschitz property).

#include <cmath>
#include <optional>
#include <string>
#include <vector>
#include "grid.hpp"
#include "linalg.hpp"
#include "metrics.hpp"
#include "interp.hpp"

namespace phasecalc {

// third-derivative tensor of a scalar: T[i](j, k) = d_i d_j d_k p
using Ten3 = std::array<MatR, 2>;

inline Ten3 zero_ten3() {
  return {MatR::Zero(2, 2), MatR::Zero(2, 2)};
}

// symplectic pairing sigma(u, v) with sigma(H_p, X) = -dp.X
inline double sigma_pair(const VecR& u, const VecR& v) {
  return u[1] * v[0] - u[0] * v[1];
}

struct HamiltonianModel {
  std::string name;
  double hbar = 1.0;
  std::function<double(double, double)> p;
  std::function<VecR(double, double)> grad;   // (d_x p, d_xi p)
  std::function<MatR(double, double)> hess;
  std::function<Ten3(double, double)> third;
  // optional vectorized gradient for whole-grid node flows
  std::function<void(const ArrR&, const ArrR&, ArrR&, ArrR&)> grad_bulk;
};

inline VecR hamiltonian_vector_field(const HamiltonianModel& m, const VecR& rho) {
  VecR g = m.grad(rho[0], rho[1]);
  VecR H(2);
  H << g[1], -g[0];
  return H;
}

// variational matrix A with dJ/dt = A J along the flow
inline MatR linearization(const HamiltonianModel& m, const VecR& rho) {
  MatR P = m.hess(rho[0], rho[1]);
  MatR A(2, 2);
  A << P(0, 1), P(1, 1), -P(0, 0), -P(0, 1);
  return A;
}

namespace detail {

inline void check_derivatives(const HamiltonianModel& m) {
  const double pts[5][2] = {
      {0.3, 0.7}, {-1.1, 0.4}, {0.9, -1.3}, {-0.5, -0.8}, {1.7, 0.2}};
  auto bad = [&](const std::string& what, double x, double xi, double dev) {
    throw std::invalid_argument("model '" + m.name + "': " + what +
                                " disagrees with finite differences of p at (" +
                                std::to_string(x) + ", " + std::to_string(xi) +
                                "), deviation " + std::to_string(dev));
  };
  for (auto& pt : pts) {
    double x = pt[0], xi = pt[1], h = 1e-5;
    VecR g = m.grad(x, xi);
    VecR gfd(2);
    gfd << (m.p(x + h, xi) - m.p(x - h, xi)) / (2 * h),
        (m.p(x, xi + h) - m.p(x, xi - h)) / (2 * h);
    double dev = (g - gfd).cwiseAbs().maxCoeff() / (1 + g.cwiseAbs().maxCoeff());
    if (dev > 5e-6) bad("grad", x, xi, dev);
    MatR H = m.hess(x, xi);
    MatR Hfd(2, 2);
    Hfd.col(0) = (m.grad(x + h, xi) - m.grad(x - h, xi)) / (2 * h);
    Hfd.col(1) = (m.grad(x, xi + h) - m.grad(x, xi - h)) / (2 * h);
    dev = (H - 0.5 * (Hfd + Hfd.transpose())).cwiseAbs().maxCoeff() /
          (1 + H.cwiseAbs().maxCoeff());
    if (dev > 5e-6) bad("hess", x, xi, dev);
    double h3 = 1e-4;
    Ten3 T = m.third(x, xi);
    MatR T0fd = (m.hess(x + h3, xi) - m.hess(x - h3, xi)) / (2 * h3);
    MatR T1fd = (m.hess(x, xi + h3) - m.hess(x, xi - h3)) / (2 * h3);
    dev = std::max((T[0] - T0fd).cwiseAbs().maxCoeff(),
                   (T[1] - T1fd).cwiseAbs().maxCoeff()) /
          (1 + std::max(T[0].cwiseAbs().maxCoeff(), T[1].cwiseAbs().maxCoeff()));
    if (dev > 5e-6) bad("third", x, xi, dev);
    if (m.grad_bulk) {
      ArrR X(1, 1), Xi(1, 1), px, pxi;
      X(0, 0) = x;
      Xi(0, 0) = xi;
      m.grad_bulk(X, Xi, px, pxi);
      dev = std::max(std::abs(px(0, 0) - g[0]), std::abs(pxi(0, 0) - g[1])) /
            (1 + g.cwiseAbs().maxCoeff());
      if (dev > 5e-6) bad("grad_bulk", x, xi, dev);
    }
  }
}

}  // namespace detail

// assembles a model and cross-validates the derivative closures against
// central finite differences of p
inline HamiltonianModel make_hamiltonian(
    std::string name, double hbar, std::function<double(double, double)> p,
    std::function<VecR(double, double)> grad,
    std::function<MatR(double, double)> hess,
    std::function<Ten3(double, double)> third,
    std::function<void(const ArrR&, const ArrR&, ArrR&, ArrR&)> grad_bulk = {}) {
  HamiltonianModel m{std::move(name), hbar,          std::move(p),
                     std::move(grad), std::move(hess), std::move(third),
                     std::move(grad_bulk)};
  detail::check_derivatives(m);
  return m;
}

inline HamiltonianModel harmonic_hamiltonian(double hbar = 1.0) {
  return make_hamiltonian(
      "harmonic", hbar, [](double x, double xi) { return 0.5 * (x * x + xi * xi); },
      [](double x, double xi) { return (VecR(2) << x, xi).finished(); },
      [](double, double) { return MatR::Identity(2, 2).eval(); },
      [](double, double) { return zero_ten3(); },
      [](const ArrR& X, const ArrR& Xi, ArrR& dx, ArrR& dxi) {
        dx = X;
        dxi = Xi;
      });
}

inline HamiltonianModel inverted_hamiltonian(double hbar = 1.0) {
  return make_hamiltonian(
      "inverted", hbar,
      [](double x, double xi) { return 0.5 * (xi * xi - x * x); },
      [](double x, double xi) { return (VecR(2) << -x, xi).finished(); },
      [](double, double) {
        MatR H(2, 2);
        H << -1, 0, 0, 1;
        return H;
      },
      [](double, double) { return zero_ten3(); },
      [](const ArrR& X, const ArrR& Xi, ArrR& dx, ArrR& dxi) {
        dx = -X;
        dxi = Xi;
      });
}

// p = (x^2 + xi^2)/2 + eps x^4
inline HamiltonianModel quartic_hamiltonian(double eps, double hbar = 1.0) {
  return make_hamiltonian(
      "quartic", hbar,
      [eps](double x, double xi) {
        return 0.5 * (x * x + xi * xi) + eps * x * x * x * x;
      },
      [eps](double x, double xi) {
        return (VecR(2) << x + 4 * eps * x * x * x, xi).finished();
      },
      [eps](double x, double) {
        MatR H(2, 2);
        H << 1 + 12 * eps * x * x, 0, 0, 1;
        return H;
      },
      [eps](double x, double) {
        Ten3 T = zero_ten3();
        T[0](0, 0) = 24 * eps * x;
        return T;
      },
      [eps](const ArrR& X, const ArrR& Xi, ArrR& dx, ArrR& dxi) {
        dx = X + 4 * eps * X.cube();
        dxi = Xi;
      });
}

// p = xi X(x) given X and its first three derivatives
inline HamiltonianModel transport_hamiltonian(
    std::function<double(double)> X, std::function<double(double)> X1,
    std::function<double(double)> X2, std::function<double(double)> X3,
    double hbar = 1.0, std::string name = "transport") {
  return make_hamiltonian(
      std::move(name), hbar,
      [X](double x, double xi) { return xi * X(x); },
      [X, X1](double x, double xi) {
        return (VecR(2) << xi * X1(x), X(x)).finished();
      },
      [X1, X2](double x, double xi) {
        MatR H(2, 2);
        H << xi * X2(x), X1(x), X1(x), 0;
        return H;
      },
      [X2, X3](double x, double xi) {
        Ten3 T = zero_ten3();
        T[0](0, 0) = xi * X3(x);
        T[0](0, 1) = T[0](1, 0) = X2(x);
        T[1](0, 0) = X2(x);
        return T;
      },
      [X, X1](const ArrR& Xa, const ArrR& Xia, ArrR& dx, ArrR& dxi) {
        dx.resizeLike(Xa);
        dxi.resizeLike(Xa);
        for (Eigen::Index j = 0; j < Xa.cols(); ++j)
          for (Eigen::Index i = 0; i < Xa.rows(); ++i) {
            dx(i, j) = Xia(i, j) * X1(Xa(i, j));
            dxi(i, j) = X(Xa(i, j));
          }
      });
}

// expression-backed model; all derivatives by nested central differences
inline HamiltonianModel expression_hamiltonian(const std::string& name,
                                               const std::string& ptxt,
                                               double hbar = 1.0) {
  Expr pe = Expr::parse(ptxt);
  auto p = [pe](double x, double xi) { return pe(x, xi); };
  auto grad = [pe](double x, double xi) {
    const double h = 1e-6;
    return (VecR(2) << (pe(x + h, xi) - pe(x - h, xi)) / (2 * h),
            (pe(x, xi + h) - pe(x, xi - h)) / (2 * h))
        .finished();
  };
  auto hess = [pe](double x, double xi) {
    const double h = 1e-4;
    MatR H(2, 2);
    H(0, 0) = (pe(x + h, xi) - 2 * pe(x, xi) + pe(x - h, xi)) / (h * h);
    H(1, 1) = (pe(x, xi + h) - 2 * pe(x, xi) + pe(x, xi - h)) / (h * h);
    H(0, 1) = H(1, 0) = (pe(x + h, xi + h) - pe(x + h, xi - h) -
                         pe(x - h, xi + h) + pe(x - h, xi - h)) /
                        (4 * h * h);
    return H;
  };
  auto third = [hess](double x, double xi) {
    const double h = 1e-3;
    Ten3 T;
    T[0] = (hess(x + h, xi) - hess(x - h, xi)) / (2 * h);
    T[1] = (hess(x, xi + h) - hess(x, xi - h)) / (2 * h);
    return T;
  };
  return HamiltonianModel{name, hbar, p, grad, hess, third, {}};
}

// ---------------------------------------------------------------------------
// flow integration (Dormand-Prince 5(4) with variational equations)

struct divergence_error : std::runtime_error {
  VecR last_state;
  double t_reached;
  int steps;
  divergence_error(const std::string& msg, VecR state, double t, int n)
      : std::runtime_error(msg), last_state(std::move(state)), t_reached(t), steps(n) {}
};

struct FlowResult {
  VecR endpoint;
  MatR jacobian;
  int steps = 0;
  double energy_drift = 0;
};

namespace detail {

using State6 = Eigen::Matrix<double, 6, 1>;

inline State6 flow_rhs(const HamiltonianModel& m, const State6& y) {
  VecR rho = y.head<2>();
  VecR H = hamiltonian_vector_field(m, rho);
  MatR A = linearization(m, rho);
  MatR J(2, 2);
  J << y[2], y[3], y[4], y[5];
  MatR dJ = A * J;
  State6 f;
  f << H[0], H[1], dJ(0, 0), dJ(0, 1), dJ(1, 0), dJ(1, 1);
  return f;
}

}  // namespace detail

inline FlowResult flow(const HamiltonianModel& m, const VecR& rho0, double t,
                       double tol = 1e-10) {
  using detail::State6;
  State6 y;
  y << rho0[0], rho0[1], 1, 0, 0, 1;
  FlowResult out;
  if (t == 0.0) {
    out.endpoint = rho0;
    out.jacobian = MatR::Identity(2, 2);
    return out;
  }
  const double dir = t > 0 ? 1.0 : -1.0;
  const int max_steps = 200000;
  double s = 0, T = std::abs(t);
  double h = std::min(1e-3, T);
  int steps = 0;
  double e0 = m.p(rho0[0], rho0[1]);
  auto diverge = [&](const std::string& why) {
    throw divergence_error("flow('" + m.name + "'): " + why + " at t=" +
                               std::to_string(dir * s) + " after " +
                               std::to_string(steps) + " steps",
                           y.head<2>().eval(), dir * s, steps);
  };
  while (s < T) {
    if (steps++ > max_steps) diverge("step count overflow");
    if (h < 1e-14 * (1 + T)) diverge("step size underflow");
    h = std::min(h, T - s);
    const double hd = dir * h;
    State6 k1 = detail::flow_rhs(m, y);
    State6 k2 = detail::flow_rhs(m, y + hd * (k1 / 5.0));
    State6 k3 = detail::flow_rhs(m, y + hd * (3.0 / 40 * k1 + 9.0 / 40 * k2));
    State6 k4 = detail::flow_rhs(
        m, y + hd * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
    State6 k5 = detail::flow_rhs(
        m, y + hd * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 +
                     64448.0 / 6561 * k3 - 212.0 / 729 * k4));
    State6 k6 = detail::flow_rhs(
        m, y + hd * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 + 46732.0 / 5247 * k3 +
                     49.0 / 176 * k4 - 5103.0 / 18656 * k5));
    State6 y5 = y + hd * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                          2187.0 / 6784 * k5 + 11.0 / 84 * k6);
    State6 k7 = detail::flow_rhs(m, y5);
    State6 y4 = y + hd * (5179.0 / 57600 * k1 + 7571.0 / 16695 * k3 +
                          393.0 / 640 * k4 - 92097.0 / 339200 * k5 +
                          187.0 / 2100 * k6 + 1.0 / 40 * k7);
    double err = 0;
    for (int i = 0; i < 6; ++i) {
      double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      double e = (y5[i] - y4[i]) / sc;
      err += e * e;
    }
    err = std::sqrt(err / 6);
    if (err <= 1.0) {
      y = y5;
      s += h;
      if (!y.allFinite() || y.head<2>().cwiseAbs().maxCoeff() > 1e12)
        diverge("state overflow");
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::min(5.0, std::max(0.2, fac));
  }
  out.endpoint = y.head<2>();
  out.jacobian = MatR(2, 2);
  out.jacobian << y[2], y[3], y[4], y[5];
  out.steps = steps;
  out.energy_drift = std::abs(m.p(y[0], y[1]) - e0);
  return out;
}

// ---------------------------------------------------------------------------
// symbol pullback a -> a(phi^t(.)) on the grid

// flows every grid node with fixed-step RK4 (vectorized when the model
// provides grad_bulk); dt ~ 2.5e-3 keeps the local error near roundoff.
// speed_cap > 0 freezes nodes whose per-step displacement would exceed
// speed_cap*|dt| on either axis, so runaway trajectories near a box edge
// cannot poison the rest of the mesh
inline void flow_nodes(const HamiltonianModel& m, ArrR& X, ArrR& Xi, double t,
                       double dt_target = 2.5e-3, double speed_cap = 0.0) {
  if (t == 0.0) return;
  int nsteps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / dt_target)));
  double dt = t / nsteps;
  ArrR k1x, k1i, k2x, k2i, k3x, k3i, k4x, k4i, tx, ti;
  auto eval = [&](const ArrR& ax, const ArrR& ai, ArrR& dx, ArrR& di) {
    if (m.grad_bulk) {
      ArrR px, pxi;
      m.grad_bulk(ax, ai, px, pxi);
      dx = pxi;
      di = -px;
    } else {
      dx.resizeLike(ax);
      di.resizeLike(ax);
      for (Eigen::Index j = 0; j < ax.cols(); ++j)
        for (Eigen::Index i = 0; i < ax.rows(); ++i) {
          VecR g = m.grad(ax(i, j), ai(i, j));
          dx(i, j) = g[1];
          di(i, j) = -g[0];
        }
    }
  };
  for (int n = 0; n < nsteps; ++n) {
    eval(X, Xi, k1x, k1i);
    tx = X + 0.5 * dt * k1x;
    ti = Xi + 0.5 * dt * k1i;
    eval(tx, ti, k2x, k2i);
    tx = X + 0.5 * dt * k2x;
    ti = Xi + 0.5 * dt * k2i;
    eval(tx, ti, k3x, k3i);
    tx = X + dt * k3x;
    ti = Xi + dt * k3i;
    eval(tx, ti, k4x, k4i);
    ArrR ux = dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    ArrR ui = dt / 6.0 * (k1i + 2 * k2i + 2 * k3i + k4i);
    if (speed_cap > 0) {
      double cap = speed_cap * std::abs(dt);
      auto ok = (ux.abs() < cap) && (ui.abs() < cap);
      ux = ok.select(ux, ArrR::Zero(ux.rows(), ux.cols()));
      ui = ok.select(ui, ArrR::Zero(ui.rows(), ui.cols()));
    }
    X += ux;
    Xi += ui;
  }
}

inline SymbolGrid pullback_symbol(const HamiltonianModel& m, const SymbolGrid& a,
                                  double t, int oversample = 4) {
  SymbolGrid out(a.grid, a.values);
  out.warnings = a.warnings;
  if (t == 0.0) return out;
  double tailfrac = spectral_tail_fraction(a);
  if (tailfrac > 1e-10)
    out.warnings.push_back("pullback: input spectral tail fraction " +
                           std::to_string(tailfrac) + " exceeds 1e-10");
  ArrR X = mesh_x(a.grid), Xi = mesh_xi(a.grid);
  flow_nodes(m, X, Xi, t);
  const double xr = 0.5 * a.grid.L, xir = 0.5 * a.grid.xi_period();
  Eigen::Index outside =
      ((X.abs() > 1.1 * xr) || (Xi.abs() > 1.1 * xir)).count();
  if (outside > 0)
    out.warnings.push_back("pullback: aliasing, " + std::to_string(outside) +
                           " flowed nodes left the box guard margin");
  SymbolInterp itp(a, oversample);
  for (int k = 0; k < a.grid.N; ++k)
    for (int h = 0; h < 2 * a.grid.N; ++h)
      out.values(h, k) = itp(X(h, k), Xi(h, k));
  return out;
}

// ---------------------------------------------------------------------------
// growth-estimate audits

namespace detail {

// sup over directions of a smooth angle functional (parabolic refinement);
// symmetric tensors attain their norm on the diagonal, so one angle suffices
template <class F>
double sup_angle_scan(const F& f, int n = 512) {
  std::vector<double> v(n);
  int bi = 0;
  for (int i = 0; i < n; ++i) {
    v[i] = f(pi * i / n);
    if (v[i] > v[bi]) bi = i;
  }
  double vm = v[(bi + n - 1) % n], v0 = v[bi], vp = v[(bi + 1) % n];
  double denom = vm - 2 * v0 + vp;
  if (std::abs(denom) < 1e-300) return v0;
  double delta = 0.5 * (vm - vp) / denom;
  double refined = f(pi * (bi + delta) / n);
  return std::max(v0, refined);
}

// g-norm of nabla^k H_p at rho (k inputs, one output), k <= 3
inline double hp_derivative_gnorm(const HamiltonianModel& m, const VecR& rho,
                                  int k, const MatR& G) {
  MatR J(2, 2);
  J << 0, 1, -1, 0;
  if (k == 0) return vec_g_norm(hamiltonian_vector_field(m, rho), G);
  if (k == 1) {
    MatR A = J * m.hess(rho[0], rho[1]);
    return op_g_norm2(A, G, G);
  }
  MatR Gih = spd_inv_sqrt(G);
  if (k == 2) {
    Ten3 T = m.third(rho[0], rho[1]);
    return sup_angle_scan([&](double th) {
      VecR X = Gih * (VecR(2) << std::cos(th), std::sin(th)).finished();
      VecR w(2);
      w << X.dot(T[0] * X), X.dot(T[1] * X);
      return vec_g_norm(J * w, G);
    });
  }
  // k == 3: fourth derivatives of p by finite differences of the third tensor
  const double h = 1e-4;
  std::array<Ten3, 2> F4;
  for (int l = 0; l < 2; ++l) {
    VecR rp = rho, rm = rho;
    rp[l] += h;
    rm[l] -= h;
    Ten3 Tp = m.third(rp[0], rp[1]), Tm = m.third(rm[0], rm[1]);
    F4[l][0] = (Tp[0] - Tm[0]) / (2 * h);
    F4[l][1] = (Tp[1] - Tm[1]) / (2 * h);
  }
  return sup_angle_scan([&](double th) {
    VecR X = Gih * (VecR(2) << std::cos(th), std::sin(th)).finished();
    VecR w = VecR::Zero(2);
    for (int l = 0; l < 2; ++l)
      for (int b = 0; b < 2; ++b) w[b] += X[l] * X.dot(F4[l][b] * X);
    return vec_g_norm(J * w, G);
  });
}

// |nabla^3 p|_g as a covariant symmetric 3-tensor
inline double third_gnorm(const HamiltonianModel& m, const VecR& rho, const MatR& G) {
  Ten3 T = m.third(rho[0], rho[1]);
  MatR Gih = spd_inv_sqrt(G);
  return sup_angle_scan([&](double th) {
    VecR X = Gih * (VecR(2) << std::cos(th), std::sin(th)).finished();
    return std::abs(X[0] * X.dot(T[0] * X) + X[1] * X.dot(T[1] * X));
  });
}

}  // namespace detail

// uniform phase-space sample lattice for audits
inline std::vector<VecR> sample_box(double x0, double x1, int nx, double xi0,
                                    double xi1, int nxi) {
  if (nx < 1 || nxi < 1)
    throw std::invalid_argument("sample_box: counts must be positive");
  std::vector<VecR> pts;
  pts.reserve(static_cast<size_t>(nx) * nxi);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nxi; ++j) {
      double x = nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1);
      double xi = nxi == 1 ? xi0 : xi0 + (xi1 - xi0) * j / (nxi - 1);
      pts.push_back((VecR(2) << x, xi).finished());
    }
  return pts;
}

struct LyapunovEstimate {
  double Lambda_hat = 0;   // (1/2) max_samples |L_{H_p} g|_g
  double upper_bound = 0;  // max_samples (h_g |nabla^2 p|_g + |nabla_{H_p} g|_g / 2)
};

inline MatR metric_flow_derivative(const MetricField& field, const VecR& rho,
                                   const VecR& H) {
  double scale = std::max(1.0, H.norm());
  double eps = 1e-6 / scale;
  return (MatR(field(rho + eps * H)) - MatR(field(rho - eps * H))) / (2 * eps);
}

inline LyapunovEstimate lyapunov_bound(const HamiltonianModel& m,
                                       const MetricField& field,
                                       const std::vector<VecR>& samples) {
  LyapunovEstimate est;
  for (const VecR& rho : samples) {
    MatR G = field(rho);
    require_spd(G, "lyapunov_bound");
    VecR H = hamiltonian_vector_field(m, rho);
    MatR DH = linearization(m, rho);
    MatR dG = metric_flow_derivative(field, rho, H);
    MatR S = G * DH + DH.transpose() * G + dG;
    est.Lambda_hat = std::max(est.Lambda_hat, 0.5 * g_op_norm(S, G));
    double h = gain(G);
    MatR Gih = spd_inv_sqrt(G);
    double hess_g = g_op_norm(m.hess(rho[0], rho[1]), G);
    (void)Gih;
    est.upper_bound =
        std::max(est.upper_bound, h * hess_g + 0.5 * g_op_norm(dG, G));
  }
  return est;
}

struct AuditRow {
  double rho_x, rho_xi, t, measured, bound, margin;
};

struct FlowExpansionAudit {
  double Lambda_hat = 0;
  std::vector<AuditRow> rows;
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

// checks |dphi^t|_g <= e^{Lambda_hat |t|} (1 + eps_audit + tol) from each
// start point; starts default to the Lyapunov sample set
inline FlowExpansionAudit flow_expansion_audit(const HamiltonianModel& m,
                                               const MetricField& field,
                                               const std::vector<VecR>& samples,
                                               const std::vector<double>& times,
                                               double tol = 1e-10,
                                               std::vector<VecR> starts = {}) {
  FlowExpansionAudit audit;
  audit.Lambda_hat = lyapunov_bound(m, field, samples).Lambda_hat;
  if (starts.empty()) starts = samples;
  const double slack = 1 + 1e-6 + tol;
  for (const VecR& rho : starts)
    for (double t : times) {
      FlowResult fr = flow(m, rho, t, tol);
      double measured = op_g_norm2(fr.jacobian, field(fr.endpoint), field(rho));
      double bound = std::exp(audit.Lambda_hat * std::abs(t));
      AuditRow row{rho[0], rho[1], t, measured, bound, bound * slack - measured};
      audit.rows.push_back(row);
      if (row.margin < 0)
        audit.failures.push_back(
            "expansion bound violated at rho=(" + std::to_string(rho[0]) + ", " +
            std::to_string(rho[1]) + "), t=" + std::to_string(t) + ": measured " +
            std::to_string(measured) + " > bound " + std::to_string(bound));
    }
  return audit;
}

enum class AuditStatus { pass, fail, inconclusive };

inline AuditStatus classify_derivative_audit(double measured, double bound_total,
                                             double noise_floor,
                                             double consistency) {
  if (measured <= bound_total * (1 + 1e-6)) return AuditStatus::pass;
  if (consistency > 0.5 || measured <= 10 * noise_floor)
    return AuditStatus::inconclusive;
  return AuditStatus::fail;
}

struct DerivativeGrowthAudit {
  int k = 2;
  double t = 0;
  double measured = 0;     // (1/k!) |nabla^k phi^t|_g by finite differences
  double bound = 0;        // sampled growth bound, C = 1
  double noise_floor = 0;  // finite-difference noise allowance
  double bound_total = 0;  // bound + 10 * noise_floor
  double consistency = 0;  // relative deviation between steps h and h/2
  AuditStatus status = AuditStatus::pass;
};

inline DerivativeGrowthAudit derivative_growth_audit(
    const HamiltonianModel& m, const MetricField& field,
    const std::vector<VecR>& samples, const VecR& rho, double t, int k,
    double tol = 1e-10) {
  if (k != 2 && k != 3)
    throw std::invalid_argument("derivative_growth_audit: k must be 2 or 3");
  DerivativeGrowthAudit audit;
  audit.k = k;
  audit.t = t;
  double Lambda = lyapunov_bound(m, field, samples).Lambda_hat;

  double sup_h2 = 0, sup_h3 = 0;
  for (const VecR& s : samples) {
    MatR G = field(s);
    sup_h2 = std::max(sup_h2, detail::hp_derivative_gnorm(m, s, 2, G));
    if (k == 3) sup_h3 = std::max(sup_h3, detail::hp_derivative_gnorm(m, s, 3, G));
  }
  const double growth = std::exp(Lambda * std::abs(t));
  const double L = std::max(Lambda, 1e-12);
  if (k == 2) {
    audit.bound = 2.0 * growth * growth * (sup_h2 > 0 ? sup_h2 / (2 * L) : 0.0);
  } else {
    double term1 = sup_h3 > 0 ? sup_h3 / (2 * L) : 0.0;
    double term2 = sup_h2 > 0 ? sup_h2 * sup_h2 / (4 * L * L) : 0.0;
    audit.bound = 9.0 * growth * growth * growth * std::max(term1, term2);
  }

  MatR Gin = field(rho);
  MatR Gin_ih = spd_inv_sqrt(Gin);
  VecR base = flow(m, rho, t, tol).endpoint;
  MatR Gout = field(base);
  MatR Gout_h = spd_sqrt(Gout);
  const double h_fd = std::pow(tol, 1.0 / (k + 1));
  auto measure = [&](double h) {
    auto phi = [&](const VecR& q) { return flow(m, q, t, tol).endpoint; };
    return detail::sup_angle_scan(
        [&](double th) {
          VecR X = Gin_ih * (VecR(2) << std::cos(th), std::sin(th)).finished();
          VecR D;
          if (k == 2) {
            D = (phi(rho + h * X) - 2 * base + phi(rho - h * X)) / (h * h);
            return (Gout_h * D).norm() / 2.0;
          }
          D = (phi(rho + 2 * h * X) - 2 * phi(rho + h * X) +
               2 * phi(rho - h * X) - phi(rho - 2 * h * X)) /
              (2 * h * h * h);
          return (Gout_h * D).norm() / 6.0;
        },
        48);
  };
  double m1 = measure(h_fd), m2 = measure(h_fd / 2);
  audit.measured = m1;
  audit.consistency = std::abs(m1 - m2) / std::max(m1, 1e-300);
  const double ck = k == 2 ? 4.0 : 3.0;
  audit.noise_floor = ck * tol * std::max(1.0, growth) / std::pow(h_fd, k);
  audit.bound_total = audit.bound + 10 * audit.noise_floor;
  audit.status = classify_derivative_audit(audit.measured, audit.bound_total,
                                           audit.noise_floor, audit.consistency);
  return audit;
}

struct LipschitzConstants {
  double Lambda_hat = 0;
  double C_g = 1;     // slow-variation constant at radius r_g
  double C_p = 0;     // sup of h_g |nabla^3 p|_g / hbar_g
  double hbar_g = 0;  // sup of the gain over the samples
  double r_g = 0;     // audited slow-variation radius
  double rate() const { return Lambda_hat + C_g * C_g * C_g * C_p * hbar_g; }
};

inline LipschitzConstants lipschitz_constants(const HamiltonianModel& m,
                                              const MetricField& field,
                                              const std::vector<VecR>& samples,
                                              double r_g) {
  LipschitzConstants c;
  c.r_g = r_g;
  c.Lambda_hat = lyapunov_bound(m, field, samples).Lambda_hat;
  auto rep = admissibility_report(field, samples, r_g);
  c.C_g = rep.slow_variation_C;
  c.hbar_g = rep.sup_gain;
  double sup = 0;
  for (const VecR& s : samples) {
    MatR G = field(s);
    sup = std::max(sup, gain(G) * detail::third_gnorm(m, s, G));
  }
  c.C_p = c.hbar_g > 0 ? sup / c.hbar_g : 0.0;
  return c;
}

struct LipschitzAudit {
  double max_ratio = 0;  // worst displacement amplification over the sphere
  double bound = 1;      // e^{rate |t|}
  double margin = 0;     // (bound * slack - max_ratio) / bound
};

inline LipschitzAudit flow_lipschitz_audit(const HamiltonianModel& m,
                                           const MetricField& field,
                                           const VecR& rho0, double r, double t,
                                           const LipschitzConstants& c,
                                           double tol = 1e-10, int nsphere = 24) {
  double window = c.r_g * std::exp(-c.rate() * std::abs(t));
  if (r > window * (1 + 1e-12))
    throw std::invalid_argument(
        "flow_lipschitz_audit: time window violated, need r <= r_g "
        "e^{-(Lambda + Cg^3 Cp hbar_g)|t|} = " +
        std::to_string(window) + ", got r = " + std::to_string(r));
  MatR G0 = field(rho0);
  MatR G0_ih = spd_inv_sqrt(G0);
  FlowResult fr0 = flow(m, rho0, t, tol);
  MatR Gt = field(fr0.endpoint);
  LipschitzAudit audit;
  audit.bound = std::exp(c.rate() * std::abs(t));
  for (int i = 0; i < nsphere; ++i) {
    double th = 2 * pi * i / nsphere;
    VecR rho = rho0 + r * (G0_ih * (VecR(2) << std::cos(th), std::sin(th)).finished());
    double d0 = vec_g_norm(rho - rho0, G0);
    FlowResult fr = flow(m, rho, t, tol);
    double dt_ = vec_g_norm(fr.endpoint - fr0.endpoint, Gt);
    audit.max_ratio = std::max(audit.max_ratio, dt_ / d0);
  }
  audit.margin = (audit.bound * (1 + 1e-6 + tol) - audit.max_ratio) / audit.bound;
  return audit;
}

inline std::string flow_audit_csv(const std::vector<AuditRow>& rows) {
  std::string out = "rho_x,rho_xi,t,measured,bound,margin\n";
  char buf[160];
  for (const AuditRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.rho_x,
                  r.rho_xi, r.t, r.measured, r.bound, r.margin);
    out += buf;
  }
  return out;
}

}  // namespace phasecalc
