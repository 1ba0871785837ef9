#include <catch2/catch_amalgamated.hpp>
#include "phasecalc/classical.hpp"

using namespace phasecalc;
using Catch::Matchers::ContainsSubstring;

namespace {

VecR pt(double x, double xi) { return (VecR(2) << x, xi).finished(); }

HamiltonianModel transport_sine(double L = 12.0) {
  double w = 2 * pi / L;
  return transport_hamiltonian(
      [w](double x) { return 1 + 0.3 * std::sin(w * x); },
      [w](double x) { return 0.3 * w * std::cos(w * x); },
      [w](double x) { return -0.3 * w * w * std::sin(w * x); },
      [w](double x) { return -0.3 * w * w * w * std::cos(w * x); });
}

HamiltonianModel bracket_hamiltonian() {
  return make_hamiltonian(
      "bracket", 1.0, [](double, double xi) { return std::sqrt(1 + xi * xi); },
      [](double, double xi) {
        return pt(0.0, xi / std::sqrt(1 + xi * xi));
      },
      [](double, double xi) {
        MatR H = MatR::Zero(2, 2);
        H(1, 1) = std::pow(1 + xi * xi, -1.5);
        return H;
      },
      [](double, double xi) {
        Ten3 T = zero_ten3();
        T[1](1, 1) = -3 * xi * std::pow(1 + xi * xi, -2.5);
        return T;
      });
}

std::vector<VecR> grid_samples(double half_x, double half_xi, int n) {
  std::vector<VecR> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.push_back(pt(-half_x + 2 * half_x * i / (n - 1),
                       -half_xi + 2 * half_xi * j / (n - 1)));
  return out;
}

}  // namespace

TEST_CASE("hamiltonian vector field closed forms and pairing") {
  auto harm = harmonic_hamiltonian();
  REQUIRE((hamiltonian_vector_field(harm, pt(1, 0)) - pt(0, -1)).norm() < 1e-14);

  auto unit = transport_hamiltonian([](double) { return 1.0; },
                                    [](double) { return 0.0; },
                                    [](double) { return 0.0; },
                                    [](double) { return 0.0; });
  REQUIRE((hamiltonian_vector_field(unit, pt(0.4, -2.0)) - pt(1, 0)).norm() < 1e-14);

  auto br = bracket_hamiltonian();
  double xi0 = 0.7;
  REQUIRE((hamiltonian_vector_field(br, pt(0, xi0)) -
           pt(xi0 / std::sqrt(1 + xi0 * xi0), 0))
              .norm() < 1e-14);

  Rng rng(11);
  auto quart = quartic_hamiltonian(0.1);
  for (int i = 0; i < 20; ++i) {
    VecR rho = pt(rng.normal(), rng.normal());
    VecR X = pt(rng.normal(), rng.normal());
    VecR H = hamiltonian_vector_field(quart, rho);
    double resid = sigma_pair(H, X) + quart.grad(rho[0], rho[1]).dot(X);
    REQUIRE(std::abs(resid) < 1e-10);
  }
}

TEST_CASE("model derivative cross-validation rejects a wrong closure") {
  REQUIRE_THROWS_WITH(
      make_hamiltonian(
          "broken", 1.0, [](double x, double xi) { return 0.5 * (x * x + xi * xi); },
          [](double x, double xi) { return pt(-x, xi); },
          [](double, double) { return MatR::Identity(2, 2).eval(); },
          [](double, double) { return zero_ten3(); }),
      ContainsSubstring("grad"));
}

TEST_CASE("flow closed forms") {
  SECTION("harmonic rotation") {
    auto m = harmonic_hamiltonian();
    FlowResult fr = flow(m, pt(1, 0), pi / 2, 1e-11);
    REQUIRE((fr.endpoint - pt(0, -1)).norm() < 1e-9);
    MatR R(2, 2);
    R << std::cos(pi / 2), std::sin(pi / 2), -std::sin(pi / 2), std::cos(pi / 2);
    REQUIRE((fr.jacobian - R).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE(fr.energy_drift < 1e-9);
  }
  SECTION("inverted oscillator matrix exponential") {
    auto m = inverted_hamiltonian();
    double t = 1.0;
    FlowResult fr = flow(m, pt(1, 1), t, 1e-11);
    REQUIRE((fr.endpoint - std::exp(t) * pt(1, 1)).norm() < 1e-8 * std::exp(t));
    MatR E(2, 2);
    E << std::cosh(t), std::sinh(t), std::sinh(t), std::cosh(t);
    REQUIRE((fr.jacobian - E).cwiseAbs().maxCoeff() < 1e-8);
  }
  SECTION("transport characteristics") {
    auto m = transport_hamiltonian([](double x) { return x; },
                                   [](double) { return 1.0; },
                                   [](double) { return 0.0; },
                                   [](double) { return 0.0; });
    double t = 0.8;
    FlowResult fr = flow(m, pt(0.5, 2.0), t, 1e-11);
    REQUIRE(fr.endpoint[0] == Catch::Approx(0.5 * std::exp(t)).epsilon(1e-9));
    REQUIRE(fr.endpoint[1] == Catch::Approx(2.0 * std::exp(-t)).epsilon(1e-9));

    auto ms = transport_sine();
    FlowResult frs = flow(ms, pt(0.3, 1.0), t, 1e-11);
    double x = 0.3;
    int nsub = 80000;
    double w = 2 * pi / 12.0;
    auto Xf = [&](double u) { return 1 + 0.3 * std::sin(w * u); };
    double dt = t / nsub;
    for (int i = 0; i < nsub; ++i) {
      double k1 = Xf(x), k2 = Xf(x + 0.5 * dt * k1), k3 = Xf(x + 0.5 * dt * k2),
             k4 = Xf(x + dt * k3);
      x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    REQUIRE(frs.endpoint[0] == Catch::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("flow group law, reversibility, symplecticity, volume") {
  std::vector<HamiltonianModel> models;
  models.push_back(harmonic_hamiltonian());
  models.push_back(inverted_hamiltonian());
  models.push_back(quartic_hamiltonian(0.1));
  models.push_back(transport_sine());
  MatR Js = standard_J(2);
  for (const auto& m : models) {
    VecR rho = pt(1.1, -0.4);
    double tol = 1e-10;
    FlowResult a = flow(m, rho, 0.8, tol);
    FlowResult b = flow(m, a.endpoint, 0.5, tol);
    FlowResult c = flow(m, rho, 1.3, tol);
    REQUIRE((b.endpoint - c.endpoint).norm() < 10 * tol);
    FlowResult back = flow(m, a.endpoint, -0.8, tol);
    REQUIRE((back.endpoint - rho).norm() < 10 * tol);
    for (double t : {0.1, 1.0, pi}) {
      FlowResult fr = flow(m, rho, t, tol);
      MatR defect = fr.jacobian.transpose() * Js * fr.jacobian - Js;
      REQUIRE(defect.cwiseAbs().maxCoeff() < 1e-8);
      REQUIRE(std::abs(fr.jacobian.determinant() - 1) < 1e-8);
      REQUIRE(fr.energy_drift < 1e-7);
    }
  }
}

TEST_CASE("flow blowup raises divergence with last state") {
  auto m = make_hamiltonian(
      "blowup", 1.0,
      [](double x, double xi) { return 0.5 * xi * xi - 0.25 * x * x * x * x; },
      [](double x, double xi) { return pt(-x * x * x, xi); },
      [](double x, double) {
        MatR H(2, 2);
        H << -3 * x * x, 0, 0, 1;
        return H;
      },
      [](double x, double) {
        Ten3 T = zero_ten3();
        T[0](0, 0) = -6 * x;
        return T;
      });
  try {
    flow(m, pt(2, 0), 3.0, 1e-10);
    FAIL("expected divergence_error");
  } catch (const divergence_error& e) {
    REQUIRE(e.t_reached < 3.0);
    REQUIRE(e.t_reached > 0.0);
    REQUIRE(std::abs(e.last_state[0]) > 100.0);
  }
}

TEST_CASE("pullback of symbols along the flow") {
  SECTION("t = 0 is the identity") {
    GridSpec g{12.0, 65, 0.5};
    SymbolGrid a = sample_symbol(g, [](double x, double xi) {
      return std::exp(-(x * x + xi * xi));
    });
    SymbolGrid b = pullback_symbol(harmonic_hamiltonian(), a, 0.0);
    REQUIRE((b.values - a.values).abs().maxCoeff() == 0.0);
  }
  SECTION("harmonic rotation of a gaussian bump") {
    // square phase box (xi period = L) so the rotation wraps no bump image
    GridSpec g{std::sqrt(pi * 129), 129, 0.5};
    auto f = [](double x, double xi) {
      return std::exp(-((x - 1) * (x - 1) + xi * xi));
    };
    SymbolGrid a = sample_symbol(g, f);
    double t = 1.0;
    SymbolGrid b = pullback_symbol(harmonic_hamiltonian(), a, t);
    SymbolGrid oracle = sample_symbol(g, [&](double x, double xi) {
      double xt = x * std::cos(t) + xi * std::sin(t);
      double xit = -x * std::sin(t) + xi * std::cos(t);
      return f(wrap_per(xt, g.L), wrap_per(xit, g.xi_period()));
    });
    REQUIRE((b.values - oracle.values).abs().maxCoeff() < 1e-6);
    REQUIRE(std::abs(symbol_l2(g, b.values) - symbol_l2(g, a.values)) <
            1e-8 * symbol_l2(g, a.values));
  }
  SECTION("quartic pullback against per-node integration") {
    GridSpec g{14.0, 129, 0.5};
    auto m = quartic_hamiltonian(0.1);
    auto f = [](double x, double xi) {
      return std::exp(-((x - 0.5) * (x - 0.5) + (xi + 0.3) * (xi + 0.3)) / 0.64);
    };
    SymbolGrid a = sample_symbol(g, f);
    double t = 0.7;
    SymbolGrid b = pullback_symbol(m, a, t);
    double werr = 0;
    for (int k = 5; k < g.N; k += 17)
      for (int h = 3; h < 2 * g.N; h += 29) {
        FlowResult fr = flow(m, pt(g.xh(h), g.xi(k)), t, 1e-12);
        werr = std::max(werr,
                        std::abs(b.values(h, k) - f(fr.endpoint[0], fr.endpoint[1])));
      }
    REQUIRE(werr < 1e-6);
  }
  SECTION("fast drift trips the aliasing guard") {
    GridSpec g{12.0, 65, 0.5};
    auto m = transport_hamiltonian([](double x) { return x; },
                                   [](double) { return 1.0; },
                                   [](double) { return 0.0; },
                                   [](double) { return 0.0; });
    SymbolGrid a = sample_symbol(g, [](double x, double xi) {
      return std::exp(-(x * x + xi * xi));
    });
    SymbolGrid b = pullback_symbol(m, a, 1.5);
    bool flagged = false;
    for (const auto& w : b.warnings) flagged = flagged || w.find("aliasing") != std::string::npos;
    REQUIRE(flagged);
  }
}

TEST_CASE("lyapunov rate estimates") {
  auto samples = grid_samples(1.5, 1.5, 5);
  MetricField id = constant_metric(MatR::Identity(2, 2));

  auto inv = lyapunov_bound(inverted_hamiltonian(), id, samples);
  REQUIRE(inv.Lambda_hat == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(inv.upper_bound >= inv.Lambda_hat - 1e-12);

  auto harm = lyapunov_bound(harmonic_hamiltonian(), id, samples);
  REQUIRE(harm.Lambda_hat < 1e-14);

  double hb = 0.1;
  auto harm_sc = lyapunov_bound(harmonic_hamiltonian(), semiclassical_metric(hb), samples);
  REQUIRE(harm_sc.Lambda_hat == Catch::Approx((1 - hb * hb) / (2 * hb)).epsilon(1e-10));

  auto tr = lyapunov_bound(transport_sine(), vectorfield_metric(0.5, 0.75), samples);
  REQUIRE(std::isfinite(tr.Lambda_hat));
  REQUIRE(tr.upper_bound >= tr.Lambda_hat - 1e-12);

  MetricField dgn = [](const VecR&) {
    MatR G(2, 2);
    G << 1, 0, 0, 0;
    return G;
  };
  REQUIRE_THROWS_AS(lyapunov_bound(harmonic_hamiltonian(), dgn, samples),
                    std::domain_error);
}

TEST_CASE("flow expansion audit") {
  MetricField id = constant_metric(MatR::Identity(2, 2));
  SECTION("harmonic flow is a g-isometry") {
    auto audit = flow_expansion_audit(harmonic_hamiltonian(), id,
                                      grid_samples(1, 1, 3), {0.5, 1.0, 2.0});
    REQUIRE(audit.pass());
    for (const auto& r : audit.rows) REQUIRE(std::abs(r.measured - 1.0) < 1e-8);
  }
  SECTION("inverted oscillator saturates the bound") {
    auto audit = flow_expansion_audit(inverted_hamiltonian(), id,
                                      grid_samples(1, 1, 3), {2.0});
    REQUIRE(audit.pass());
    REQUIRE(audit.Lambda_hat == Catch::Approx(1.0).epsilon(1e-10));
    for (const auto& r : audit.rows) {
      REQUIRE(r.measured == Catch::Approx(std::exp(2.0)).epsilon(1e-8));
      REQUIRE(r.measured / r.bound > 1 - 1e-6);
    }
  }
  SECTION("quartic perturbation stays under the sampled bound") {
    auto audit = flow_expansion_audit(quartic_hamiltonian(0.1), id,
                                      grid_samples(2.2, 2.2, 9), {0.5, 1.5, 3.0},
                                      1e-10, grid_samples(1.0, 1.0, 3));
    REQUIRE(audit.pass());
    std::string csv = flow_audit_csv(audit.rows);
    REQUIRE_THAT(csv, ContainsSubstring("rho_x,rho_xi,t,measured,bound,margin"));
  }
  SECTION("an understated rate produces a failure record naming the point") {
    auto audit = flow_expansion_audit(quartic_hamiltonian(0.1), id, {pt(0, 0)},
                                      {2.0}, 1e-10, {pt(1.5, 0.3)});
    REQUIRE_FALSE(audit.pass());
    REQUIRE_THAT(audit.failures.front(), ContainsSubstring("1.5"));
    REQUIRE_THAT(audit.failures.front(), ContainsSubstring("t=2"));
  }
}

TEST_CASE("derivative growth audit") {
  MetricField id = constant_metric(MatR::Identity(2, 2));
  auto box = grid_samples(2.0, 2.0, 7);
  SECTION("harmonic: zero second derivative under a positive allowance") {
    auto a = derivative_growth_audit(harmonic_hamiltonian(), id, box, pt(0.7, -0.2),
                                     1.0, 2);
    REQUIRE(a.status == AuditStatus::pass);
    REQUIRE(a.bound_total > 0);
    REQUIRE(a.measured <= a.bound_total);
  }
  SECTION("quartic k = 2 and k = 3") {
    auto m = quartic_hamiltonian(0.1);
    for (int k : {2, 3}) {
      auto a = derivative_growth_audit(m, id, box, pt(0.8, 0.2), 1.0, k);
      INFO("k=" << k << " measured=" << a.measured << " bound=" << a.bound_total);
      REQUIRE(a.status == AuditStatus::pass);
      REQUIRE(a.measured > 0);
    }
  }
  SECTION("transport k = 2") {
    auto a = derivative_growth_audit(transport_sine(), id, box, pt(0.5, 1.0), 1.0, 2);
    REQUIRE(a.status == AuditStatus::pass);
  }
  SECTION("classifier semantics") {
    REQUIRE(classify_derivative_audit(0.1, 1.0, 1e-6, 0.01) == AuditStatus::pass);
    REQUIRE(classify_derivative_audit(1.0, 1e-6, 0.5, 0.8) ==
            AuditStatus::inconclusive);
    REQUIRE(classify_derivative_audit(1.0, 1e-6, 0.2, 0.01) ==
            AuditStatus::inconclusive);
    REQUIRE(classify_derivative_audit(1.0, 0.5, 1e-6, 0.01) == AuditStatus::fail);
    REQUIRE(classify_derivative_audit(4.0, 3.0, 3e-3, 4) == AuditStatus::inconclusive);
  }
  SECTION("k out of range") {
    REQUIRE_THROWS_AS(
        derivative_growth_audit(harmonic_hamiltonian(), id, box, pt(0, 0), 1.0, 4),
        std::invalid_argument);
  }
}

TEST_CASE("lipschitz audit of the flow") {
  MetricField id = constant_metric(MatR::Identity(2, 2));
  auto box = grid_samples(2.0, 2.0, 7);
  SECTION("harmonic: displacement ratio is one") {
    auto c = lipschitz_constants(harmonic_hamiltonian(), id, box, 0.5);
    REQUIRE(c.rate() < 1e-12);
    auto a = flow_lipschitz_audit(harmonic_hamiltonian(), id, pt(0.4, -0.2), 0.2,
                                  1.0, c);
    REQUIRE(a.margin >= 0);
    REQUIRE(a.max_ratio == Catch::Approx(1.0).epsilon(1e-8));
  }
  SECTION("inverted: ratio reaches e^t") {
    auto c = lipschitz_constants(inverted_hamiltonian(), id, box, 0.5);
    REQUIRE(c.Lambda_hat == Catch::Approx(1.0).epsilon(1e-10));
    double t = 1.0;
    auto a = flow_lipschitz_audit(inverted_hamiltonian(), id, pt(0, 0), 0.15, t, c);
    REQUIRE(a.margin >= 0);
    REQUIRE(a.max_ratio == Catch::Approx(std::exp(t)).epsilon(1e-6));
  }
  SECTION("quartic with measured constants") {
    auto m = quartic_hamiltonian(0.1);
    auto c = lipschitz_constants(m, id, box, 0.5);
    double t = 0.6;
    double r = 0.9 * c.r_g * std::exp(-c.rate() * t);
    auto a = flow_lipschitz_audit(m, id, pt(0.6, 0.1), r, t, c);
    REQUIRE(a.margin >= 0);
  }
  SECTION("time window precondition") {
    auto c = lipschitz_constants(inverted_hamiltonian(), id, box, 0.5);
    REQUIRE_THROWS_WITH(
        flow_lipschitz_audit(inverted_hamiltonian(), id, pt(0, 0), 0.4, 1.0, c),
        ContainsSubstring("time window"));
  }
}

TEST_CASE("seminorm identities for hamiltonian fields and flows") {
  auto m = quartic_hamiltonian(0.1);
  std::vector<MetricField> fields = {halfwave_metric(0.5),
                                     beals_fefferman_metric(2, 3),
                                     semiclassical_metric(0.3)};
  std::vector<VecR> pts = {pt(0.9, -0.3), pt(-1.2, 0.8), pt(0.3, 1.4)};
  MatR J(2, 2);
  J << 0, 1, -1, 0;
  for (const auto& field : fields)
    for (const auto& rho : pts) {
      MatR G = field(rho);
      double h = gain(G);
      VecR gr = m.grad(rho[0], rho[1]);
      VecR H = hamiltonian_vector_field(m, rho);
      double lhs = vec_g_norm(H, G);
      double rhs = std::sqrt(gr.dot(MatR(sigma_dual(G)).inverse() * gr));
      REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12 * (1 + lhs)));
      double grad_g = std::sqrt(gr.dot(G.inverse() * gr));
      REQUIRE(lhs <= h * grad_g + 1e-8);
      MatR DH = J * m.hess(rho[0], rho[1]);
      REQUIRE(op_g_norm2(DH, G, G) <=
              h * g_op_norm(m.hess(rho[0], rho[1]), G) + 1e-8);
    }

  MetricField hw = halfwave_metric(0.5);
  VecR rho0 = pt(0.9, -0.3);
  FlowResult fr = flow(m, rho0, 1.0, 1e-11);
  MatR G0 = hw(rho0), G1 = hw(fr.endpoint);
  double lhs = op_g_norm2(fr.jacobian, G1, G0);
  double rhs = op_g_norm2(fr.jacobian.inverse(), sigma_dual(G0), sigma_dual(G1));
  REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-8));
}
