#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "hglue/bessel.hpp"
#include "hglue/errors.hpp"
#include "hglue/toda.hpp"

using namespace hglue;
using hglue::testing::toda;

namespace {

double k0_quadrature(double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([x](double s) { return std::exp(-x * std::cosh(s)); });
}

// Integrates u_ss = 8 e^{3s} sinh(2u) (s = log r) from tiny r with
// u = -s/2 + c + e^{2c} r^2, and bisects on c for the decaying solution.
// Returns u(1).
double shooting_u_at_one() {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const double s0 = std::log(1e-6), s_end = std::log(4.0);
  auto rhs = [](const State& y, State& dy, double s) {
    dy[0] = y[1];
    dy[1] = 8.0 * std::exp(3.0 * s) * std::sinh(2.0 * y[0]);
  };
  // +1: runs away upwards, -1: downwards, 0: stayed on the decaying branch.
  // Away from the branch the deviation from max(-s/2, 0) grows without bound
  // and reaches infinity at finite s, so it is checked after every step.
  struct Escaped {
    int sign;
  };
  auto run = [&](double c, double* u_one) {
    const double r0 = std::exp(s0);
    State y{-0.5 * s0 + c + std::exp(2 * c) * r0 * r0, -0.5 + 2.0 * std::exp(2 * c) * r0 * r0};
    auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
    auto watch = [](const State& x, double s) {
      const double deviation = x[0] - std::max(-0.5 * s, 0.0);
      if (deviation > 3.0) throw Escaped{1};
      if (deviation < -3.0) throw Escaped{-1};
    };
    try {
      odeint::integrate_adaptive(stepper, rhs, y, s0, 0.0, 1e-4, watch);
      if (u_one) *u_one = y[0];
      odeint::integrate_adaptive(stepper, rhs, y, 0.0, s_end, 1e-4, watch);
    } catch (const Escaped& e) {
      return e.sign;
    }
    return 0;
  };
  double lo = -0.5, hi = 0.0;
  REQUIRE(run(lo, nullptr) == -1);
  REQUIRE(run(hi, nullptr) == 1);
  for (int k = 0; k < 80 && hi - lo > 1e-15; ++k) {
    const double mid = 0.5 * (lo + hi);
    (run(mid, nullptr) >= 0 ? hi : lo) = mid;
  }
  double u_one = std::nan("");
  run(0.5 * (lo + hi), &u_one);
  return u_one;
}

}  // namespace

TEST_CASE("bessel_k0 against quadrature and the standard library") {
  CHECK(bessel_k0(1.0) == doctest::Approx(0.42102443824070834).epsilon(1e-13));
  for (double x : {1e-3, 0.05, 0.5, 1.0, 2.0, 3.7, 8.0, 10.0, 25.0, 60.0}) {
    CHECK(bessel_k0(x) == doctest::Approx(k0_quadrature(x)).epsilon(1e-10));
    CHECK(bessel_k0(x) == doctest::Approx(std::cyl_bessel_k(0.0, x)).epsilon(1e-10));
    CHECK(bessel_k1(x) == doctest::Approx(std::cyl_bessel_k(1.0, x)).epsilon(1e-10));
    CHECK(bessel_k0_scaled(x) == doctest::Approx(std::exp(x) * std::cyl_bessel_k(0.0, x)).epsilon(1e-10));
  }
  CHECK(bessel_k0(10.0) > 0.0);
  CHECK(bessel_k0(10.0) < std::exp(-10.0));
  for (double x : {1e-6, 1e-9, 1e-12}) {
    CHECK(bessel_k0(x) / (-std::log(x / 2) - std::numbers::egamma) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(bessel_k0(0.0), Error);
  CHECK_THROWS_AS(bessel_k0(-1.0), Error);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto edit) {
    SolverConfig c;
    edit(c);
    try {
      c.validate();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::InvalidConfig;
    }
    return false;
  };
  CHECK(bad([](SolverConfig& c) { c.tolerance = 0; }));
  CHECK(bad([](SolverConfig& c) { c.r_min = 0.3; }));
  CHECK(bad([](SolverConfig& c) { c.r_max = 1.5; }));
  CHECK(bad([](SolverConfig& c) { c.grid_size = 4; }));
  try {
    solve_toda(1);
    FAIL("rank 1 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("Toda solutions: symmetry, trace, residual, monotone decay") {
  for (int K : {2, 3, 4, 5}) {
    CAPTURE(K);
    const TodaSolution& sol = toda(K);
    CHECK(sol.rank() == K);
    CHECK(sol.t() == 1.0);
    CHECK(sol.residual_norm() <= sol.config().tolerance);
    CHECK(toda_residual(sol) <= sol.config().tolerance);
    const int n = sol.grid().size();
    double worst_sym = 0.0, worst_trace = 0.0;
    bool monotone = true;
    double previous = INFINITY;
    for (int k = 0; k < n; ++k) {
      // The trace is summed in mirrored pairs, where it cancels exactly.
      double trace = 0.0, norm2 = 0.0;
      for (int i = 0; i < K; ++i) {
        worst_sym = std::max(worst_sym, std::abs(sol.u(i)[k] + sol.u(K - 1 - i)[k]));
        if (2 * i < K - 1) trace += sol.u(i)[k] + sol.u(K - 1 - i)[k];
        if (2 * i == K - 1) trace += sol.u(i)[k];
        norm2 += sol.u(i)[k] * sol.u(i)[k];
      }
      worst_trace = std::max(worst_trace, std::abs(trace));
      if (norm2 > previous + 1e-28) monotone = false;
      previous = norm2;
    }
    CHECK(worst_sym == 0.0);
    CHECK(worst_trace == 0.0);
    CHECK(monotone);
    if (K % 2 == 1) {
      for (int k = 0; k < n; ++k) REQUIRE(sol.u(K / 2)[k] == 0.0);
    }
    // Log-slope at r_min matches 2 alpha = (2i - 1 - K)/K for 1-based i.
    const RadialJet j = sol.jet(sol.grid().r_min());
    for (int i = 0; i < K; ++i) {
      CHECK(sol.grid().r_min() * j.d1[i] == doctest::Approx((2.0 * i + 1.0 - K) / K).epsilon(1e-3));
    }
    // Functions with negative alpha are large and positive near the origin.
    for (int i = 0; i < K / 2; ++i) CHECK(sol.u(i)[0] > 0.0);
  }
}

TEST_CASE("K=2 value at r=1 agrees with a shooting integration") {
  const double oracle = shooting_u_at_one();
  CHECK(toda(2).jet(1.0).value[0] == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("painleve residual") {
  const TodaSolution& sol = toda(2);
  CHECK(painleve_residual(sol) <= 10 * sol.config().tolerance);
  CHECK(painleve_residual(sol) == doctest::Approx(toda_residual(sol)).epsilon(1e-6));
  CHECK_THROWS_AS(painleve_residual(toda(3)), Error);

  const int n = sol.grid().size();
  const TodaSolution zero(2, sol.config(), {std::vector<double>(n, 0.0)}, 0.0);
  CHECK(painleve_residual(zero) == 0.0);

  std::vector<double> shifted(sol.u(0).begin(), sol.u(0).end());
  for (double& v : shifted) v += 0.1;
  const TodaSolution perturbed(2, sol.config(), {shifted}, 0.0);
  CHECK(painleve_residual(perturbed) > 1e-3);
}

TEST_CASE("rescaling and interpolation") {
  const TodaSolution& sol = toda(3);
  const RadialGrid& g = sol.grid();
  for (int k : {0, 17, 500, 1999}) {
    const auto v = evaluate_rescaled(sol, 1.0, g[k]);
    for (int i = 0; i < 3; ++i) CHECK(v[i] == sol.u(i)[k]);
  }
  const double t = 5.0, factor = std::pow(t, 3.0 / 4.0);
  for (int k : {10, 700, 1500}) {
    const auto v = evaluate_rescaled(sol, t, g[k] / factor);
    for (int i = 0; i < 3; ++i) CHECK(v[i] == doctest::Approx(sol.u(i)[k]).epsilon(1e-13).scale(1e-12));
  }
  const TodaSolution at_t = sol.rescaled(t);
  CHECK(at_t.t() == t);
  CHECK(at_t.jet(0.3).value[0] == doctest::Approx(evaluate_rescaled(sol, t, 0.3)[0]).epsilon(1e-13));

  try {
    evaluate_rescaled(sol, 1.0, 0.5 * g.r_min());
    FAIL("no BelowGrid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BelowGrid);
  }
  // Beyond r_max the Bessel tail continues the solution smoothly.
  const double rm = g.r_max();
  const auto inside = sol.jet(rm * (1 - 1e-9)), outside = sol.jet(rm * (1 + 1e-9));
  CHECK(outside.value[0] == doctest::Approx(inside.value[0]).epsilon(1e-6));
  CHECK(sol.jet(2 * rm).value[0] > 0.0);
  CHECK(sol.jet(2 * rm).value[0] < inside.value[0]);
}

TEST_CASE("rescaled K=2 solution solves the t-dependent equation") {
  // Residual of u_ss - 8 t^2 r^3 sinh(2u) with s = log r, central differences.
  const TodaSolution& sol = toda(2);
  const double t = 8.0, h = 1e-3;
  double worst = 0.0;
  for (double s = std::log(0.01); s < std::log(1.0); s += 0.05) {
    auto u = [&](double x) { return evaluate_rescaled(sol, t, std::exp(x))[0]; };
    const double uss = (u(s + h) - 2 * u(s) + u(s - h)) / (h * h);
    const double r = std::exp(s);
    worst = std::max(worst, std::abs(uss - 8 * t * t * r * r * r * std::sinh(2 * u(s))));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("jet derivatives are consistent with the values") {
  const TodaSolution& sol = toda(4);
  for (double r : {0.013, 0.2, 0.77, 2.5, 7.0}) {
    CAPTURE(r);
    const double h = 1e-5 * r;
    const RadialJet j = sol.jet(r), jp = sol.jet(r + h), jm = sol.jet(r - h);
    for (int i = 0; i < 4; ++i) {
      const double scale = std::abs(j.d1[i]) + 1e-3;
      CHECK((jp.value[i] - jm.value[i]) / (2 * h) == doctest::Approx(j.d1[i]).epsilon(1e-6).scale(scale));
      CHECK(j.laplacian[i] == doctest::Approx(j.d2[i] + j.d1[i] / r).epsilon(1e-9).scale(std::abs(j.d2[i]) + 1));
    }
  }
}

TEST_CASE("asymptotic envelope and Bessel ratio") {
  const TodaSolution& sol = toda(2);
  CHECK(sol.zeta(1.0) == doctest::Approx(4.0 / 3.0));
  CHECK(toda_linear_constant(2) == doctest::Approx(4.0));
  CHECK(toda_linear_constant(3) == doctest::Approx(3.0));
  CHECK(toda_linear_constant(4) == doctest::Approx(2.0));

  const AsymptoticReport rep = asymptotic_check(sol, 0.1);
  CHECK(rep.holds);
  CHECK(rep.c_epsilon == doctest::Approx(1 / 0.9));
  CHECK(rep.c_rank == doctest::Approx(4.0));
  CHECK(rep.points_checked > 100);
  CHECK(rep.min_log_margin >= 0.0);
  CHECK_THROWS_AS(asymptotic_check(sol, 1e-30), Error);

  for (double r : {1.0, 2.0, 3.0, 4.0}) {
    const double model = bessel_k0(8.0 / 3.0 * std::pow(r, 1.5)) / std::numbers::pi;
    CHECK(sol.jet(r).value[0] / model == doctest::Approx(1.0).epsilon(0.01));
  }
}
