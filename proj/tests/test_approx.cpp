#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "hglue/approx.hpp"
#include "hglue/cutoff.hpp"
#include "hglue/errors.hpp"

using namespace hglue;
using hglue::testing::family;
using hglue::testing::toda;

TEST_CASE("cutoff") {
  for (double r : {0.0, 0.3, 0.5}) {
    const CutoffJet c = cutoff(r);
    CHECK(c.value == 1.0);
    CHECK(c.d1 == 0.0);
    CHECK(c.d2 == 0.0);
  }
  for (double r : {1.0, 2.0}) {
    const CutoffJet c = cutoff(r);
    CHECK(c.value == 0.0);
    CHECK(c.d1 == 0.0);
    CHECK(c.d2 == 0.0);
  }
  const double x = 0.5;  // 2 * 0.75 - 1
  CHECK(cutoff(0.75).value == doctest::Approx(1 - (6 * std::pow(x, 5) - 15 * std::pow(x, 4) + 10 * std::pow(x, 3))));
  for (double r = 0.45; r <= 1.05; r += 0.01) {
    const double h = 1e-5;
    if (std::abs(r - 0.5) < 2 * h || std::abs(r - 1.0) < 2 * h) continue;
    const CutoffJet c = cutoff(r);
    CHECK(c.value >= 0.0);
    CHECK(c.value <= 1.0);
    CHECK((cutoff(r + h).value - cutoff(r - h).value) / (2 * h) == doctest::Approx(c.d1).scale(1).epsilon(1e-6));
    CHECK((cutoff(r + h).d1 - cutoff(r - h).d1) / (2 * h) == doctest::Approx(c.d2).scale(1).epsilon(1e-5));
  }
  // Second derivative is continuous at the seams.
  CHECK(std::abs(cutoff(0.5 + 1e-9).d2) < 1e-6);
  CHECK(std::abs(cutoff(1.0 - 1e-9).d2) < 1e-6);
}

TEST_CASE("approximate metric interpolates between model and limiting metrics") {
  const TodaFamily f = family({2, 3});
  const auto p = ClusterPartition::parse("3,2,1");
  const double t = 2.0;
  const auto at = [&](double r) { return p.block_radii(r); };
  CHECK(approx_metric(p, f, t, at(0.4)) == model_metric(p, f, t, at(0.4)));
  CHECK(approx_metric(p, f, t, at(1.5)) == limiting_metric(p, at(1.5)));
  const auto mid = approx_metric(p, f, t, at(0.75));
  CHECK(mid[0] * mid[1] * mid[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mid[3] * mid[4] == doctest::Approx(1.0).epsilon(1e-12));
  for (double seam : {0.5, 1.0}) {
    const auto lo = approx_metric(p, f, t, at(seam * (1 - 1e-13)));
    const auto hi = approx_metric(p, f, t, at(seam * (1 + 1e-13)));
    for (int i = 0; i < 6; ++i) CHECK(std::abs(lo[i] - hi[i]) < 1e-11);
  }
  CHECK_THROWS_AS(approx_metric(p, f, t, std::vector<double>{0, 1, 1}), Error);
}

TEST_CASE("error entries: support, trace, formula") {
  const TodaFamily f = family({2, 3, 4});
  for (int K : {2, 3, 4}) {
    const double tol = toda(K).config().tolerance;
    for (double t : {1.0, 3.0, 7.0}) {
      for (double r : {0.05, 0.2, 0.45, 0.5, 0.6, 0.8, 0.95, 1.0, 1.3}) {
        CAPTURE(K);
        CAPTURE(t);
        CAPTURE(r);
        const auto e = error_entries(toda(K), t, r);
        double sum = 0.0;
        for (int i = 0; i < K; ++i) {
          sum += e[i];
          CHECK(error_entry(f, K, i + 1, t, r) == e[i]);
        }
        CHECK(std::abs(sum) <= 1e-12);
        if (r >= 1.0) {
          for (double v : e) CHECK(v == 0.0);
        } else if (r <= 0.5) {
          // The entry is (1/4) r^{-2} times the log-radius residual.
          for (double v : e) CHECK(4 * r * r * std::abs(v) <= 10 * tol);
        }
      }
    }
  }
  // Inside the annulus: compare with the product rule on the solver jet.
  const TodaSolution& sol = toda(2);
  const double t = 2.0, r = 0.7;
  const RadialJet j = jet_rescaled(sol, t, r);
  const CutoffJet c = cutoff(r);
  const double lap = c.value * j.laplacian[0] + 2 * c.d1 * j.d1[0] + (c.d2 + c.d1 / r) * j.value[0];
  const double u = c.value * j.value[0];
  const double expected = -lap / 4 + t * t * r * (std::exp(2 * u) - std::exp(-2 * u));
  CHECK(error_entry(f, 2, 1, t, r) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(error_entry(f, 5, 1, t, r), Error);
  CHECK_THROWS_AS(error_entry(f, 2, 3, t, r), Error);
}

TEST_CASE("error norms") {
  const TodaFamily f = family({2, 3});
  CHECK(error_l2(ClusterPartition::parse("1,1,1"), f, 3.0) == 0.0);

  const auto e2 = error_l2_detail(ClusterPartition::parse("2"), f, 4.0);
  const auto e3 = error_l2_detail(ClusterPartition::parse("3"), f, 4.0);
  const auto both = error_l2_detail(ClusterPartition::parse("2,3,1"), f, 4.0);
  CHECK(both.l2 == doctest::Approx(std::hypot(e2.l2, e3.l2)).epsilon(1e-12));
  CHECK(both.block_l2.size() == 3u);
  CHECK(both.block_l2[2] == 0.0);
  CHECK(e2.inner_l2 < 1e-9 * e2.l2);
  CHECK(e2.relative_change < 0.01);

  // A coordinate factor f'(0) scales the block disk.
  const auto scaled = error_l2_detail(ClusterPartition::parse("2/2"), f, 4.0);
  CHECK(scaled.l2 > 0.0);

  for (int K : {2, 3}) {
    const auto p = ClusterPartition::parse(std::to_string(K));
    const double n2 = error_l2(p, f, 2.0), n4 = error_l2(p, f, 4.0), n8 = error_l2(p, f, 8.0);
    CHECK(n4 < n2);
    CHECK(n8 < n4);
  }
  QuadratureSpec coarse;
  coarse.annulus_panels = 2;
  CHECK_THROWS_AS(error_l2(ClusterPartition::parse("2"), f, 3.0, coarse), Error);

  const std::vector<double> ts{3.0, 5.0, 7.0};
  const auto p = ClusterPartition::parse("2,3");
  const auto serial = error_sweep(p, f, ts, {}, Backend::Serial);
  const auto parallel = error_sweep(p, f, ts, {}, Backend::OpenMP);
  for (std::size_t k = 0; k < ts.size(); ++k) CHECK(serial[k].l2 == parallel[k].l2);
}

TEST_CASE("decay fit") {
  const std::vector<double> t{1, 2, 3};
  std::vector<double> norms;
  for (double x : t) norms.push_back(2 * std::exp(-3 * x));
  const DecayReport r = fit_decay(t, norms);
  CHECK(r.c == doctest::Approx(2.0));
  CHECK(r.delta == doctest::Approx(3.0));
  CHECK(r.residual < 1e-12);
  CHECK(r.pass);

  const std::vector<double> flat{0.5, 0.5, 0.5};
  const DecayReport c = fit_decay(t, flat);
  CHECK(c.delta == doctest::Approx(0.0).scale(1));
  CHECK(!c.pass);

  auto kind = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::PipelineError;
  };
  CHECK(kind([&] { fit_decay(std::vector<double>{1, 2}, std::vector<double>{1, 1}); }) == ErrorKind::DegenerateFit);
  CHECK(kind([&] { fit_decay(t, std::vector<double>{1, 0, 1}); }) == ErrorKind::DegenerateFit);
}
