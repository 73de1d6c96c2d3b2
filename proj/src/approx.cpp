#include "hglue/approx.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "hglue/cutoff.hpp"
#include "hglue/errors.hpp"

namespace hglue {

std::vector<double> approx_metric(const ClusterPartition& p, const TodaFamily& toda, double t,
                                  std::span<const double> block_radii) {
  std::vector<double> out = limiting_metric(p, block_radii);
  for (int j = 0; j < p.block_count(); ++j) {
    const int K = p.block(j).K;
    if (K == 1) continue;
    const double chi = cutoff(block_radii[j]).value;
    if (chi == 0.0) continue;
    const std::vector<double> u = evaluate_rescaled(toda.at(K), t, block_radii[j]);
    const double log_r = std::log(block_radii[j]);
    for (int i = 0; i < K; ++i) out[p.offset(j) + i] = std::exp(-2.0 * alpha_value(K, i + 1) * log_r + chi * u[i]);
  }
  return out;
}

std::vector<double> error_entries(const TodaSolution& solution, double t, double r) {
  const int K = solution.rank();
  std::vector<double> out(static_cast<std::size_t>(K), 0.0);
  if (!(r > 0.0)) throw Error(ErrorKind::ZeroRadius, "error entry needs r > 0");
  const CutoffJet chi = cutoff(r);
  if (chi.value == 0.0 && chi.d1 == 0.0 && chi.d2 == 0.0) return out;

  const RadialJet jet = jet_rescaled(solution, t, r);
  std::vector<double> U(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) U[i] = chi.value * jet.value[i];
  const double log_weight = 2.0 * std::log(t) + (2.0 / K) * std::log(r);
  for (int i = 0; i < K; ++i) {
    const double u = jet.value[i];
    const double du = jet.d1[i];
    const double lap = chi.value * jet.laplacian[i] + chi.d2 * u + 2.0 * chi.d1 * du + chi.d1 * u / r;
    const int ip = (i + 1) % K;
    const int im = (i + K - 1) % K;
    out[i] = -0.25 * lap + std::exp(log_weight + U[i] - U[ip]) - std::exp(log_weight + U[im] - U[i]);
  }
  return out;
}

double error_entry(const TodaFamily& toda, int K, int i, double t, double r) {
  if (i < 1 || i > K) throw Error(ErrorKind::IndexOutOfRange, "error entry index out of range");
  return error_entries(toda.at(K), t, r)[i - 1];
}

QuadratureSpec QuadratureSpec::refined() const {
  QuadratureSpec out = *this;
  out.inner_panels *= 2;
  out.annulus_panels *= 2;
  return out;
}

int QuadratureSpec::annulus_nodes() const { return 15 * annulus_panels; }

namespace {

using GL = boost::math::quadrature::gauss<double, 15>;

// Integral of sum_i e_i^2 * 2 pi r over [lo, hi] in `panels` pieces.
struct BlockIntegrals {
  double inner = 0.0;
  double annulus = 0.0;
};

BlockIntegrals block_integrals(const TodaSolution& sol, double t, double r_lo, int inner_panels,
                               int annulus_panels) {
  auto integrand = [&](double r) {
    double sum = 0.0;
    for (double e : error_entries(sol, t, r)) sum += e * e;
    return 2.0 * std::numbers::pi * r * sum;
  };
  BlockIntegrals out;
  const double ratio = std::pow(kCutoffInner / r_lo, 1.0 / inner_panels);
  double a = r_lo;
  for (int k = 0; k < inner_panels; ++k) {
    const double b = k + 1 == inner_panels ? kCutoffInner : a * ratio;
    out.inner += GL::integrate(integrand, a, b);
    a = b;
  }
  const double width = (kCutoffOuter - kCutoffInner) / annulus_panels;
  for (int k = 0; k < annulus_panels; ++k) {
    out.annulus += GL::integrate(integrand, kCutoffInner + k * width, kCutoffInner + (k + 1) * width);
  }
  return out;
}

}  // namespace

ErrorNorm error_l2_detail(const ClusterPartition& p, const TodaFamily& toda, double t,
                          const QuadratureSpec& spec) {
  if (!(t > 0.0)) throw Error(ErrorKind::DomainError, "t must be positive");
  if (spec.inner_panels < 1 || spec.annulus_nodes() < 64) {
    throw Error(ErrorKind::QuadratureTooCoarse, "the gluing annulus needs at least 64 quadrature nodes");
  }
  ErrorNorm out;
  out.t = t;
  double total = 0.0, total_half = 0.0, inner = 0.0;
  for (const auto& b : p.blocks()) {
    if (b.K == 1) {
      out.block_l2.push_back(0.0);
      continue;
    }
    const TodaSolution& sol = toda.at(b.K);
    const double factor = std::pow(t / sol.t(), b.K / (b.K + 1.0));
    const double r_lo = std::max(spec.r_lo, sol.grid().r_min() / factor * (1.0 + 1e-12));
    if (!(r_lo < kCutoffInner)) {
      throw Error(ErrorKind::InvalidConfig, "quadrature lower radius must lie below 1/2");
    }
    // The block lives in its own coordinate z_j = f'(0) z; pulling the
    // (1,1)-form back multiplies the squared norm by |f'(0)|^2.
    const double jac = std::norm(b.f_prime0);
    const BlockIntegrals full = block_integrals(sol, t, r_lo, spec.inner_panels, spec.annulus_panels);
    const double block = jac * (full.inner + full.annulus);
    out.block_l2.push_back(2.0 * std::sqrt(block));
    total += block;
    inner += jac * full.inner;
    if (spec.check) {
      const BlockIntegrals half = block_integrals(sol, t, r_lo, std::max(1, spec.inner_panels / 2),
                                                  std::max(1, spec.annulus_panels / 2));
      total_half += jac * (half.inner + half.annulus);
    }
  }
  out.l2 = 2.0 * std::sqrt(total);
  out.inner_l2 = 2.0 * std::sqrt(inner);
  if (spec.check && total > 0.0) {
    out.relative_change = std::abs(std::sqrt(total_half) - std::sqrt(total)) / std::sqrt(total);
    if (out.relative_change > spec.relative_check) {
      throw Error(ErrorKind::QuadratureTooCoarse,
                  fmt::format("error norm at t = {} changes by {:.3g} under panel halving", t,
                              out.relative_change));
    }
  }
  return out;
}

double error_l2(const ClusterPartition& p, const TodaFamily& toda, double t,
                const QuadratureSpec& spec) {
  return error_l2_detail(p, toda, t, spec).l2;
}

std::vector<ErrorNorm> error_sweep(const ClusterPartition& p, const TodaFamily& toda,
                                   std::span<const double> t_values, const QuadratureSpec& spec,
                                   Backend backend) {
  const int count = static_cast<int>(t_values.size());
  std::vector<ErrorNorm> out(t_values.size());
  if (backend == Backend::Serial) {
    for (int k = 0; k < count; ++k) out[k] = error_l2_detail(p, toda, t_values[k], spec);
    return out;
  }
  std::vector<std::exception_ptr> failures(t_values.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    try {
      out[k] = error_l2_detail(p, toda, t_values[k], spec);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

DecayReport fit_decay(std::span<const double> t_values, std::span<const double> norms,
                      double threshold) {
  if (t_values.size() != norms.size() || t_values.size() < 3) {
    throw Error(ErrorKind::DegenerateFit, "decay fit needs at least 3 (t, norm) pairs");
  }
  const auto n = static_cast<double>(t_values.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (!(norms[k] > 0.0) || !std::isfinite(norms[k])) {
      throw Error(ErrorKind::DegenerateFit, "decay fit needs positive finite norms");
    }
    const double y = std::log(norms[k]);
    st += t_values[k];
    sy += y;
    stt += t_values[k] * t_values[k];
    sty += t_values[k] * y;
  }
  const double denom = n * stt - st * st;
  if (!(denom > 1e-12 * n * stt)) throw Error(ErrorKind::DegenerateFit, "t values are not distinct");
  const double slope = (n * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / n;

  DecayReport report;
  report.t_values.assign(t_values.begin(), t_values.end());
  report.l2_norms.assign(norms.begin(), norms.end());
  report.delta = -slope;
  report.c = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const double r = std::log(norms[k]) - (intercept + slope * t_values[k]);
    ss += r * r;
  }
  report.residual = std::sqrt(ss / n);
  report.threshold = threshold;
  report.pass = report.delta > 0.0 && report.residual < threshold;
  return report;
}

}  // namespace hglue
