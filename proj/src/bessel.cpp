#include "hglue/bessel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hglue/errors.hpp"

namespace hglue {
namespace {

constexpr double kSeriesLimit = 2.0;

void require_positive(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorKind::DomainError,
                "Bessel K requires a finite positive argument, got " + std::to_string(x));
  }
}

// Power series about 0 (Abramowitz & Stegun 9.6.13 / 9.6.11).
double k0_series(double x) {
  const double q = 0.25 * x * x;
  const double log_term = std::log(0.5 * x) + std::numbers::egamma;
  double term = 1.0;  // q^k / (k!)^2
  double harmonic = 0.0;
  double i0 = 1.0;
  double tail = 0.0;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    i0 += term;
    tail += term * harmonic;
    if (term * (1.0 + harmonic) < 1e-18 * (i0 + std::abs(tail))) break;
  }
  return -log_term * i0 + tail;
}

double k1_series(double x) {
  const double q = 0.25 * x * x;
  const double log_half = std::log(0.5 * x);
  // I1(x) = (x/2) sum q^k / (k! (k+1)!)
  // K1(x) = 1/x + log(x/2) I1(x) - (x/4) sum (psi(k+1) + psi(k+2)) q^k / (k! (k+1)!)
  double term = 1.0;  // q^k / (k! (k+1)!)
  double psi_k1 = -std::numbers::egamma;       // psi(k+1)
  double psi_k2 = 1.0 - std::numbers::egamma;  // psi(k+2)
  double i1_sum = term;
  double psi_sum = term * (psi_k1 + psi_k2);
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    psi_k1 += 1.0 / k;
    psi_k2 += 1.0 / (k + 1);
    i1_sum += term;
    psi_sum += term * (psi_k1 + psi_k2);
    if (term * (1.0 + std::abs(psi_k1 + psi_k2)) < 1e-18 * std::abs(psi_sum)) break;
  }
  return 1.0 / x + log_half * 0.5 * x * i1_sum - 0.25 * x * psi_sum;
}

// e^x K_nu(x) = int_0^inf exp(-x (cosh s - 1)) cosh(nu s) ds. The integrand is
// entire and decays doubly exponentially, so the trapezoid rule converges
// geometrically in 1/h. The peak narrows like x^{-1/2}, so h shrinks with it.
double k_scaled_trapezoid(double x, int order) {
  const double h = x > 20.0 ? 0.125 * std::sqrt(20.0 / x) : 0.125;
  double sum = 0.5;  // s = 0 node: exp(0) * cosh(0) / 2
  for (int k = 1; k < 100000; ++k) {
    const double s = k * h;
    const double weight = order == 0 ? 1.0 : std::cosh(s);
    const double f = std::exp(-x * (std::cosh(s) - 1.0)) * weight;
    sum += f;
    if (f < 1e-18 * sum) break;
  }
  return h * sum;
}

}  // namespace

double bessel_k0(double x) {
  require_positive(x);
  if (x <= kSeriesLimit) return k0_series(x);
  return k_scaled_trapezoid(x, 0) * std::exp(-x);
}

double bessel_k1(double x) {
  require_positive(x);
  if (x <= kSeriesLimit) return k1_series(x);
  return k_scaled_trapezoid(x, 1) * std::exp(-x);
}

double bessel_k0_scaled(double x) {
  require_positive(x);
  if (x <= kSeriesLimit) return k0_series(x) * std::exp(x);
  return k_scaled_trapezoid(x, 0);
}

double bessel_k1_scaled(double x) {
  require_positive(x);
  if (x <= kSeriesLimit) return k1_series(x) * std::exp(x);
  return k_scaled_trapezoid(x, 1);
}

}  // namespace hglue
