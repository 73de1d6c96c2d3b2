#pragma once

namespace hglue {

/// Modified Bessel function of the second kind, order 0, for x > 0.
/// Relative accuracy ~1e-14 over (0, 700). Throws DomainError for x <= 0.
double bessel_k0(double x);

/// Order-1 companion of bessel_k0; needed for the far-field log-derivative.
double bessel_k1(double x);

/// Exponentially scaled variants e^x K_nu(x); finite for all x > 0.
double bessel_k0_scaled(double x);
double bessel_k1_scaled(double x);

}  // namespace hglue
