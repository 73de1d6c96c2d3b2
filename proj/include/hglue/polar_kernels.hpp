#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hglue {

/// Tensor grid, log-uniform in r on [r_inner, r_outer] and uniform periodic in
/// theta. Nodes are stored radius-major: index k * n_theta + l.
struct PolarGrid {
  double r_inner = 0.2;
  double r_outer = 1.1;
  int n_r = 128;
  int n_theta = 128;

  double log_step() const;
  double theta_step() const;
  double radius(int k) const;
  double theta(int l) const;
  int nodes() const { return n_r * n_theta; }
  /// Throws GridTooCoarse below min_size points in either direction and
  /// InvalidConfig for a degenerate annulus.
  void validate(int min_size = 64) const;
};

enum class Backend { Serial, OpenMP };

/// Pieces of the energy identity, each already multiplied by the quadrature
/// weights ds dtheta.
struct EnergyTerms {
  double laplace_lhs = 0.0;   // -Re <(D_ss + D_theta^2) gamma, gamma>
  double mass_lhs = 0.0;      // 2 t^2 r^2 Re tr(X gamma^dagger)
  double gradient_rhs = 0.0;  // |d_s gamma|^2 + |D_theta gamma|^2
  double mass_rhs = 0.0;      // 2 t^2 r^2 (|[Phi,gamma]|^2 + |[Phi^dagger,gamma]|^2)
};

namespace kernels {

using cplx = std::complex<double>;

/// out = r^{-2} (d_s^2 + d_theta^2 + 4 i b d_theta - 4 b^2) in, second-order
/// central differences, b constant on each circle (b_row[k]). Rows k = 0 and
/// k = n_r - 1 are set to zero.
void decoupled_apply(Backend backend, const PolarGrid& grid, std::span<const double> b_row,
                     std::span<const cplx> in, std::span<cplx> out);

/// `a` holds the diagonal connection coefficients per radial row (n_r x n),
/// `phi` and `gamma` hold an n x n column-major matrix per node. gamma must
/// vanish on the two outermost rows at each end.
EnergyTerms energy_terms(Backend backend, const PolarGrid& grid, int n, std::span<const double> a,
                         std::span<const cplx> phi, std::span<const cplx> gamma, double t);

namespace serial {
void decoupled_apply(const PolarGrid& grid, std::span<const double> b_row,
                     std::span<const cplx> in, std::span<cplx> out);
EnergyTerms energy_terms(const PolarGrid& grid, int n, std::span<const double> a,
                         std::span<const cplx> phi, std::span<const cplx> gamma, double t);
}  // namespace serial

namespace omp {
void decoupled_apply(const PolarGrid& grid, std::span<const double> b_row,
                     std::span<const cplx> in, std::span<cplx> out);
EnergyTerms energy_terms(const PolarGrid& grid, int n, std::span<const double> a,
                         std::span<const cplx> phi, std::span<const cplx> gamma, double t);
}  // namespace omp

}  // namespace kernels
}  // namespace hglue
