#pragma once

// Per-row pieces shared by the serial and OpenMP kernels. Both back ends sum
// the row results in the same order, so they agree bit for bit.

#include <array>
#include <cmath>
#include <complex>
#include <span>

#include <Eigen/Dense>

#include "hglue/polar_kernels.hpp"

namespace hglue::kernels::detail {

using cplx = std::complex<double>;

// Throw InvalidConfig when buffer sizes do not match the grid.
void check_sizes(const PolarGrid& grid, std::size_t b_size, std::size_t in, std::size_t out);
void check_energy_sizes(const PolarGrid& grid, int n, std::size_t a, std::size_t phi,
                        std::size_t gamma);

inline void decoupled_row(const PolarGrid& grid, int k, double b, std::span<const cplx> in,
                          std::span<cplx> out) {
  const int nt = grid.n_theta;
  cplx* row = out.data() + static_cast<std::ptrdiff_t>(k) * nt;
  if (k == 0 || k == grid.n_r - 1) {
    for (int l = 0; l < nt; ++l) row[l] = 0.0;
    return;
  }
  const double ds = grid.log_step();
  const double dt = grid.theta_step();
  const double r = grid.radius(k);
  const double inv_r2 = 1.0 / (r * r);
  const cplx* c = in.data() + static_cast<std::ptrdiff_t>(k) * nt;
  const cplx* up = c + nt;
  const cplx* dn = c - nt;
  const cplx ib4{0.0, 4.0 * b};
  for (int l = 0; l < nt; ++l) {
    const int lp = l + 1 == nt ? 0 : l + 1;
    const int lm = l == 0 ? nt - 1 : l - 1;
    const cplx dss = (up[l] - 2.0 * c[l] + dn[l]) / (ds * ds);
    const cplx dtt = (c[lp] - 2.0 * c[l] + c[lm]) / (dt * dt);
    const cplx dth = (c[lp] - c[lm]) / (2.0 * dt);
    row[l] = inv_r2 * (dss + dtt + ib4 * dth - 4.0 * b * b * c[l]);
  }
}

inline std::array<double, 4> energy_row(const PolarGrid& grid, int k, int n, std::span<const double> a,
                                        std::span<const cplx> phi, std::span<const cplx> gamma,
                                        double t) {
  using Mat = Eigen::MatrixXcd;
  using CMap = Eigen::Map<const Mat>;
  std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
  const int nt = grid.n_theta;
  const int nn = n * n;
  const double ds = grid.log_step();
  const double dt = grid.theta_step();
  const double r = grid.radius(k);
  const double weight_mass = 2.0 * t * t * r * r;
  const double* ak = a.data() + static_cast<std::ptrdiff_t>(k) * n;
  auto at = [&](int kk, int l) { return gamma.data() + (static_cast<std::ptrdiff_t>(kk) * nt + l) * nn; };

  for (int l = 0; l < nt; ++l) {
    const int lp = l + 1 == nt ? 0 : l + 1;
    const int lm = l == 0 ? nt - 1 : l - 1;
    const cplx* g = at(k, l);
    const cplx* gu = at(k + 1, l);
    const cplx* gd = at(k - 1, l);
    const cplx* gp = at(k, lp);
    const cplx* gm = at(k, lm);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const int q = j * n + i;
        const double b = ak[i] - ak[j];
        const cplx v = g[q];
        const cplx dss = (gu[q] - 2.0 * v + gd[q]) / (ds * ds);
        const cplx dth = (gp[q] - gm[q]) / (2.0 * dt);
        const cplx dtt = (gp[q] - 2.0 * v + gm[q]) / (dt * dt);
        const cplx cov2 = dtt + cplx{0.0, 4.0 * b} * dth - 4.0 * b * b * v;
        acc[0] -= std::real((dss + cov2) * std::conj(v));
        const cplx ds1 = (gu[q] - gd[q]) / (2.0 * ds);
        const cplx cov1 = dth + cplx{0.0, 2.0 * b} * v;
        acc[2] += std::norm(ds1) + std::norm(cov1);
      }
    }
    const CMap G(g, n, n);
    if (G.squaredNorm() == 0.0) continue;
    const CMap P(phi.data() + (static_cast<std::ptrdiff_t>(k) * nt + l) * nn, n, n);
    const Mat Pd = P.adjoint();
    const Mat C1 = P * G - G * P;
    const Mat C2 = Pd * G - G * Pd;
    const Mat X = Pd * C1 - C1 * Pd + P * C2 - C2 * P;
    acc[1] += weight_mass * std::real((X * G.adjoint()).trace());
    acc[3] += weight_mass * (C1.squaredNorm() + C2.squaredNorm());
  }
  const double w = ds * dt;
  for (double& x : acc) x *= w;
  return acc;
}

inline EnergyTerms sum_rows(const std::vector<std::array<double, 4>>& rows) {
  EnergyTerms out;
  for (const auto& r : rows) {
    out.laplace_lhs += r[0];
    out.mass_lhs += r[1];
    out.gradient_rhs += r[2];
    out.mass_rhs += r[3];
  }
  return out;
}

}  // namespace hglue::kernels::detail
