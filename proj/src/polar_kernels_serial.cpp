#include <numbers>
#include <vector>

#include "hglue/errors.hpp"
#include "hglue/polar_kernels.hpp"
#include "polar_rows.hpp"

namespace hglue {

double PolarGrid::log_step() const { return std::log(r_outer / r_inner) / (n_r - 1); }
double PolarGrid::theta_step() const { return 2.0 * std::numbers::pi / n_theta; }
double PolarGrid::radius(int k) const { return r_inner * std::exp(k * log_step()); }
double PolarGrid::theta(int l) const { return l * theta_step(); }

void PolarGrid::validate(int min_size) const {
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) {
    throw Error(ErrorKind::InvalidConfig, "polar grid needs 0 < r_inner < r_outer");
  }
  if (n_r < min_size || n_theta < min_size) {
    throw Error(ErrorKind::GridTooCoarse, "polar grid below " + std::to_string(min_size) + " x " +
                                              std::to_string(min_size));
  }
}

namespace kernels {

namespace detail {
void check_sizes(const PolarGrid& grid, std::size_t b_size, std::size_t in, std::size_t out) {
  const auto nodes = static_cast<std::size_t>(grid.nodes());
  if (b_size != static_cast<std::size_t>(grid.n_r) || in != nodes || out != nodes) {
    throw Error(ErrorKind::InvalidConfig, "polar field size does not match the grid");
  }
}
void check_energy_sizes(const PolarGrid& grid, int n, std::size_t a, std::size_t phi,
                        std::size_t gamma) {
  const auto nodes = static_cast<std::size_t>(grid.nodes()) * n * n;
  if (a != static_cast<std::size_t>(grid.n_r) * n || phi != nodes || gamma != nodes) {
    throw Error(ErrorKind::InvalidConfig, "energy kernel input sizes do not match the grid");
  }
}
}  // namespace detail

namespace serial {

void decoupled_apply(const PolarGrid& grid, std::span<const double> b_row, std::span<const cplx> in,
                     std::span<cplx> out) {
  detail::check_sizes(grid, b_row.size(), in.size(), out.size());
  for (int k = 0; k < grid.n_r; ++k) detail::decoupled_row(grid, k, b_row[k], in, out);
}

EnergyTerms energy_terms(const PolarGrid& grid, int n, std::span<const double> a,
                         std::span<const cplx> phi, std::span<const cplx> gamma, double t) {
  detail::check_energy_sizes(grid, n, a.size(), phi.size(), gamma.size());
  std::vector<std::array<double, 4>> rows(static_cast<std::size_t>(grid.n_r), {0.0, 0.0, 0.0, 0.0});
  for (int k = 1; k < grid.n_r - 1; ++k) rows[k] = detail::energy_row(grid, k, n, a, phi, gamma, t);
  return detail::sum_rows(rows);
}

}  // namespace serial

void decoupled_apply(Backend backend, const PolarGrid& grid, std::span<const double> b_row,
                     std::span<const cplx> in, std::span<cplx> out) {
  if (backend == Backend::OpenMP) {
    omp::decoupled_apply(grid, b_row, in, out);
  } else {
    serial::decoupled_apply(grid, b_row, in, out);
  }
}

EnergyTerms energy_terms(Backend backend, const PolarGrid& grid, int n, std::span<const double> a,
                         std::span<const cplx> phi, std::span<const cplx> gamma, double t) {
  return backend == Backend::OpenMP ? omp::energy_terms(grid, n, a, phi, gamma, t)
                                    : serial::energy_terms(grid, n, a, phi, gamma, t);
}

}  // namespace kernels
}  // namespace hglue
