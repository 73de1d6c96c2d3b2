#include <vector>

#include "hglue/polar_kernels.hpp"
#include "polar_rows.hpp"

namespace hglue::kernels {

namespace omp {

void decoupled_apply(const PolarGrid& grid, std::span<const double> b_row, std::span<const cplx> in,
                     std::span<cplx> out) {
  detail::check_sizes(grid, b_row.size(), in.size(), out.size());
#pragma omp parallel for schedule(static)
  for (int k = 0; k < grid.n_r; ++k) detail::decoupled_row(grid, k, b_row[k], in, out);
}

EnergyTerms energy_terms(const PolarGrid& grid, int n, std::span<const double> a,
                         std::span<const cplx> phi, std::span<const cplx> gamma, double t) {
  detail::check_energy_sizes(grid, n, a.size(), phi.size(), gamma.size());
  std::vector<std::array<double, 4>> rows(static_cast<std::size_t>(grid.n_r), {0.0, 0.0, 0.0, 0.0});
#pragma omp parallel for schedule(static)
  for (int k = 1; k < grid.n_r - 1; ++k) rows[k] = detail::energy_row(grid, k, n, a, phi, gamma, t);
  return detail::sum_rows(rows);
}

}  // namespace omp
}  // namespace hglue::kernels
