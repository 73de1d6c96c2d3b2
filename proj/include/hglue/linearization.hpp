#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hglue/model_metrics.hpp"
#include "hglue/polar_kernels.hpp"

namespace hglue {

enum class BlockKind { AInf, AMod, AZero };

const char* to_string(BlockKind kind) noexcept;

/// Block classification of the limiting operator for a critical cluster
/// size J: K_j > J gives AInf, K_j = J gives AMod, K_j < J gives AZero.
/// A size-1 block with J = 1 carries no Toda data and is classified AZero.
struct AtildeSpec {
  ClusterPartition partition;
  int J = 1;
  std::vector<BlockKind> kinds;

  /// Block index of matrix row `row`.
  int block_of(int row) const;
};

AtildeSpec build_atilde(const ClusterPartition& p, int J);

/// Diagonal entries f_i(|w|) of A~ = diag(f) (dw/w - dwbar/wbar). AMod rows
/// need the Toda solution of their rank.
std::vector<double> atilde_coefficients(const AtildeSpec& spec, const TodaFamily& toda, double w_abs);

/// f_i at 0 and at infinity (exact).
Rational f_at_zero(const AtildeSpec& spec, int row);
Rational f_at_infinity(const AtildeSpec& spec, int row);

struct IndicialSpectrum {
  std::vector<std::vector<Rational>> b;  // b_ij = f_i(0) - f_j(0)
  std::vector<std::vector<Rational>> c;  // c_ij = f_i(inf) - f_j(inf)
  std::vector<Rational> S0;              // non-integer roots +-2 b_ij, sorted
  std::vector<Rational> Sinf;            // non-integer roots +-2 c_ij, sorted
};

/// Integer roots are always present and are not listed.
IndicialSpectrum indicial_spectrum(const AtildeSpec& spec);

/// Samples fn(r, theta) on the grid.
template <class Fn>
std::vector<std::complex<double>> sample_polar(const PolarGrid& grid, Fn&& fn) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(grid.nodes()));
  for (int k = 0; k < grid.n_r; ++k)
    for (int l = 0; l < grid.n_theta; ++l) out[k * grid.n_theta + l] = fn(grid.radius(k), grid.theta(l));
  return out;
}

/// r^{-2}((r d_r)^2 + (d_theta + 2 i b)^2) applied to a scalar field with
/// constant b. Throws GridTooCoarse below 64 x 64.
std::vector<std::complex<double>> decoupled_apply(double b, const PolarGrid& grid,
                                                  std::span<const std::complex<double>> field,
                                                  Backend backend = Backend::OpenMP);

/// The (i, j) component of Delta_A~ (zero-based rows), b = f_i - f_j taken
/// per circle. `toda` is only consulted for AMod blocks.
std::vector<std::complex<double>> decoupled_apply(const AtildeSpec& spec, int i, int j,
                                                  const PolarGrid& grid,
                                                  std::span<const std::complex<double>> field,
                                                  const TodaFamily& toda,
                                                  Backend backend = Backend::OpenMP);

/// Hermitian trace-free test section gamma(r, theta) = beta(r) sum_l H_l e^{i l theta},
/// l = -2..2, H_{-l} = H_l^dagger, with a C^2 bump beta supported in
/// [r_lo, r_hi]. Deterministic in `seed`.
struct TestSection {
  PolarGrid grid;
  int n = 0;
  std::vector<std::complex<double>> values;  // n x n column-major per node
};

TestSection random_test_section(int n, const PolarGrid& grid, std::uint64_t seed, double r_lo = 0.3,
                                double r_hi = 0.9);
TestSection zero_test_section(int n, const PolarGrid& grid);

struct EnergyIdentity {
  double lhs = 0.0;  // <L_t gamma, gamma>
  double rhs = 0.0;  // |d_A gamma|^2 + 2t^2 |[Phi,gamma]|^2 + 2t^2 |[Phi^*,gamma]|^2
  EnergyTerms terms;
  double relative_gap() const;
};

/// Both sides of the energy identity for the given field (normally the
/// approximate field), on the quadrature of the section's grid. Throws
/// BoundarySupport if gamma is nonzero within 3 cells of either radial edge.
EnergyIdentity energy_identity(const ModelField& field, const TestSection& gamma,
                               Backend backend = Backend::OpenMP);

/// 2 |lambda_i - lambda_j|^2.
double m_phi_entry(std::complex<double> lambda_i, std::complex<double> lambda_j);

/// Max of m_phi_entry over eigenvalue pairs of t Phi at the sample points.
double m_phi_bound(const ModelField& field, std::span<const std::complex<double>> points);

struct LimitRow {
  double t = 0.0;
  int block = 0;
  BlockKind kind = BlockKind::AZero;
  double deviation = 0.0;
};

struct LimitTable {
  std::vector<LimitRow> rows;
  bool monotone = true;  // deviation non-increasing in t for every block
};

/// Compares the connection coefficients of the approximate field at
/// z = t^{-J/(J+1)} w with the A~ coefficients at w.
LimitTable rescaled_laplacian_limit(const ClusterPartition& p, const TodaFamily& toda, int J,
                                    std::span<const double> t_values,
                                    std::span<const std::complex<double>> samples);

struct GrowthRow {
  double t = 0.0;
  double sup_a = 0.0;   // sup |a_i(r)|
  double sup_da = 0.0;  // sup |d a_i / dr|
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  double exponent = 0.0;       // log-log slope of sup_da against t
  double sup_a_variation = 0.0;  // (max - min) / max of sup_a
};

/// Sup norms over r in [r_lo, 1] of the connection coefficients and their
/// radial derivative, sampled on `samples` log-spaced radii. The default is
/// the approximate (cut-off) field; FieldKind::Model drops the cutoff.
GrowthReport connection_growth(const ClusterPartition& p, const TodaFamily& toda,
                               std::span<const double> t_values, double r_lo = 1e-3,
                               int samples = 4000, FieldKind kind = FieldKind::Approximate);

}  // namespace hglue
