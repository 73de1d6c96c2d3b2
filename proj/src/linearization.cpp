#include "hglue/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "hglue/cutoff.hpp"
#include "hglue/errors.hpp"

namespace hglue {

const char* to_string(BlockKind kind) noexcept {
  switch (kind) {
    case BlockKind::AInf: return "A_inf";
    case BlockKind::AMod: return "A_mod";
    case BlockKind::AZero: return "A_zero";
  }
  return "?";
}

int AtildeSpec::block_of(int row) const {
  for (int j = partition.block_count() - 1; j >= 0; --j)
    if (row >= partition.offset(j)) return j;
  throw Error(ErrorKind::IndexOutOfRange, "row out of range");
}

AtildeSpec build_atilde(const ClusterPartition& p, int J) {
  if (J < 1) throw Error(ErrorKind::InvalidConfig, "J must be positive");
  AtildeSpec spec{p, J, {}};
  for (const auto& b : p.blocks()) {
    if (b.K > J) {
      spec.kinds.push_back(BlockKind::AInf);
    } else if (b.K == J && b.K >= 2) {
      spec.kinds.push_back(BlockKind::AMod);
    } else {
      spec.kinds.push_back(BlockKind::AZero);
    }
  }
  return spec;
}

namespace {

void check_row(const AtildeSpec& spec, int row) {
  if (row < 0 || row >= spec.partition.n()) throw Error(ErrorKind::IndexOutOfRange, "row out of range");
}

// (K, i) with i 1-based for a matrix row.
std::pair<int, int> rank_index(const AtildeSpec& spec, int row) {
  const int j = spec.block_of(row);
  return {spec.partition.block(j).K, row - spec.partition.offset(j) + 1};
}

}  // namespace

Rational f_at_zero(const AtildeSpec& spec, int row) {
  check_row(spec, row);
  if (spec.kinds[spec.block_of(row)] != BlockKind::AInf) return Rational(0);
  const auto [K, i] = rank_index(spec, row);
  return -alpha(K, i) / 2;
}

Rational f_at_infinity(const AtildeSpec& spec, int row) {
  check_row(spec, row);
  if (spec.kinds[spec.block_of(row)] == BlockKind::AZero) return Rational(0);
  const auto [K, i] = rank_index(spec, row);
  return -alpha(K, i) / 2;
}

std::vector<double> atilde_coefficients(const AtildeSpec& spec, const TodaFamily& toda, double w_abs) {
  const ClusterPartition& p = spec.partition;
  std::vector<double> f(static_cast<std::size_t>(p.n()), 0.0);
  for (int j = 0; j < p.block_count(); ++j) {
    const auto& b = p.block(j);
    if (spec.kinds[j] == BlockKind::AZero) continue;
    const RadialJet* jet = nullptr;
    RadialJet storage;
    const double rho = std::abs(b.f_prime0) * w_abs;
    if (spec.kinds[j] == BlockKind::AMod) {
      if (!(w_abs > 0.0)) throw Error(ErrorKind::OriginSingularity, "A_mod is singular at w = 0");
      storage = jet_rescaled(toda.at(b.K), 1.0, rho);
      jet = &storage;
    }
    for (int i = 0; i < b.K; ++i) {
      double value = -alpha_value(b.K, i + 1) / 2.0;
      if (jet) value += rho * jet->d1[i] / 4.0;
      f[p.offset(j) + i] = value;
    }
  }
  return f;
}

IndicialSpectrum indicial_spectrum(const AtildeSpec& spec) {
  const int n = spec.partition.n();
  IndicialSpectrum out;
  out.b.assign(n, std::vector<Rational>(n));
  out.c.assign(n, std::vector<Rational>(n));
  std::set<Rational> s0, sinf;
  for (int i = 0; i < n; ++i) {
    const Rational fi0 = f_at_zero(spec, i), fiinf = f_at_infinity(spec, i);
    for (int j = 0; j < n; ++j) {
      out.b[i][j] = fi0 - f_at_zero(spec, j);
      out.c[i][j] = fiinf - f_at_infinity(spec, j);
      for (auto [value, roots] : {std::pair{out.b[i][j], &s0}, std::pair{out.c[i][j], &sinf}}) {
        const Rational root = 2 * value;
        if (root.denominator() == 1) continue;
        roots->insert(root);
        roots->insert(-root);
      }
    }
  }
  out.S0.assign(s0.begin(), s0.end());
  out.Sinf.assign(sinf.begin(), sinf.end());
  return out;
}

std::vector<std::complex<double>> decoupled_apply(double b, const PolarGrid& grid,
                                                  std::span<const std::complex<double>> field,
                                                  Backend backend) {
  grid.validate(64);
  std::vector<double> b_row(static_cast<std::size_t>(grid.n_r), b);
  std::vector<std::complex<double>> out(field.size());
  kernels::decoupled_apply(backend, grid, b_row, field, out);
  return out;
}

std::vector<std::complex<double>> decoupled_apply(const AtildeSpec& spec, int i, int j,
                                                  const PolarGrid& grid,
                                                  std::span<const std::complex<double>> field,
                                                  const TodaFamily& toda, Backend backend) {
  check_row(spec, i);
  check_row(spec, j);
  grid.validate(64);
  const bool varies = spec.kinds[spec.block_of(i)] == BlockKind::AMod ||
                      spec.kinds[spec.block_of(j)] == BlockKind::AMod;
  std::vector<double> b_row(static_cast<std::size_t>(grid.n_r));
  if (varies) {
    for (int k = 0; k < grid.n_r; ++k) {
      const std::vector<double> f = atilde_coefficients(spec, toda, grid.radius(k));
      b_row[k] = f[i] - f[j];
    }
  } else {
    std::fill(b_row.begin(), b_row.end(),
              boost::rational_cast<double>(f_at_zero(spec, i) - f_at_zero(spec, j)));
  }
  std::vector<std::complex<double>> out(field.size());
  kernels::decoupled_apply(backend, grid, b_row, field, out);
  return out;
}

TestSection zero_test_section(int n, const PolarGrid& grid) {
  return {grid, n, std::vector<std::complex<double>>(static_cast<std::size_t>(grid.nodes()) * n * n)};
}

TestSection random_test_section(int n, const PolarGrid& grid, std::uint64_t seed, double r_lo,
                                double r_hi) {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "test section needs n >= 1");
  if (!(r_lo < r_hi)) throw Error(ErrorKind::InvalidConfig, "bump support must be an interval");
  using Mat = Eigen::MatrixXcd;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_matrix = [&] {
    Mat M(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) M(i, j) = {normal(rng), normal(rng)};
    M -= (M.trace() / static_cast<double>(n)) * Mat::Identity(n, n);
    return M;
  };
  Mat H[3];
  H[0] = random_matrix();
  H[0] = (H[0] + H[0].adjoint()).eval() / 2.0;
  H[1] = random_matrix();
  H[2] = random_matrix();

  TestSection out = zero_test_section(n, grid);
  const double mid = 0.5 * (r_lo + r_hi), half = 0.5 * (r_hi - r_lo);
  for (int k = 0; k < grid.n_r; ++k) {
    const double x = (grid.radius(k) - mid) / half;
    if (std::abs(x) >= 1.0) continue;
    const double bump = std::pow(1.0 - x * x, 3);
    for (int l = 0; l < grid.n_theta; ++l) {
      const double th = grid.theta(l);
      Mat G = H[0];
      for (int m = 1; m <= 2; ++m) {
        const std::complex<double> e = std::polar(1.0, m * th);
        G += H[m] * e + H[m].adjoint() * std::conj(e);
      }
      G *= bump;
      std::copy(G.data(), G.data() + n * n, out.values.begin() + (static_cast<std::ptrdiff_t>(k) * grid.n_theta + l) * n * n);
    }
  }
  return out;
}

double EnergyIdentity::relative_gap() const {
  const double gap = std::abs(lhs - rhs);
  return rhs > 0.0 ? gap / rhs : gap;
}

EnergyIdentity energy_identity(const ModelField& field, const TestSection& gamma, Backend backend) {
  const PolarGrid& grid = gamma.grid;
  grid.validate(8);
  const int n = gamma.n;
  if (n != field.partition().n()) throw Error(ErrorKind::InvalidConfig, "test section rank mismatch");
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const std::size_t row = static_cast<std::size_t>(grid.n_theta) * nn;
  for (int k = 0; k < grid.n_r; ++k) {
    if (k >= 3 && k < grid.n_r - 3) continue;
    const auto first = gamma.values.begin() + static_cast<std::ptrdiff_t>(k * row);
    if (std::any_of(first, first + static_cast<std::ptrdiff_t>(row),
                    [](std::complex<double> v) { return v != 0.0; })) {
      throw Error(ErrorKind::BoundarySupport, "test section is nonzero near the annulus boundary");
    }
  }

  std::vector<double> a(static_cast<std::size_t>(grid.n_r) * n);
  std::vector<std::complex<double>> phi(static_cast<std::size_t>(grid.nodes()) * nn);
  for (int k = 0; k < grid.n_r; ++k) {
    const Eigen::VectorXd ak = field.connection(grid.radius(k));
    std::copy(ak.data(), ak.data() + n, a.begin() + static_cast<std::ptrdiff_t>(k) * n);
    for (int l = 0; l < grid.n_theta; ++l) {
      const FieldSample s = field.sample(std::polar(grid.radius(k), grid.theta(l)));
      std::copy(s.Phi.data(), s.Phi.data() + nn,
                phi.begin() + (static_cast<std::ptrdiff_t>(k) * grid.n_theta + l) * nn);
    }
  }
  EnergyIdentity out;
  out.terms = kernels::energy_terms(backend, grid, n, a, phi, gamma.values, field.t());
  out.lhs = out.terms.laplace_lhs + out.terms.mass_lhs;
  out.rhs = out.terms.gradient_rhs + out.terms.mass_rhs;
  return out;
}

double m_phi_entry(std::complex<double> lambda_i, std::complex<double> lambda_j) {
  return 2.0 * std::norm(lambda_i - lambda_j);
}

double m_phi_bound(const ModelField& field, std::span<const std::complex<double>> points) {
  double bound = 0.0;
  for (const auto& z : points) {
    const Eigen::MatrixXcd tPhi = field.t() * field.sample(z).Phi;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(tPhi, false);
    const auto& ev = eig.eigenvalues();
    for (int i = 0; i < ev.size(); ++i)
      for (int j = i + 1; j < ev.size(); ++j) bound = std::max(bound, m_phi_entry(ev(i), ev(j)));
  }
  return bound;
}

LimitTable rescaled_laplacian_limit(const ClusterPartition& p, const TodaFamily& toda, int J,
                                    std::span<const double> t_values,
                                    std::span<const std::complex<double>> samples) {
  const AtildeSpec spec = build_atilde(p, J);
  LimitTable table;
  std::vector<double> previous(static_cast<std::size_t>(p.block_count()),
                               std::numeric_limits<double>::infinity());
  for (double t : t_values) {
    const ModelField field(p, toda, t, FieldKind::Approximate);
    const double shrink = std::pow(t, -J / (J + 1.0));
    std::vector<double> worst(static_cast<std::size_t>(p.block_count()), 0.0);
    for (const auto& w : samples) {
      const Eigen::VectorXd a = field.connection(shrink * w);
      const std::vector<double> target = atilde_coefficients(spec, toda, std::abs(w));
      for (int j = 0; j < p.block_count(); ++j)
        for (int i = 0; i < p.block(j).K; ++i) {
          const int row = p.offset(j) + i;
          worst[j] = std::max(worst[j], std::abs(a(row) - target[row]));
        }
    }
    for (int j = 0; j < p.block_count(); ++j) {
      table.rows.push_back({t, j, spec.kinds[j], worst[j]});
      if (worst[j] > previous[j]) table.monotone = false;
      previous[j] = worst[j];
    }
  }
  return table;
}

GrowthReport connection_growth(const ClusterPartition& p, const TodaFamily& toda,
                               std::span<const double> t_values, double r_lo, int samples,
                               FieldKind kind) {
  if (!(r_lo > 0.0 && r_lo < 1.0) || samples < 2) {
    throw Error(ErrorKind::InvalidConfig, "growth sampling needs 0 < r_lo < 1 and >= 2 samples");
  }
  GrowthReport report;
  for (double t : t_values) {
    GrowthRow row{t, 0.0, 0.0};
    for (int j = 0; j < p.block_count(); ++j) {
      const auto& b = p.block(j);
      if (b.K == 1) continue;
      const double scale = std::abs(b.f_prime0);
      for (int q = 0; q < samples; ++q) {
        const double r = r_lo * std::pow(1.0 / r_lo, q / (samples - 1.0));
        const double rj = scale * r;
        const CutoffJet chi = kind == FieldKind::Approximate ? cutoff(rj) : CutoffJet{1.0, 0.0, 0.0};
        const RadialJet jet = jet_rescaled(toda.at(b.K), t, rj);
        for (int i = 0; i < b.K; ++i) {
          const double u = jet.value[i], du = jet.d1[i];
          const double dU = chi.d1 * u + chi.value * du;
          const double lapU = chi.value * jet.laplacian[i] + chi.d2 * u + 2.0 * chi.d1 * du + chi.d1 * u / rj;
          const double a = -alpha_value(b.K, i + 1) / 2.0 + rj * dU / 4.0;
          // d a / dr = (r_j / 4) Lap(chi u) * d r_j / dr
          const double da = scale * rj * lapU / 4.0;
          row.sup_a = std::max(row.sup_a, std::abs(a));
          row.sup_da = std::max(row.sup_da, std::abs(da));
        }
      }
    }
    report.rows.push_back(row);
  }
  if (report.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, lo = report.rows[0].sup_a, hi = lo;
    const auto n = static_cast<double>(report.rows.size());
    bool positive = true;
    for (const auto& r : report.rows) {
      lo = std::min(lo, r.sup_a);
      hi = std::max(hi, r.sup_a);
      if (!(r.sup_da > 0.0)) {
        positive = false;
        continue;
      }
      const double x = std::log(r.t), y = std::log(r.sup_da);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    if (positive) report.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    report.sup_a_variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
  }
  return report;
}

}  // namespace hglue
