#pragma once

#include <span>
#include <vector>

#include "hglue/model_metrics.hpp"
#include "hglue/polar_kernels.hpp"

namespace hglue {

/// Diagonal of h_t^app: |z_j|^{-2 alpha} exp(chi(|z_j|) u_{K_j,i,t}(|z_j|)).
/// Throws ZeroRadius, MissingTodaSolution.
std::vector<double> approx_metric(const ClusterPartition& p, const TodaFamily& toda, double t,
                                  std::span<const double> block_radii);

/// The K diagonal entries of F + t^2 [phi, phi^dagger] for the glued rank-K
/// block at radius r, as coefficients of dz ^ dzbar:
/// -(1/4) Lap(chi u_i) + t^2 r^{2/K} (e^{chi(u_i - u_{i+1})} - e^{chi(u_{i-1} - u_i)}).
std::vector<double> error_entries(const TodaSolution& solution, double t, double r);

/// Single entry, i = 1..K. Throws MissingTodaSolution, IndexOutOfRange.
double error_entry(const TodaFamily& toda, int K, int i, double t, double r);

/// Composite Gauss-Legendre (15 nodes per panel) in r: geometrically graded
/// panels on [r_lo, 1/2], uniform panels on the gluing annulus [1/2, 1].
struct QuadratureSpec {
  int inner_panels = 24;
  int annulus_panels = 8;
  double r_lo = 0.0;            // 0: lowest radius resolved by the Toda grid at t
  double relative_check = 0.01; // allowed change against half the panels
  bool check = true;

  QuadratureSpec refined() const;
  int annulus_nodes() const;
};

struct ErrorNorm {
  double t = 0.0;
  double l2 = 0.0;                  // whole disk
  std::vector<double> block_l2;     // one per block
  double inner_l2 = 0.0;            // part from r < 1/2 (numerical residual only)
  double relative_change = 0.0;     // against the half-resolution rule
};

/// L^2 norm over the unit disk of the block-diagonal error (flat metric,
/// |dz ^ dzbar| = 2). Throws QuadratureTooCoarse.
ErrorNorm error_l2_detail(const ClusterPartition& p, const TodaFamily& toda, double t,
                          const QuadratureSpec& spec = {});
double error_l2(const ClusterPartition& p, const TodaFamily& toda, double t,
                const QuadratureSpec& spec = {});

/// error_l2_detail for each t; the OpenMP back end evaluates the values of t
/// concurrently and returns the same numbers.
std::vector<ErrorNorm> error_sweep(const ClusterPartition& p, const TodaFamily& toda,
                                   std::span<const double> t_values, const QuadratureSpec& spec = {},
                                   Backend backend = Backend::OpenMP);

struct DecayReport {
  std::vector<double> t_values;
  std::vector<double> l2_norms;
  double c = 0.0;
  double delta = 0.0;
  double residual = 0.0;  // RMS of the log-space fit residuals
  double threshold = 0.2;
  bool pass = false;
};

/// Least squares fit of log(norm) = log c - delta t. Passes iff delta > 0 and
/// residual < threshold. Throws DegenerateFit.
DecayReport fit_decay(std::span<const double> t_values, std::span<const double> norms,
                      double threshold = 0.2);

}  // namespace hglue
