#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hglue {

/// Newton / discretization settings for the radial Toda boundary-value problem.
struct SolverConfig {
  double tolerance = 1e-10;  // max-norm of the discrete residual (log-radius form)
  int max_iterations = 60;
  int grid_size = 2000;
  double r_min = 1e-4;
  double r_max = 6.0;
  int continuation_steps = 8;

  /// Throws InvalidConfig unless tolerance > 0, r_min < 1/4, r_max >= 2,
  /// grid_size >= 16, max_iterations >= 1 and continuation_steps >= 1.
  void validate() const;

  bool operator==(const SolverConfig&) const = default;
};

/// Log-uniform grid of radii. Endpoints are stored exactly.
class RadialGrid {
 public:
  RadialGrid(double r_min, double r_max, int size);

  int size() const noexcept { return static_cast<int>(points_.size()); }
  double operator[](int k) const { return points_[static_cast<std::size_t>(k)]; }
  std::span<const double> points() const noexcept { return points_; }
  double r_min() const noexcept { return points_.front(); }
  double r_max() const noexcept { return points_.back(); }
  double log_min() const noexcept { return log_min_; }
  double log_step() const noexcept { return log_step_; }

  /// Same grid with every radius multiplied by `factor`.
  RadialGrid scaled(double factor) const;

 private:
  RadialGrid() = default;
  std::vector<double> points_;
  double log_min_ = 0.0;
  double log_step_ = 0.0;
};

/// Values and radial derivatives of u_{K,1..K} at one radius. `laplacian` is
/// u'' + u'/r, evaluated without the cancellation of forming both terms.
struct RadialJet {
  std::vector<double> value;
  std::vector<double> d1;
  std::vector<double> d2;
  std::vector<double> laplacian;
};

/// Converged solution of the cyclic Toda system for one rank K.
///
/// The object is immutable and cheap to copy (shared state). Rows are
/// zero-based: row i holds u_{K,i+1}. Only the first floor(K/2) rows are
/// independent; the rest follow from u_{K,i} = -u_{K,K+1-i}, and for odd K the
/// middle row is identically zero. The solution lives in the frame of its
/// parameter t: u_{K,i,t}(r) = u_{K,i}(t^{K/(K+1)} r).
class TodaSolution {
 public:
  /// Builds a t = 1 solution from grid values. Only the independent rows of
  /// `u` are read; derived data (nodal derivatives, far-field tail) is
  /// recomputed deterministically from them.
  TodaSolution(int K, const SolverConfig& config,
               const std::vector<std::vector<double>>& u, double residual_norm);

  int rank() const noexcept;
  double t() const noexcept;
  const RadialGrid& grid() const noexcept;
  const SolverConfig& config() const noexcept;
  double residual_norm() const noexcept;
  std::span<const double> u(int row) const;

  /// Evaluates all K functions at radius r of this solution's frame.
  /// Inside the grid: septic Hermite interpolation in log r. Beyond r_max:
  /// modal modified-Bessel tail. Throws BelowGrid for r < r_min.
  RadialJet jet(double r) const;

  /// The same family member viewed at parameter t (grid radii divided by
  /// t^{K/(K+1)} relative to t = 1).
  TodaSolution rescaled(double t) const;

  /// Far-field decay rates c_k (in the zeta variable) of the reduced modes.
  std::span<const double> decay_rates() const;

  /// zeta(r) = t * (2K/(K+1)) r^{(K+1)/K} in this solution's frame.
  double zeta(double r) const;

  struct Data;

 private:
  explicit TodaSolution(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
};

/// Solves (1/4)(u'' + u'/r) = r^{2/K} (e^{u_i - u_{i+1}} - e^{u_{i-1} - u_i})
/// with cyclic indices, r u_i'(r_min) = 2 alpha_{K,i} and a linearized Bessel
/// far-field condition at r_max. Throws InvalidConfig or NonConvergence.
TodaSolution solve_toda(int K, const SolverConfig& config = {});

/// Max over interior grid nodes of the discrete residual of row 0 in the
/// sinh form u'' + u'/r = 8 t^2 r sinh(2u). Throws WrongRank unless K = 2.
double painleve_residual(const TodaSolution& solution);

/// Max over all grid nodes of the discrete cyclic-Toda residual, in the same
/// (log-radius) units as SolverConfig::tolerance.
double toda_residual(const TodaSolution& solution);

/// u_{K,i,t}(r) for i = 1..K. Throws BelowGrid when t^{K/(K+1)} r < r_min.
std::vector<double> evaluate_rescaled(const TodaSolution& solution, double t, double r);

/// Jet of u_{K,.,t} at r (derivatives with respect to r).
RadialJet jet_rescaled(const TodaSolution& solution, double t, double r);

/// C_K = 4 sin^2(pi/K): the smallest eigenvalue of the linearized cyclic
/// system on the symmetric sector (C_2 = 4, C_3 = 3, C_4 = 2, ...).
double toda_linear_constant(int K);

struct AsymptoticReport {
  double epsilon = 0.0;
  double r_epsilon = 0.0;     // first grid radius after which ||u|| < epsilon
  double c_epsilon = 0.0;     // chosen as 1 / (1 - epsilon)
  double c_rank = 0.0;        // C_K
  double rate = 0.0;          // c = (2 C_eps C_K)^{-1/2}
  int points_checked = 0;
  double min_log_margin = 0.0;  // min over checked points of log(bound / ||u||^2)
  bool holds = false;
};

/// Checks ||u||^2(rho) <= eps^2 K0(c zeta(rho)) / K0(c zeta(R_eps)) beyond
/// R_eps. Throws NotDecayed when ||u(r_max)|| >= epsilon.
AsymptoticReport asymptotic_check(const TodaSolution& solution, double epsilon);

}  // namespace hglue
