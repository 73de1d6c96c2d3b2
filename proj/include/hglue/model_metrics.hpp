#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "hglue/partition.hpp"
#include "hglue/toda.hpp"

namespace hglue {

using Rational = boost::rational<long long>;

/// alpha_{K,i} = (2i - (K+1)) / (2K), i = 1..K. Throws IndexOutOfRange.
Rational alpha(int K, int i);
double alpha_value(int K, int i);

/// Toda solutions keyed by rank K.
class TodaFamily {
 public:
  TodaFamily() = default;
  void add(TodaSolution solution);
  bool contains(int K) const { return solutions_.count(K) != 0; }
  /// Throws MissingTodaSolution.
  const TodaSolution& at(int K) const;
  std::vector<int> ranks() const;

  /// Solves every rank K >= 2 that occurs in the partition.
  static TodaFamily solve_for(const ClusterPartition& p, const SolverConfig& config = {});

 private:
  std::map<int, TodaSolution> solutions_;
};

/// Layout of a diagonal metric: one exponent per entry and, for entries that
/// carry a Toda correction, the (K, i) it refers to (i is 1-based; K = 0 means
/// no correction).
struct MetricDiag {
  struct Entry {
    Rational alpha;
    int K = 0;
    int i = 0;
  };
  std::vector<Entry> entries;
  std::optional<double> t;  // empty for the limiting metric
  bool cutoff_applied = false;
};

enum class MetricKind { Limiting, Model, Approximate };

MetricDiag metric_layout(const ClusterPartition& p, MetricKind kind, double t = 1.0);

/// Diagonal of h_l: entry (j, i) = |z_j|^{-2 alpha_{K_j,i}}. `block_radii`
/// holds |z_j| for every block. Throws ZeroRadius.
std::vector<double> limiting_metric(const ClusterPartition& p, std::span<const double> block_radii);

/// Diagonal of h_t^mod: limiting entries times exp(u_{K_j,i,t}(|z_j|)).
/// Throws MissingTodaSolution, ZeroRadius.
std::vector<double> model_metric(const ClusterPartition& p, const TodaFamily& toda, double t,
                                 std::span<const double> block_radii);

/// Unitary-gauge pair at one point. The connection is
/// A = diag(a) (dz/z - dzbar/zbar), so A_z = diag(a)/z and A_zbar = -diag(a)/zbar.
/// `Phi` is the dz-coefficient of the Higgs field without the factor t, so the
/// equations read F_A + t^2 [Phi, Phi^dagger] = 0.
struct FieldSample {
  std::complex<double> z;
  double t = 1.0;
  Eigen::VectorXd a;
  Eigen::MatrixXcd Phi;

  Eigen::MatrixXcd A_z() const;
  Eigen::MatrixXcd A_zbar() const;
};

enum class FieldKind { Model, Approximate };

/// Evaluates (A_t, Phi_t) of the model (or, with the cutoff inserted,
/// approximate) family pointwise.
class ModelField {
 public:
  ModelField(ClusterPartition p, TodaFamily toda, double t, FieldKind kind = FieldKind::Model);

  const ClusterPartition& partition() const noexcept { return partition_; }
  const TodaFamily& toda() const noexcept { return toda_; }
  double t() const noexcept { return t_; }
  FieldKind kind() const noexcept { return kind_; }

  /// Throws OriginSingularity at z = 0 when some block has K >= 2.
  FieldSample sample(std::complex<double> z) const;
  /// Only the diagonal connection coefficients a_i.
  Eigen::VectorXd connection(std::complex<double> z) const;

 private:
  ClusterPartition partition_;
  TodaFamily toda_;
  double t_;
  FieldKind kind_;
};

FieldSample model_unitary_pair(const ClusterPartition& p, const TodaFamily& toda, double t,
                               std::complex<double> z);

/// (F_A + t^2 [Phi, Phi^dagger]) at z as the anti-hermitian coefficient of
/// dx ^ dy (dz ^ dzbar = -2i dx ^ dy). The curvature is differenced on a
/// five-point stencil of half-width `h`. Throws OriginSingularity and
/// StencilOutOfDomain.
Eigen::MatrixXcd hitchin_residual(const ModelField& field, std::complex<double> z,
                                  double h = 1e-4);
Eigen::MatrixXcd hitchin_residual_model(const ClusterPartition& p, const TodaFamily& toda,
                                        double t, std::complex<double> z, double h = 1e-4);

}  // namespace hglue
