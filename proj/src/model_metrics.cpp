#include "hglue/model_metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hglue/cutoff.hpp"
#include "hglue/errors.hpp"

namespace hglue {

Rational alpha(int K, int i) {
  if (K < 1 || i < 1 || i > K) {
    throw Error(ErrorKind::IndexOutOfRange, fmt::format("alpha index ({}, {}) out of range", K, i));
  }
  return Rational(2 * i - (K + 1), 2 * K);
}

double alpha_value(int K, int i) { return boost::rational_cast<double>(alpha(K, i)); }

void TodaFamily::add(TodaSolution solution) {
  const int K = solution.rank();
  solutions_.insert_or_assign(K, std::move(solution));
}

const TodaSolution& TodaFamily::at(int K) const {
  const auto it = solutions_.find(K);
  if (it == solutions_.end()) {
    throw Error(ErrorKind::MissingTodaSolution, fmt::format("no Toda solution for K = {}", K));
  }
  return it->second;
}

std::vector<int> TodaFamily::ranks() const {
  std::vector<int> out;
  for (const auto& [K, sol] : solutions_) out.push_back(K);
  return out;
}

TodaFamily TodaFamily::solve_for(const ClusterPartition& p, const SolverConfig& config) {
  TodaFamily family;
  for (int K : p.toda_ranks()) family.add(solve_toda(K, config));
  return family;
}

MetricDiag metric_layout(const ClusterPartition& p, MetricKind kind, double t) {
  MetricDiag out;
  if (kind != MetricKind::Limiting) out.t = t;
  out.cutoff_applied = kind == MetricKind::Approximate;
  for (const auto& b : p.blocks()) {
    for (int i = 1; i <= b.K; ++i) {
      MetricDiag::Entry e;
      e.alpha = alpha(b.K, i);
      if (kind != MetricKind::Limiting && b.K >= 2) {
        e.K = b.K;
        e.i = i;
      }
      out.entries.push_back(e);
    }
  }
  return out;
}

namespace {

void check_radii(const ClusterPartition& p, std::span<const double> radii) {
  if (static_cast<int>(radii.size()) != p.block_count()) {
    throw Error(ErrorKind::InvalidConfig, "need one radius per block");
  }
  for (double r : radii) {
    if (!(r > 0.0)) throw Error(ErrorKind::ZeroRadius, "metric is singular at |z| = 0");
  }
}

// chi-weighted Toda data for one block at radius r: U = chi u and dU/dr.
struct BlockProfile {
  std::vector<double> U;
  std::vector<double> dU;
};

BlockProfile block_profile(const TodaFamily& toda, int K, double t, double r, bool with_cutoff) {
  BlockProfile out{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
  const CutoffJet chi = with_cutoff ? cutoff(r) : CutoffJet{1.0, 0.0, 0.0};
  if (chi.value == 0.0 && chi.d1 == 0.0) return out;
  const RadialJet jet = jet_rescaled(toda.at(K), t, r);
  for (int i = 0; i < K; ++i) {
    out.U[i] = chi.value * jet.value[i];
    out.dU[i] = chi.d1 * jet.value[i] + chi.value * jet.d1[i];
  }
  return out;
}

}  // namespace

std::vector<double> limiting_metric(const ClusterPartition& p, std::span<const double> block_radii) {
  check_radii(p, block_radii);
  std::vector<double> out;
  out.reserve(p.n());
  for (int j = 0; j < p.block_count(); ++j) {
    const int K = p.block(j).K;
    const double log_r = std::log(block_radii[j]);
    for (int i = 1; i <= K; ++i) out.push_back(std::exp(-2.0 * alpha_value(K, i) * log_r));
  }
  return out;
}

std::vector<double> model_metric(const ClusterPartition& p, const TodaFamily& toda, double t,
                                 std::span<const double> block_radii) {
  check_radii(p, block_radii);
  std::vector<double> out;
  out.reserve(p.n());
  for (int j = 0; j < p.block_count(); ++j) {
    const int K = p.block(j).K;
    const double r = block_radii[j];
    if (K == 1) {
      out.push_back(1.0);
      continue;
    }
    const std::vector<double> u = evaluate_rescaled(toda.at(K), t, r);
    const double log_r = std::log(r);
    for (int i = 1; i <= K; ++i) out.push_back(std::exp(-2.0 * alpha_value(K, i) * log_r + u[i - 1]));
  }
  return out;
}

Eigen::MatrixXcd FieldSample::A_z() const {
  return (a.cast<std::complex<double>>() / z).asDiagonal();
}

Eigen::MatrixXcd FieldSample::A_zbar() const {
  return (-a.cast<std::complex<double>>() / std::conj(z)).asDiagonal();
}

ModelField::ModelField(ClusterPartition p, TodaFamily toda, double t, FieldKind kind)
    : partition_(std::move(p)), toda_(std::move(toda)), t_(t), kind_(kind) {
  if (!(t_ > 0.0)) throw Error(ErrorKind::DomainError, "t must be positive");
  for (int K : partition_.toda_ranks()) toda_.at(K);
}

Eigen::VectorXd ModelField::connection(std::complex<double> z) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(partition_.n());
  const double r = std::abs(z);
  for (int j = 0; j < partition_.block_count(); ++j) {
    const auto& b = partition_.block(j);
    if (b.K == 1) continue;
    if (r == 0.0) throw Error(ErrorKind::OriginSingularity, "model field is singular at z = 0");
    const double rj = std::abs(b.f_prime0) * r;
    const BlockProfile prof = block_profile(toda_, b.K, t_, rj, kind_ == FieldKind::Approximate);
    for (int i = 0; i < b.K; ++i) {
      a(partition_.offset(j) + i) = -alpha_value(b.K, i + 1) / 2.0 + rj * prof.dU[i] / 4.0;
    }
  }
  return a;
}

FieldSample ModelField::sample(std::complex<double> z) const {
  FieldSample s;
  s.z = z;
  s.t = t_;
  s.a = connection(z);
  const int n = partition_.n();
  s.Phi = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < partition_.block_count(); ++j) {
    const auto& b = partition_.block(j);
    const int off = partition_.offset(j);
    for (int i = 0; i < b.K; ++i) s.Phi(off + i, off + i) = b.lambda_shift;
    if (b.K == 1) continue;
    const std::complex<double> zj = b.f_prime0 * z;
    const double rj = std::abs(zj);
    const BlockProfile prof = block_profile(toda_, b.K, t_, rj, kind_ == FieldKind::Approximate);
    const double root = std::pow(rj, 1.0 / b.K);
    for (int i = 0; i + 1 < b.K; ++i) {
      s.Phi(off + i, off + i + 1) += b.f_prime0 * root * std::exp((prof.U[i] - prof.U[i + 1]) / 2.0);
    }
    s.Phi(off + b.K - 1, off) += b.f_prime0 * zj * (root / rj) *
                                 std::exp((prof.U[b.K - 1] - prof.U[0]) / 2.0);
  }
  return s;
}

FieldSample model_unitary_pair(const ClusterPartition& p, const TodaFamily& toda, double t,
                               std::complex<double> z) {
  return ModelField(p, toda, t).sample(z);
}

Eigen::MatrixXcd hitchin_residual(const ModelField& field, std::complex<double> z, double h) {
  using C = std::complex<double>;
  const bool singular = !field.partition().toda_ranks().empty();
  if (singular && z == C{0.0, 0.0}) {
    throw Error(ErrorKind::OriginSingularity, "model field is singular at z = 0");
  }
  if (!(h > 0.0)) throw Error(ErrorKind::DomainError, "stencil width must be positive");
  if (singular && std::abs(z) <= 2.0 * h) {
    throw Error(ErrorKind::StencilOutOfDomain, "stencil reaches the origin");
  }

  // Differences of A_z and A_zbar (diagonal) on the five-point stencil.
  const C offsets[4] = {{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}};
  Eigen::VectorXcd Az[4], Azb[4];
  try {
    for (int k = 0; k < 4; ++k) {
      const C w = z + offsets[k];
      const Eigen::VectorXcd a = field.connection(w).cast<C>();
      Az[k] = a / w;
      Azb[k] = -a / std::conj(w);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BelowGrid) throw Error(ErrorKind::StencilOutOfDomain, e.what());
    throw;
  }
  const C I{0.0, 1.0};
  const Eigen::VectorXcd dz_Azb = ((Azb[0] - Azb[1]) - I * (Azb[2] - Azb[3])) / (4.0 * h);
  const Eigen::VectorXcd dzb_Az = ((Az[0] - Az[1]) + I * (Az[2] - Az[3])) / (4.0 * h);

  const FieldSample s = field.sample(z);
  const double t2 = field.t() * field.t();
  Eigen::MatrixXcd M = t2 * (s.Phi * s.Phi.adjoint() - s.Phi.adjoint() * s.Phi);
  M.diagonal() += dz_Azb - dzb_Az;
  return C{0.0, -2.0} * M;
}

Eigen::MatrixXcd hitchin_residual_model(const ClusterPartition& p, const TodaFamily& toda, double t,
                                        std::complex<double> z, double h) {
  return hitchin_residual(ModelField(p, toda, t), z, h);
}

}  // namespace hglue
