#include "hglue/higgs_local.hpp"

#include <algorithm>
#include <numeric>

#include "hglue/errors.hpp"

namespace hglue {

Eigen::MatrixXcd companion_matrix(const CompanionBlock& b) {
  if (b.K < 1) throw Error(ErrorKind::InvalidConfig, "companion block needs K >= 1");
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(b.K, b.K) * b.lambda_shift;
  if (b.K == 1) return M;
  for (int i = 0; i + 1 < b.K; ++i) M(i, i + 1) += 1.0;
  M(b.K - 1, 0) += b.z;
  return M;
}

std::vector<cplx> characteristic_polynomial(const Eigen::MatrixXcd& M) {
  const int n = static_cast<int>(M.rows());
  if (n != M.cols()) throw Error(ErrorKind::InvalidConfig, "matrix must be square");
  std::vector<cplx> c(static_cast<std::size_t>(n + 1));
  c[n] = 1.0;
  Eigen::MatrixXcd Mk = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    Mk = M * Mk + c[n - k + 1] * I;
    c[n - k] = -(M * Mk).trace() / static_cast<double>(k);
  }
  return c;
}

std::vector<cplx> char_poly(const CompanionBlock& b) {
  return characteristic_polynomial(companion_matrix(b));
}

int discriminant_order(const ClusterPartition& p) {
  int order = 0;
  for (const auto& b : p.blocks()) order += b.K - 1;
  return order;
}

cplx discriminant(const std::vector<cplx>& roots) {
  cplx d{1.0, 0.0};
  for (std::size_t a = 0; a < roots.size(); ++a)
    for (std::size_t b = a + 1; b < roots.size(); ++b) d *= (roots[a] - roots[b]) * (roots[a] - roots[b]);
  return d;
}

bool validate_strata(const StrataCount& s) {
  long long lhs = 0;
  for (const auto& [K, count] : s.N) {
    if (K < 2 || K > s.n || count < 0) return false;
    lhs += static_cast<long long>(K - 1) * count;
  }
  const long long n = s.n;
  return lhs == 2 * (n * n - n) * (s.g - 1);
}

Rational parabolic_degree(int n, int g, long long deg_E, const std::vector<Rational>& weights) {
  const long long nn = n;
  Rational total(deg_E + (nn * nn - nn) * (g - 1));
  for (const auto& w : weights) total += w;
  return total;
}

Rational canonical_weight(int K) { return Rational(1 - K, 2); }

ClusterResult eigenvalue_clusters(const std::vector<cplx>& samples, double tol) {
  if (samples.empty()) throw Error(ErrorKind::InvalidConfig, "need at least one eigenvalue");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "clustering tolerance must be positive");
  const int n = static_cast<int>(samples.size());
  double scale = 1.0;
  for (const auto& s : samples) scale = std::max(scale, std::abs(s));
  const double eps = tol * scale;

  // Union-find over pairs closer than eps.
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (std::abs(samples[a] - samples[b]) <= eps) parent[find(b)] = find(a);

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (find(a) != find(b) && std::abs(samples[a] - samples[b]) <= 2.0 * eps) {
        throw Error(ErrorKind::AmbiguousClustering,
                    "eigenvalues " + std::to_string(a) + " and " + std::to_string(b) +
                        " are within twice the clustering tolerance");
      }
    }
  }

  ClusterResult out;
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int a = 0; a < n; ++a) {
    const int root = find(a);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.members.size());
      out.members.emplace_back();
    }
    out.members[slot[root]].push_back(a);
  }
  for (const auto& m : out.members) {
    cplx mean{0.0, 0.0};
    for (int idx : m) mean += samples[idx];
    out.sizes.push_back(static_cast<int>(m.size()));
    out.means.push_back(mean / static_cast<double>(m.size()));
  }
  return out;
}

}  // namespace hglue
