#pragma once

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "hglue/partition.hpp"

namespace hglue {

/// lambda_shift Id + (ones on the superdiagonal, z in the lower-left corner).
struct CompanionBlock {
  int K = 1;
  cplx z{0.0, 0.0};
  cplx lambda_shift{0.0, 0.0};
};

Eigen::MatrixXcd companion_matrix(const CompanionBlock& b);

/// Coefficients of det(lambda I - M) in ascending powers: c[0] + c[1] lambda
/// + ... + c[K] lambda^K with c[K] = 1. Computed with the Faddeev-LeVerrier
/// recursion on the companion matrix.
std::vector<cplx> char_poly(const CompanionBlock& b);

/// Same recursion for an arbitrary square matrix.
std::vector<cplx> characteristic_polynomial(const Eigen::MatrixXcd& M);

/// Vanishing order of the discriminant at the point: sum_j (K_j - 1).
int discriminant_order(const ClusterPartition& p);

/// Numeric discriminant prod_{a<b} (lambda_a - lambda_b)^2 from the roots.
cplx discriminant(const std::vector<cplx>& roots);

struct StrataCount {
  int n = 2;
  int g = 2;
  std::map<int, long long> N;  // K -> number of points of ramification index K
};

/// True iff sum_K (K - 1) N_K = 2 (n^2 - n)(g - 1).
bool validate_strata(const StrataCount& s);

using Rational = boost::rational<long long>;

/// deg_E + (n^2 - n)(g - 1) + sum of weights.
Rational parabolic_degree(int n, int g, long long deg_E, const std::vector<Rational>& weights);

/// Canonical weight (1 - K)/2 of a ramification point of index K.
Rational canonical_weight(int K);

struct ClusterResult {
  std::vector<std::vector<int>> members;  // indices into the input, ascending
  std::vector<int> sizes;                 // K_j
  std::vector<cplx> means;                // lambda_(j)
};

/// Single-linkage grouping of eigenvalues at distance <= tol * max(1, max|lambda|).
/// Clusters are ordered by their smallest member index. Throws
/// AmbiguousClustering when two different clusters come within twice that
/// tolerance.
ClusterResult eigenvalue_clusters(const std::vector<cplx>& samples, double tol = 1e-6);

}  // namespace hglue
