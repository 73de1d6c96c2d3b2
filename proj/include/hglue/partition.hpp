#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace hglue {

using cplx = std::complex<double>;

/// One ramification block: K eigenvalues colliding at the point, their common
/// value lambda_shift, and the derivative f'(0) of the block coordinate
/// z_j = f_j(z).
struct ClusterBlock {
  int K = 1;
  cplx lambda_shift{0.0, 0.0};
  cplx f_prime0{1.0, 0.0};

  bool operator==(const ClusterBlock&) const = default;
};

/// Block data of a ramification point, n = K_1 + ... + K_m.
class ClusterPartition {
 public:
  /// Throws InvalidPartition unless n >= 2, every K_j >= 1, every f'(0) != 0,
  /// shifts are pairwise distinct (more than one block) and, when
  /// `trace_free` is set, sum K_j lambda_j = 0.
  explicit ClusterPartition(std::vector<ClusterBlock> blocks, bool trace_free = false);

  /// Parses "3,3,2,1,1,1" or "3@0+1i,2@-1.5,1@2/0.5". The part after '@' is
  /// the eigenvalue shift, the part after '/' is f'(0). Blocks without an
  /// explicit shift get the shift equal to their zero-based position.
  static ClusterPartition parse(std::string_view descriptor, bool trace_free = false);

  int n() const noexcept { return n_; }
  int block_count() const noexcept { return static_cast<int>(blocks_.size()); }
  const std::vector<ClusterBlock>& blocks() const noexcept { return blocks_; }
  const ClusterBlock& block(int j) const { return blocks_.at(static_cast<std::size_t>(j)); }
  /// Index of the first row of block j in the n x n matrices.
  int offset(int j) const { return offsets_.at(static_cast<std::size_t>(j)); }
  bool trace_free() const noexcept { return trace_free_; }

  /// Distinct block sizes K >= 2, ascending.
  std::vector<int> toda_ranks() const;
  /// |f'_j(0)| r for every block.
  std::vector<double> block_radii(double r) const;
  /// Canonical descriptor that parse() maps back to the same partition.
  std::string descriptor() const;

  bool operator==(const ClusterPartition&) const = default;

 private:
  std::vector<ClusterBlock> blocks_;
  std::vector<int> offsets_;
  int n_ = 0;
  bool trace_free_ = false;
};

/// Parses "2", "-1.5", "1+2i", "0.5-i", "3i". Throws ParseError.
cplx parse_complex(std::string_view text);

}  // namespace hglue
