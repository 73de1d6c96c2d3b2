#include "hglue/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hglue/errors.hpp"

namespace hglue {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, std::string_view whole) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ParseError, fmt::format("cannot parse number in '{}'", whole));
  }
  return value;
}

std::string format_complex(cplx c) {
  if (c.imag() == 0.0) return fmt::format("{}", c.real());
  return fmt::format("{}{}{}i", c.real(), c.imag() < 0 ? "" : "+", c.imag());
}

}  // namespace

cplx parse_complex(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw Error(ErrorKind::ParseError, "empty complex number");
  if (s.back() != 'i') return {parse_real(s, text), 0.0};

  // Split at the last sign that is not part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = s.size() - 1; k > 0; --k) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_part = [&](std::string_view p) {
    p.remove_suffix(1);
    if (p.empty() || p == "+") return 1.0;
    if (p == "-") return -1.0;
    return parse_real(p, text);
  };
  if (split == std::string_view::npos) return {0.0, imag_part(s)};
  return {parse_real(s.substr(0, split), text), imag_part(s.substr(split))};
}

ClusterPartition::ClusterPartition(std::vector<ClusterBlock> blocks, bool trace_free)
    : blocks_(std::move(blocks)), trace_free_(trace_free) {
  if (blocks_.empty()) throw Error(ErrorKind::InvalidPartition, "partition has no blocks");
  cplx trace{0.0, 0.0};
  double scale = 0.0;
  for (const auto& b : blocks_) {
    if (b.K < 1) throw Error(ErrorKind::InvalidPartition, "block sizes must be >= 1");
    if (b.f_prime0 == cplx{0.0, 0.0}) {
      throw Error(ErrorKind::InvalidPartition, "coordinate derivative f'(0) must be nonzero");
    }
    if (!std::isfinite(std::abs(b.lambda_shift)) || !std::isfinite(std::abs(b.f_prime0))) {
      throw Error(ErrorKind::InvalidPartition, "block data must be finite");
    }
    offsets_.push_back(n_);
    n_ += b.K;
    trace += static_cast<double>(b.K) * b.lambda_shift;
    scale += b.K * std::abs(b.lambda_shift);
  }
  if (n_ < 2) throw Error(ErrorKind::InvalidPartition, "partition must have n >= 2");
  for (std::size_t a = 0; a < blocks_.size(); ++a) {
    for (std::size_t b = a + 1; b < blocks_.size(); ++b) {
      if (blocks_[a].lambda_shift == blocks_[b].lambda_shift) {
        throw Error(ErrorKind::InvalidPartition,
                    fmt::format("blocks {} and {} share the eigenvalue shift {}", a, b,
                                format_complex(blocks_[a].lambda_shift)));
      }
    }
  }
  if (trace_free_ && std::abs(trace) > 1e-12 * std::max(1.0, scale)) {
    throw Error(ErrorKind::InvalidPartition, "trace-free partition needs sum K_j lambda_j = 0");
  }
}

ClusterPartition ClusterPartition::parse(std::string_view descriptor, bool trace_free) {
  std::vector<ClusterBlock> blocks;
  std::string_view rest = descriptor;
  while (true) {
    const std::size_t comma = rest.find(',');
    std::string_view token = trim(rest.substr(0, comma));
    if (token.empty()) throw Error(ErrorKind::ParseError, "empty block in partition descriptor");

    ClusterBlock block;
    block.lambda_shift = static_cast<double>(blocks.size());
    const std::size_t slash = token.find('/');
    if (slash != std::string_view::npos) {
      block.f_prime0 = parse_complex(token.substr(slash + 1));
      token = token.substr(0, slash);
    }
    const std::size_t at = token.find('@');
    if (at != std::string_view::npos) {
      block.lambda_shift = parse_complex(token.substr(at + 1));
      token = token.substr(0, at);
    }
    token = trim(token);
    int K = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), K);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error(ErrorKind::ParseError, fmt::format("bad block size in '{}'", descriptor));
    }
    block.K = K;
    blocks.push_back(block);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return ClusterPartition(std::move(blocks), trace_free);
}

std::vector<int> ClusterPartition::toda_ranks() const {
  std::set<int> ranks;
  for (const auto& b : blocks_)
    if (b.K >= 2) ranks.insert(b.K);
  return {ranks.begin(), ranks.end()};
}

std::vector<double> ClusterPartition::block_radii(double r) const {
  std::vector<double> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(std::abs(b.f_prime0) * r);
  return out;
}

std::string ClusterPartition::descriptor() const {
  std::string out;
  for (const auto& b : blocks_) {
    if (!out.empty()) out += ',';
    out += fmt::format("{}@{}", b.K, format_complex(b.lambda_shift));
    if (b.f_prime0 != cplx{1.0, 0.0}) out += "/" + format_complex(b.f_prime0);
  }
  return out;
}

}  // namespace hglue
