#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hglue {

enum class ErrorKind {
  InvalidConfig,
  NonConvergence,
  WrongRank,
  DomainError,
  NotDecayed,
  BelowGrid,
  IndexOutOfRange,
  ZeroRadius,
  MissingTodaSolution,
  OriginSingularity,
  StencilOutOfDomain,
  InvalidPartition,
  AmbiguousClustering,
  QuadratureTooCoarse,
  DegenerateFit,
  GridTooCoarse,
  BoundarySupport,
  ParseError,
  CacheCorrupt,
  PipelineError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. Every failure carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hglue
