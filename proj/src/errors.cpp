#include "hglue/errors.hpp"

namespace hglue {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::WrongRank: return "WrongRank";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NotDecayed: return "NotDecayed";
    case ErrorKind::BelowGrid: return "BelowGrid";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ZeroRadius: return "ZeroRadius";
    case ErrorKind::MissingTodaSolution: return "MissingTodaSolution";
    case ErrorKind::OriginSingularity: return "OriginSingularity";
    case ErrorKind::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorKind::InvalidPartition: return "InvalidPartition";
    case ErrorKind::AmbiguousClustering: return "AmbiguousClustering";
    case ErrorKind::QuadratureTooCoarse: return "QuadratureTooCoarse";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::BoundarySupport: return "BoundarySupport";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::CacheCorrupt: return "CacheCorrupt";
    case ErrorKind::PipelineError: return "PipelineError";
  }
  return "Unknown";
}

}  // namespace hglue
