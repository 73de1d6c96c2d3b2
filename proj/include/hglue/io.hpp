#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "hglue/toda.hpp"

namespace hglue {

inline constexpr int kSchemaVersion = 1;

/// 64-bit FNV-1a of the canonical text form of the solver settings, as 16 hex digits.
std::string config_hash(const SolverConfig& config);

nlohmann::json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const nlohmann::json& j);

/// {schema_version, K, t, r, u, residual_norm, config, config_hash}.
nlohmann::json to_json(const TodaSolution& solution);
/// Throws CacheCorrupt on missing fields or inconsistent sizes.
TodaSolution toda_from_json(const nlohmann::json& j);

/// Header "r,u_1,...,u_K", 17 significant digits.
std::string toda_csv(const TodaSolution& solution);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Formats a double with 17 significant digits.
std::string fmt17(double value);

/// Cache directory precedence: explicit flag, then HITCHIN_GLUE_CACHE, then
/// `fallback`.
std::filesystem::path resolve_cache_dir(const std::optional<std::string>& flag,
                                        const std::filesystem::path& fallback);

/// One JSON file per (K, config hash).
class SolutionCache {
 public:
  explicit SolutionCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path path_for(int K, const SolverConfig& config) const;

  /// The stored solution iff schema version and config hash match. An
  /// unreadable file counts as a miss and leaves a message in warning().
  std::optional<TodaSolution> lookup(int K, const SolverConfig& config);
  void store(const TodaSolution& solution);

  const std::string& warning() const noexcept { return warning_; }

 private:
  std::filesystem::path dir_;
  std::string warning_;
};

}  // namespace hglue
