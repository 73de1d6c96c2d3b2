#include "hglue/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "hglue/errors.hpp"

namespace hglue {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double value) { return fmt::format("{:.17g}", value); }

std::string config_hash(const SolverConfig& c) {
  const std::string canonical =
      fmt::format("tolerance={:.17g};max_iterations={};grid_size={};r_min={:.17g};r_max={:.17g};"
                  "continuation_steps={};schema={}",
                  c.tolerance, c.max_iterations, c.grid_size, c.r_min, c.r_max,
                  c.continuation_steps, kSchemaVersion);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

json to_json(const SolverConfig& c) {
  return json{{"tolerance", c.tolerance},   {"max_iterations", c.max_iterations},
              {"grid_size", c.grid_size},   {"r_min", c.r_min},
              {"r_max", c.r_max},           {"continuation_steps", c.continuation_steps}};
}

SolverConfig solver_config_from_json(const json& j) {
  SolverConfig c;
  c.tolerance = j.at("tolerance").get<double>();
  c.max_iterations = j.at("max_iterations").get<int>();
  c.grid_size = j.at("grid_size").get<int>();
  c.r_min = j.at("r_min").get<double>();
  c.r_max = j.at("r_max").get<double>();
  c.continuation_steps = j.at("continuation_steps").get<int>();
  return c;
}

json to_json(const TodaSolution& s) {
  json rows = json::array();
  for (int i = 0; i < s.rank(); ++i) {
    const auto u = s.u(i);
    rows.push_back(std::vector<double>(u.begin(), u.end()));
  }
  const auto r = s.grid().points();
  return json{{"schema_version", kSchemaVersion},
              {"K", s.rank()},
              {"t", s.t()},
              {"r", std::vector<double>(r.begin(), r.end())},
              {"u", std::move(rows)},
              {"residual_norm", s.residual_norm()},
              {"config", to_json(s.config())},
              {"config_hash", config_hash(s.config())}};
}

TodaSolution toda_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(ErrorKind::CacheCorrupt, "unsupported schema version");
    }
    const int K = j.at("K").get<int>();
    const SolverConfig config = solver_config_from_json(j.at("config"));
    if (j.contains("config_hash") && j.at("config_hash").get<std::string>() != config_hash(config)) {
      throw Error(ErrorKind::CacheCorrupt, "stored config hash does not match its config");
    }
    const auto u = j.at("u").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(u.size()) != K) throw Error(ErrorKind::CacheCorrupt, "expected K rows of u");
    TodaSolution base(K, config, u, j.at("residual_norm").get<double>());
    const double t = j.value("t", 1.0);
    return t == 1.0 ? base : base.rescaled(t);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CacheCorrupt, std::string("malformed Toda record: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CacheCorrupt) throw;
    throw Error(ErrorKind::CacheCorrupt, std::string("invalid Toda record: ") + e.what());
  }
}

std::string toda_csv(const TodaSolution& s) {
  std::string out = "r";
  for (int i = 1; i <= s.rank(); ++i) out += fmt::format(",u_{}", i);
  out += '\n';
  const auto r = s.grid().points();
  for (std::size_t k = 0; k < r.size(); ++k) {
    out += fmt17(r[k]);
    for (int i = 0; i < s.rank(); ++i) out += ',' + fmt17(s.u(i)[k]);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += fmt::format(".tmp{}", static_cast<unsigned long>(std::hash<std::string>{}(path.string()) & 0xffff));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::PipelineError, "cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw Error(ErrorKind::PipelineError, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::PipelineError, "cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::PipelineError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path resolve_cache_dir(const std::optional<std::string>& flag, const fs::path& fallback) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("HITCHIN_GLUE_CACHE"); env && *env) return env;
  return fallback;
}

SolutionCache::SolutionCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path SolutionCache::path_for(int K, const SolverConfig& config) const {
  return dir_ / fmt::format("toda_K{}_{}.json", K, config_hash(config));
}

std::optional<TodaSolution> SolutionCache::lookup(int K, const SolverConfig& config) {
  warning_.clear();
  const fs::path path = path_for(K, config);
  if (!fs::exists(path)) return std::nullopt;
  try {
    const json j = json::parse(read_file(path));
    if (j.at("schema_version").get<int>() != kSchemaVersion ||
        j.at("config_hash").get<std::string>() != config_hash(config) || j.at("K").get<int>() != K) {
      return std::nullopt;
    }
    TodaSolution s = toda_from_json(j);
    if (!(s.config() == config)) return std::nullopt;
    return s;
  } catch (const std::exception& e) {
    warning_ = fmt::format("{}: ignoring unreadable cache file {} ({})", to_string(ErrorKind::CacheCorrupt),
                           path.string(), e.what());
    return std::nullopt;
  }
}

void SolutionCache::store(const TodaSolution& solution) {
  write_file_atomic(path_for(solution.rank(), solution.config()), to_json(solution).dump());
}

}  // namespace hglue
