#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "hglue/errors.hpp"
#include "hglue/io.hpp"

using namespace hglue;
using hglue::testing::toda;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("hglue_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hitchin_glue");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

bool same_solution(const TodaSolution& a, const TodaSolution& b) {
  if (a.rank() != b.rank() || a.t() != b.t() || !(a.config() == b.config()) ||
      a.residual_norm() != b.residual_norm() || a.grid().size() != b.grid().size())
    return false;
  for (int k = 0; k < a.grid().size(); ++k)
    if (a.grid()[k] != b.grid()[k]) return false;
  for (int i = 0; i < a.rank(); ++i)
    if (!std::equal(a.u(i).begin(), a.u(i).end(), b.u(i).begin())) return false;
  for (double r : {1e-3, 0.37, 1.0, 5.9, 9.0}) {
    const RadialJet x = a.jet(r), y = b.jet(r);
    if (x.value != y.value || x.d1 != y.d1 || x.laplacian != y.laplacian) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("config hash") {
  SolverConfig c;
  CHECK(config_hash(c).size() == 16u);
  CHECK(config_hash(c) == config_hash(SolverConfig{}));
  SolverConfig d = c;
  d.tolerance = 2e-10;
  CHECK(config_hash(c) != config_hash(d));
  CHECK(solver_config_from_json(to_json(d)) == d);
}

TEST_CASE("JSON round trip is bit-identical") {
  const TodaSolution& sol = toda(3);
  const auto j = to_json(sol);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["K"] == 3);
  CHECK(j["u"].size() == 3u);
  const TodaSolution back = toda_from_json(nlohmann::json::parse(j.dump()));
  CHECK(same_solution(sol, back));

  nlohmann::json broken = j;
  broken["u"][0].erase(0);
  CHECK_THROWS_AS(toda_from_json(broken), Error);

  const std::string csv = toda_csv(sol);
  CHECK(csv.rfind("r,u_1,u_2,u_3\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == sol.grid().size() + 1);
  CHECK(fmt17(0.1) == "0.10000000000000001");
}

TEST_CASE("solution cache") {
  TempDir dir;
  SolutionCache cache(dir.path / "c");
  const TodaSolution& sol = toda(2);
  CHECK(!cache.lookup(2, sol.config()).has_value());
  cache.store(sol);
  const auto hit = cache.lookup(2, sol.config());
  REQUIRE(hit.has_value());
  CHECK(same_solution(*hit, sol));

  SolverConfig other = sol.config();
  other.tolerance = 1e-9;
  CHECK(!cache.lookup(2, other).has_value());
  CHECK(!cache.lookup(3, sol.config()).has_value());

  {
    std::ofstream(cache.path_for(2, sol.config())) << "{ not json";
  }
  CHECK(!cache.lookup(2, sol.config()).has_value());
  CHECK(!cache.warning().empty());

  // Flag beats the environment, which beats the fallback.
  ::setenv("HITCHIN_GLUE_CACHE", "/tmp/from_env", 1);
  CHECK(resolve_cache_dir(std::string("/tmp/flag"), "/tmp/fb") == fs::path("/tmp/flag"));
  CHECK(resolve_cache_dir(std::nullopt, "/tmp/fb") == fs::path("/tmp/from_env"));
  ::unsetenv("HITCHIN_GLUE_CACHE");
  CHECK(resolve_cache_dir(std::nullopt, "/tmp/fb") == fs::path("/tmp/fb"));
}

TEST_CASE("t-range syntax") {
  CHECK(cli::parse_t_range("2:10:2") == std::vector<double>{2, 4, 6, 8, 10});
  CHECK(cli::parse_t_range("3:10:1").size() == 8u);
  CHECK(cli::parse_t_range("4,16,64") == std::vector<double>{4, 16, 64});
  CHECK_THROWS_AS(cli::parse_t_range("4,2"), Error);
  CHECK_THROWS_AS(cli::parse_t_range("0:3:1"), Error);
  CHECK_THROWS_AS(cli::parse_t_range("1:3"), Error);
  CHECK_THROWS_AS(cli::parse_t_range("a,b"), Error);
}

TEST_CASE("command line runs") {
  TempDir dir;
  const std::string out = dir.path.string(), cache = (dir.path / "cache").string();

  auto r = invoke({"--out", out, "--cache", cache, "solve-toda", "--K", "2"});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir.path / "toda_K2.json"));
  CHECK(fs::exists(dir.path / "toda_K2.csv"));
  CHECK(fs::exists(dir.path / "run_meta.json"));

  r = invoke({"--out", out, "--cache", cache, "error-sweep", "--partition", "2", "--t", "2:10:2"});
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(read_file(dir.path / "decay_report.json"));
  CHECK(report["delta"].get<double>() > 0.0);
  CHECK(report["pass"].get<bool>());
  CHECK(report["norms"].size() == 5u);

  r = invoke({"--out", out, "strata", "--n", "3", "--g", "2", "--N2", "12", "--N3", "0"});
  CHECK(r.code == 0);
  CHECK(r.out == "VALID\n");
  r = invoke({"--out", out, "strata", "--n", "3", "--g", "2", "--N2=11"});
  CHECK(r.out == "INVALID\n");
  r = invoke({"--out", out, "strata", "--n", "3", "--g", "2", "--N3", "6", "--deg-E", "5"});
  CHECK(r.out == "parabolic_degree=5\nVALID\n");

  r = invoke({"--out", out, "indicial", "--partition", "2,1,1", "--J", "2"});
  CHECK(r.code == 0);
  CHECK(read_file(dir.path / "indicial.csv").find("1,2,0,1/4,Z,-1/2 1/2\n") != std::string::npos);

  r = invoke({"--out", out, "--cache", cache, "limit-check", "--partition", "3,2,1"});
  CHECK(r.code == 0);
  CHECK(r.out == "MONOTONE\n");

  r = invoke({"--out", out, "bogus"});
  CHECK(r.code == 2);
  r = invoke({"--out", out, "solve-toda"});
  CHECK(r.code == 2);
  r = invoke({"--out", out, "model", "--partition", "2@1,1@1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("InvalidPartition") != std::string::npos);
  const auto err = nlohmann::json::parse(read_file(dir.path / "error.json"));
  CHECK(err["exit_code"] == 2);
  r = invoke({"--out", out, "--r-max", "1", "solve-toda", "--K", "2"});
  CHECK(r.code == 2);
  r = invoke({"--out", out, "--max-iterations", "1", "--continuation-steps", "1", "--cache", cache + "_x",
           "solve-toda", "--K", "5"});
  CHECK(r.code == 3);
  CHECK(r.err.find("PipelineError") != std::string::npos);
}

TEST_CASE("artifacts are deterministic and cache hits change nothing") {
  TempDir a, b;
  const std::string shared_cache = (a.path / "cache").string();
  const std::vector<std::string> cmd{"model", "--partition", "3,2,1", "--t", "2"};
  auto with = [&](const fs::path& out, const std::string& cache) {
    std::vector<std::string> args{"--out", out.string(), "--cache", cache};
    args.insert(args.end(), cmd.begin(), cmd.end());
    return invoke(args);
  };
  REQUIRE(with(a.path, shared_cache).code == 0);  // cold
  const auto meta_cold = nlohmann::json::parse(read_file(a.path / "run_meta.json"));
  CHECK(meta_cold["cache"]["K3"] == "miss");
  REQUIRE(with(b.path, shared_cache).code == 0);  // warm
  const auto meta_warm = nlohmann::json::parse(read_file(b.path / "run_meta.json"));
  CHECK(meta_warm["cache"]["K3"] == "hit");
  for (const char* name : {"metric_limiting.csv", "metric_model.csv", "metric_approx.csv", "field_samples.csv",
                           "model.json"}) {
    CAPTURE(name);
    CHECK(read_file(a.path / name) == read_file(b.path / name));
  }

  TempDir c, d;
  const std::vector<std::string> sweep{"error-sweep", "--partition", "2,3", "--t", "3:6:1"};
  auto run_sweep = [&](const fs::path& out, const char* backend) {
    std::vector<std::string> args{"--out", out.string(), "--cache", shared_cache, "--backend", backend};
    args.insert(args.end(), sweep.begin(), sweep.end());
    return invoke(args);
  };
  REQUIRE(run_sweep(c.path, "serial").code == 0);
  REQUIRE(run_sweep(d.path, "omp").code == 0);
  CHECK(read_file(c.path / "decay_report.csv") == read_file(d.path / "decay_report.csv"));
}
