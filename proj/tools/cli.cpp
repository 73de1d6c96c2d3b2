#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hglue/approx.hpp"
#include "hglue/errors.hpp"
#include "hglue/higgs_local.hpp"
#include "hglue/io.hpp"
#include "hglue/linearization.hpp"

namespace hglue::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> parse_t_range(const std::string& text) {
  std::vector<double> values;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, fmt::format("bad number '{}' in t-range '{}'", s, text));
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t colon = text.find(':', start);
      parts.push_back(text.substr(start, colon - start));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3) throw Error(ErrorKind::ParseError, "t-range must be start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0)) throw Error(ErrorKind::ParseError, "t-range step must be positive");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count < 1 || count > 100000) throw Error(ErrorKind::ParseError, "empty or huge t-range");
    for (long k = 0; k < count; ++k) values.push_back(a + k * step);
  } else {
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      values.push_back(number(text.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) throw Error(ErrorKind::ParseError, "t values must be positive");
    if (k > 0 && !(values[k] > values[k - 1])) {
      throw Error(ErrorKind::ParseError, "t values must be strictly increasing");
    }
  }
  return values;
}

namespace {

struct Options {
  std::string out_dir = ".";
  std::optional<std::string> cache_dir;
  std::string format = "both";
  std::string backend = "omp";
  SolverConfig solver;

  int K = 2;
  std::string partition;
  bool trace_free = false;
  std::string t_range;
  double t = 1.0;
  std::string r_range = "0.1:2:0.1";
  int J = 2;
  double threshold = 0.2;
  int inner_panels = 24;
  int annulus_panels = 8;
  std::string samples = "0.1:2:0.1";

  int n = 2;
  int g = 2;
  std::optional<long long> deg_E;
};

struct Context {
  Options opt;
  std::ostream& out;
  std::ostream& err;
  std::string command;
  json meta = json::object();

  bool csv() const { return opt.format == "csv" || opt.format == "both"; }
  bool json_out() const { return opt.format == "json" || opt.format == "both"; }
  Backend backend() const { return opt.backend == "serial" ? Backend::Serial : Backend::OpenMP; }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(fs::path(opt.out_dir) / name, content);
    meta["artifacts"].push_back(name);
  }
};

// Values from a start:stop:step range that may include non-positive numbers
// of no concern to t (radii are checked by the library).
std::vector<double> parse_grid(const std::string& text) { return parse_t_range(text); }

TodaSolution cached_solve(Context& ctx, int K) {
  SolutionCache cache(resolve_cache_dir(ctx.opt.cache_dir, fs::path(ctx.opt.out_dir) / "cache"));
  if (auto hit = cache.lookup(K, ctx.opt.solver)) {
    ctx.meta["cache"][fmt::format("K{}", K)] = "hit";
    return *hit;
  }
  if (!cache.warning().empty()) {
    ctx.err << cache.warning() << '\n';
    ctx.meta["warnings"].push_back(cache.warning());
  }
  TodaSolution sol = solve_toda(K, ctx.opt.solver);
  cache.store(sol);
  ctx.meta["cache"][fmt::format("K{}", K)] = "miss";
  return sol;
}

TodaFamily family_for(Context& ctx, const ClusterPartition& p) {
  TodaFamily family;
  for (int K : p.toda_ranks()) family.add(cached_solve(ctx, K));
  return family;
}

ClusterPartition partition_arg(const Context& ctx) {
  if (ctx.opt.partition.empty()) throw Error(ErrorKind::ParseError, "--partition is required");
  return ClusterPartition::parse(ctx.opt.partition, ctx.opt.trace_free);
}

std::string joined(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) line += ',';
    line += cells[k];
  }
  return line + '\n';
}

void cmd_solve_toda(Context& ctx) {
  const TodaSolution sol = cached_solve(ctx, ctx.opt.K);
  const std::string stem = fmt::format("toda_K{}", ctx.opt.K);
  if (ctx.json_out()) ctx.write(stem + ".json", to_json(sol).dump(1) + "\n");
  if (ctx.csv()) ctx.write(stem + ".csv", toda_csv(sol));
  ctx.out << fmt::format("K={} residual_norm={} grid_size={} u_1(1)={}\n", sol.rank(),
                         fmt17(sol.residual_norm()), sol.grid().size(), fmt17(sol.jet(1.0).value[0]));
}

void cmd_model(Context& ctx) {
  const ClusterPartition p = partition_arg(ctx);
  const TodaFamily toda = family_for(ctx, p);
  const double t = ctx.opt.t;
  const std::vector<double> radii = parse_grid(ctx.opt.r_range);
  const int n = p.n();

  std::string header = "|z|";
  for (int i = 1; i <= n; ++i) header += fmt::format(",entry_{}", i);
  header += '\n';
  std::string lim = header, mod = header, app = header;
  json profiles = json::array();
  for (double r : radii) {
    const auto br = p.block_radii(r);
    const auto l = limiting_metric(p, br), m = model_metric(p, toda, t, br), a = approx_metric(p, toda, t, br);
    auto row = [&](const std::vector<double>& v) {
      std::vector<std::string> cells{fmt17(r)};
      for (double x : v) cells.push_back(fmt17(x));
      return joined(cells);
    };
    lim += row(l);
    mod += row(m);
    app += row(a);
    profiles.push_back({{"r", r}, {"limiting", l}, {"model", m}, {"approx", a}});
  }

  // Field samples along the ray arg z = 0.3.
  std::vector<std::string> cols{"z_re", "z_im"};
  for (int i = 1; i <= n; ++i) cols.push_back(fmt::format("a_{}", i));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      cols.push_back(fmt::format("phi_{}_{}_re", i, j));
      cols.push_back(fmt::format("phi_{}_{}_im", i, j));
    }
  cols.push_back("hitchin_residual_max");
  std::string fields = joined(cols);
  const ModelField field(p, toda, t, FieldKind::Model);
  double worst = 0.0;
  for (double r : radii) {
    const std::complex<double> z = std::polar(r, 0.3);
    const FieldSample s = field.sample(z);
    const double res = hitchin_residual(field, z).cwiseAbs().maxCoeff();
    worst = std::max(worst, res);
    std::vector<std::string> cells{fmt17(z.real()), fmt17(z.imag())};
    for (int i = 0; i < n; ++i) cells.push_back(fmt17(s.a(i)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cells.push_back(fmt17(s.Phi(i, j).real()));
        cells.push_back(fmt17(s.Phi(i, j).imag()));
      }
    cells.push_back(fmt17(res));
    fields += joined(cells);
  }
  if (ctx.csv()) {
    ctx.write("metric_limiting.csv", lim);
    ctx.write("metric_model.csv", mod);
    ctx.write("metric_approx.csv", app);
    ctx.write("field_samples.csv", fields);
  }
  if (ctx.json_out()) {
    ctx.write("model.json", json{{"partition", p.descriptor()},
                                 {"t", t},
                                 {"profiles", profiles},
                                 {"max_hitchin_residual", worst},
                                 {"config_hash", config_hash(ctx.opt.solver)}}
                                .dump(1) + "\n");
  }
  ctx.out << fmt::format("partition={} t={} max_hitchin_residual={}\n", p.descriptor(), fmt17(t),
                         fmt17(worst));
}

void cmd_error_sweep(Context& ctx) {
  const ClusterPartition p = partition_arg(ctx);
  if (ctx.opt.t_range.empty()) throw Error(ErrorKind::ParseError, "--t is required");
  const std::vector<double> ts = parse_t_range(ctx.opt.t_range);
  const TodaFamily toda = family_for(ctx, p);
  QuadratureSpec q;
  q.inner_panels = ctx.opt.inner_panels;
  q.annulus_panels = ctx.opt.annulus_panels;
  const std::vector<ErrorNorm> norms = error_sweep(p, toda, ts, q, ctx.backend());
  std::vector<double> values;
  for (const auto& e : norms) values.push_back(e.l2);

  if (ctx.csv()) {
    std::vector<std::string> cols{"t", "l2_norm"};
    for (int j = 1; j <= p.block_count(); ++j) cols.push_back(fmt::format("block_{}", j));
    std::string csv = joined(cols);
    for (const auto& e : norms) {
      std::vector<std::string> cells{fmt17(e.t), fmt17(e.l2)};
      for (double b : e.block_l2) cells.push_back(fmt17(b));
      csv += joined(cells);
    }
    ctx.write("decay_report.csv", csv);
  }
  if (values.size() < 3) {
    ctx.out << "fewer than 3 t values: no decay fit\n";
    return;
  }
  const DecayReport report = fit_decay(ts, values, ctx.opt.threshold);
  if (ctx.json_out()) {
    ctx.write("decay_report.json", json{{"partition", p.descriptor()},
                                        {"t_values", report.t_values},
                                        {"norms", report.l2_norms},
                                        {"c", report.c},
                                        {"delta", report.delta},
                                        {"residual", report.residual},
                                        {"threshold", report.threshold},
                                        {"pass", report.pass},
                                        {"config_hash", config_hash(ctx.opt.solver)}}
                                           .dump(1) + "\n");
  }
  ctx.out << fmt::format("delta={} c={} residual={} {}\n", fmt17(report.delta), fmt17(report.c),
                         fmt17(report.residual), report.pass ? "PASS" : "FAIL");
}

std::string rational_text(const Rational& q) {
  return q.denominator() == 1 ? fmt::format("{}", q.numerator())
                              : fmt::format("{}/{}", q.numerator(), q.denominator());
}

void cmd_indicial(Context& ctx) {
  const ClusterPartition p = partition_arg(ctx);
  const AtildeSpec spec = build_atilde(p, ctx.opt.J);
  const IndicialSpectrum s = indicial_spectrum(spec);
  const int n = p.n();
  std::string csv = "i,j,b_ij,c_ij,roots_0,roots_inf\n";
  auto roots = [](const Rational& v) {
    const Rational r = 2 * v;
    if (r.denominator() == 1) return std::string("Z");
    return fmt::format("{} {}", rational_text(-abs(r)), rational_text(abs(r)));
  };
  json pairs = json::array();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      csv += fmt::format("{},{},{},{},{},{}\n", i + 1, j + 1, rational_text(s.b[i][j]),
                         rational_text(s.c[i][j]), roots(s.b[i][j]), roots(s.c[i][j]));
      pairs.push_back({{"i", i + 1}, {"j", j + 1}, {"b", rational_text(s.b[i][j])},
                       {"c", rational_text(s.c[i][j])}});
    }
  std::vector<std::string> s0, sinf, kinds;
  for (const auto& r : s.S0) s0.push_back(rational_text(r));
  for (const auto& r : s.Sinf) sinf.push_back(rational_text(r));
  for (BlockKind k : spec.kinds) kinds.emplace_back(to_string(k));
  if (ctx.csv()) ctx.write("indicial.csv", csv);
  if (ctx.json_out()) {
    ctx.write("indicial.json", json{{"partition", p.descriptor()}, {"J", ctx.opt.J}, {"kinds", kinds},
                                    {"pairs", pairs}, {"S0", s0}, {"Sinf", sinf}}
                                       .dump(1) + "\n");
  }
  ctx.out << fmt::format("S0={{{}}} Sinf={{{}}} (integers implicit)\n", fmt::join(s0, ", "),
                         fmt::join(sinf, ", "));
}

void cmd_strata(Context& ctx, const std::vector<std::string>& extras) {
  StrataCount s;
  s.n = ctx.opt.n;
  s.g = ctx.opt.g;
  for (std::size_t k = 0; k < extras.size(); ++k) {
    const std::string& flag = extras[k];
    if (flag.rfind("--N", 0) != 0 || flag.size() < 4) {
      throw Error(ErrorKind::ParseError, "unknown argument '" + flag + "'");
    }
    std::string key = flag.substr(3), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (k + 1 >= extras.size()) throw Error(ErrorKind::ParseError, flag + " needs a value");
      value = extras[++k];
    }
    try {
      std::size_t used_k = 0, used_v = 0;
      const int K = std::stoi(key, &used_k);
      const long long count = std::stoll(value, &used_v);
      if (used_k != key.size() || used_v != value.size()) throw std::invalid_argument(flag);
      s.N[K] = count;
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bad strata count " + flag + " " + value);
    }
  }
  const bool valid = validate_strata(s);
  json record{{"n", s.n}, {"g", s.g}, {"valid", valid}};
  for (const auto& [K, c] : s.N) record["N"][std::to_string(K)] = c;
  if (ctx.opt.deg_E) {
    std::vector<Rational> weights;
    for (const auto& [K, c] : s.N)
      for (long long q = 0; q < c; ++q) weights.push_back(canonical_weight(K));
    const Rational pdeg = parabolic_degree(s.n, s.g, *ctx.opt.deg_E, weights);
    record["deg_E"] = *ctx.opt.deg_E;
    record["parabolic_degree"] = rational_text(pdeg);
    ctx.out << "parabolic_degree=" << rational_text(pdeg) << '\n';
  }
  if (ctx.json_out()) ctx.write("strata.json", record.dump(1) + "\n");
  if (ctx.csv()) {
    std::string csv = "K,N_K\n";
    for (const auto& [K, c] : s.N) csv += fmt::format("{},{}\n", K, c);
    ctx.write("strata.csv", csv);
  }
  ctx.out << (valid ? "VALID" : "INVALID") << '\n';
}

void cmd_growth(Context& ctx) {
  const ClusterPartition p = partition_arg(ctx);
  const std::vector<double> ts = parse_t_range(ctx.opt.t_range.empty() ? "1,2,4,8" : ctx.opt.t_range);
  const TodaFamily toda = family_for(ctx, p);
  const GrowthReport g = connection_growth(p, toda, ts);
  if (ctx.csv()) {
    std::string csv = "t,sup_A,sup_dA\n";
    for (const auto& r : g.rows) csv += joined({fmt17(r.t), fmt17(r.sup_a), fmt17(r.sup_da)});
    ctx.write("growth.csv", csv);
  }
  if (ctx.json_out()) {
    json rows = json::array();
    for (const auto& r : g.rows) rows.push_back({{"t", r.t}, {"sup_A", r.sup_a}, {"sup_dA", r.sup_da}});
    ctx.write("growth.json", json{{"partition", p.descriptor()}, {"rows", rows},
                                  {"exponent", g.exponent}, {"sup_A_variation", g.sup_a_variation}}
                                     .dump(1) + "\n");
  }
  ctx.out << fmt::format("exponent={} sup_A_variation={}\n", fmt17(g.exponent), fmt17(g.sup_a_variation));
}

void cmd_limit_check(Context& ctx) {
  const ClusterPartition p = partition_arg(ctx);
  const std::vector<double> ts = parse_t_range(ctx.opt.t_range.empty() ? "4,16,64" : ctx.opt.t_range);
  const TodaFamily toda = family_for(ctx, p);
  std::vector<std::complex<double>> samples;
  const std::vector<double> radii = parse_grid(ctx.opt.samples);
  for (std::size_t k = 0; k < radii.size(); ++k) samples.push_back(std::polar(radii[k], 0.7 * k));
  const LimitTable table = rescaled_laplacian_limit(p, toda, ctx.opt.J, ts, samples);
  if (ctx.csv()) {
    std::string csv = "t,block,kind,deviation\n";
    for (const auto& r : table.rows)
      csv += joined({fmt17(r.t), std::to_string(r.block + 1), to_string(r.kind), fmt17(r.deviation)});
    ctx.write("limit_check.csv", csv);
  }
  if (ctx.json_out()) {
    json rows = json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"t", r.t}, {"block", r.block + 1}, {"kind", to_string(r.kind)}, {"deviation", r.deviation}});
    ctx.write("limit_check.json",
              json{{"partition", p.descriptor()}, {"J", ctx.opt.J}, {"rows", rows}, {"monotone", table.monotone}}
                      .dump(1) + "\n");
  }
  ctx.out << (table.monotone ? "MONOTONE" : "NOT MONOTONE") << '\n';
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidPartition:
      return 2;
    default:
      return 3;
  }
}

void report_error(Context& ctx, std::string_view kind, const std::string& message, int code) {
  const json record{{"error", kind}, {"message", message}, {"command", ctx.command}, {"exit_code", code}};
  ctx.err << record.dump() << '\n';
  try {
    write_file_atomic(fs::path(ctx.opt.out_dir) / "error.json", record.dump(1) + "\n");
  } catch (const std::exception&) {
    // The record on stderr is enough when the output directory is unusable.
  }
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{Options{}, out, err, "", json::object()};
  Options& o = ctx.opt;

  CLI::App app{"Radial Toda models, glued Hitchin metrics and their linearization"};
  app.require_subcommand(1);
  app.add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  app.add_option("--cache", o.cache_dir, "Toda cache directory (overrides HITCHIN_GLUE_CACHE)");
  app.add_option("--format", o.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  app.add_option("--backend", o.backend, "serial or omp")->check(CLI::IsMember({"serial", "omp"}));
  app.add_option("--tolerance", o.solver.tolerance, "Newton residual tolerance")->capture_default_str();
  app.add_option("--grid-size", o.solver.grid_size, "Radial grid points")->capture_default_str();
  app.add_option("--r-min", o.solver.r_min, "Inner radius of the Toda grid")->capture_default_str();
  app.add_option("--r-max", o.solver.r_max, "Outer radius of the Toda grid")->capture_default_str();
  app.add_option("--max-iterations", o.solver.max_iterations)->capture_default_str();
  app.add_option("--continuation-steps", o.solver.continuation_steps)->capture_default_str();

  auto* solve = app.add_subcommand("solve-toda", "Solve the rank-K Toda boundary-value problem");
  solve->add_option("--K", o.K, "Rank")->required();

  auto* model = app.add_subcommand("model", "Metric profiles and unitary-gauge field samples");
  model->add_option("--partition", o.partition, "Cluster partition, e.g. 3,2,1 or 2@0+1i")->required();
  model->add_option("--t", o.t, "Parameter t")->capture_default_str();
  model->add_option("--r", o.r_range, "Radii start:stop:step")->capture_default_str();
  model->add_flag("--trace-free", o.trace_free);

  auto* sweep = app.add_subcommand("error-sweep", "L2 norm of the glued error over a t-range");
  sweep->add_option("--partition", o.partition)->required();
  sweep->add_option("--t", o.t_range, "t-range start:stop:step or list")->required();
  sweep->add_option("--threshold", o.threshold, "Fit residual threshold")->capture_default_str();
  sweep->add_option("--inner-panels", o.inner_panels)->capture_default_str();
  sweep->add_option("--annulus-panels", o.annulus_panels)->capture_default_str();
  sweep->add_flag("--trace-free", o.trace_free);

  auto* indicial = app.add_subcommand("indicial", "Indicial roots of the limiting operator");
  indicial->add_option("--partition", o.partition)->required();
  indicial->add_option("--J", o.J, "Critical cluster size")->capture_default_str();

  auto* strata = app.add_subcommand("strata", "Check sum (K-1) N_K = 2(n^2-n)(g-1); pass --N<K> counts");
  strata->add_option("--n", o.n)->required();
  strata->add_option("--g", o.g)->required();
  strata->add_option("--deg-E", o.deg_E, "Also report the parabolic degree with canonical weights");
  strata->allow_extras();

  auto* growth = app.add_subcommand("growth", "Sup norms of A_t and its radial derivative");
  growth->add_option("--partition", o.partition)->required();
  growth->add_option("--t", o.t_range, "t values (default 1,2,4,8)");

  auto* limit = app.add_subcommand("limit-check", "Rescaled connection against its block limits");
  limit->add_option("--partition", o.partition)->required();
  limit->add_option("--J", o.J)->capture_default_str();
  limit->add_option("--t", o.t_range, "t values (default 4,16,64)");
  limit->add_option("--samples", o.samples, "|w| samples start:stop:step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(ctx, to_string(ErrorKind::ParseError), e.what(), 2);
    return 2;
  }
  ctx.command = app.get_subcommands().front()->get_name();

  try {
    o.solver.validate();
    if (ctx.command == "solve-toda") {
      cmd_solve_toda(ctx);
    } else if (ctx.command == "model") {
      cmd_model(ctx);
    } else if (ctx.command == "error-sweep") {
      cmd_error_sweep(ctx);
    } else if (ctx.command == "indicial") {
      cmd_indicial(ctx);
    } else if (ctx.command == "strata") {
      cmd_strata(ctx, strata->remaining());
    } else if (ctx.command == "growth") {
      cmd_growth(ctx);
    } else if (ctx.command == "limit-check") {
      cmd_limit_check(ctx);
    }
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    const std::string kind(code == 2 ? to_string(e.kind()) : to_string(ErrorKind::PipelineError));
    report_error(ctx, kind, fmt::format("{} ({}): {}", ctx.command, to_string(e.kind()), e.what()), code);
    return code;
  } catch (const std::exception& e) {
    report_error(ctx, to_string(ErrorKind::PipelineError), fmt::format("{}: {}", ctx.command, e.what()), 3);
    return 3;
  }

  ctx.meta["command"] = ctx.command;
  ctx.meta["timestamp"] = timestamp();
  ctx.meta["config_hash"] = config_hash(o.solver);
  std::vector<std::string> args(argv + 1, argv + argc);
  ctx.meta["arguments"] = args;
  try {
    write_file_atomic(fs::path(o.out_dir) / "run_meta.json", ctx.meta.dump(1) + "\n");
  } catch (const Error& e) {
    err << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace hglue::cli
