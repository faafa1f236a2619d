// groundgap: gap-scaling experiments and sampler-seeded Krylov solves over
// randomly generated linear problems. Subcommands write their data files
// plus a run manifest into --out-dir ($GROUNDGAP_OUT or "." by default).
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "groundgap/encoding.hpp"
#include "groundgap/hybrid.hpp"
#include "groundgap/problems.hpp"
#include "groundgap/rng.hpp"
#include "groundgap/spectral.hpp"
#include "groundgap/sweeps.hpp"
#include "groundgap/textio.hpp"

namespace {

namespace fs = std::filesystem;
using namespace groundgap;

struct GlobalArgs {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir;
};

fs::path resolve_out_dir(const GlobalArgs& g) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char* env = std::getenv("GROUNDGAP_OUT"); env && *env) return env;
  return ".";
}

int usage_error(const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  return 2;
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Run record written next to the data files. Everything except started_at
// and duration_seconds is a pure function of the flags, so reruns with the
// same seed differ only in those two fields.
struct Manifest {
  std::string command;
  std::string file_stem;  // distinguishes e.g. sweep_precision from sweep_rows
  std::uint64_t seed = 0;
  std::string config_json = "{}";
  std::vector<std::string> outputs;
  std::vector<std::string> skips;  // per-problem messages, run still succeeds
  std::string status = "ok";
  std::string error;
};

void write_manifest(const Manifest& man, const fs::path& dir,
                    const std::string& started_at, double duration_seconds) {
  JsonWriter w;
  w.begin_object();
  w.key("command").value(man.command);
  w.key("version").value(GROUNDGAP_VERSION);
  w.key("seed").value(man.seed);
  w.key("config").raw(man.config_json);
  w.key("outputs").begin_array();
  for (const auto& p : man.outputs) w.value(p);
  w.end_array();
  w.key("skips").begin_array();
  for (const auto& s : man.skips) w.value(s);
  w.end_array();
  w.key("status").value(man.status);
  if (!man.error.empty()) w.key("error").value(man.error);
  w.key("started_at").value(started_at);
  w.key("duration_seconds").value(duration_seconds);
  w.end_object();
  write_text_file(dir / (man.file_stem + "_manifest.json"), w.str() + "\n");
}

// Executes body, then writes the manifest whether or not body threw; a
// thrown std::exception becomes status "failed" and exit code 1.
template <typename Body>
int run_with_manifest(Manifest man, const GlobalArgs& g, Body&& body) {
  const fs::path dir = resolve_out_dir(g);
  std::error_code ec;
  fs::create_directories(dir, ec);  // failures surface as write errors below
  const std::string started_at = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    body(dir, man);
  } catch (const std::exception& e) {
    man.status = "failed";
    man.error = e.what();
    rc = 1;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  try {
    write_manifest(man, dir, started_at, seconds);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    rc = 1;
  }
  if (!man.error.empty()) {
    std::fprintf(stderr, "error: %s\n", man.error.c_str());
  }
  return rc;
}

bool parse_range(const std::string& text, long long* lo, long long* hi) {
  const auto pos = text.find(':', 1);  // position 0 may be a minus sign
  if (pos == std::string::npos || pos + 1 >= text.size()) return false;
  try {
    std::size_t used = 0;
    *lo = std::stoll(text.substr(0, pos), &used);
    if (used != pos) return false;
    const std::string tail = text.substr(pos + 1);
    *hi = std::stoll(tail, &used);
    if (used != tail.size()) return false;
  } catch (const std::exception&) {
    return false;
  }
  return *lo < *hi;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string kind = "lls";
  int m = 0;
  int n = 0;
  int count = 10;
  std::string range = "-8:8";
  double kappa = 0.0;
  bool has_m = false;
  bool has_kappa = false;
};

int cmd_generate(const GlobalArgs& g, const GenerateArgs& a) {
  EnsembleSpec spec;
  spec.kind = parse_kind(a.kind);
  spec.count = a.count;
  spec.n = a.n;
  if (!parse_range(a.range, &spec.lo, &spec.hi)) {
    return usage_error("--range expects lo:hi with lo < hi");
  }
  if (spec.kind == ProblemKind::lls) {
    if (!a.has_m) return usage_error("--m is required when --kind is lls");
    spec.m = a.m;
  } else {
    if (a.has_m && a.m != a.n) {
      return usage_error("--m must equal --n when --kind is lse");
    }
    spec.m = a.n;
  }
  if (a.has_kappa) spec.kappa_target = a.kappa;
  spec.seed = g.seed;
  try {
    spec.validate();
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }

  JsonWriter cfg;
  cfg.begin_object();
  cfg.key("kind").value(kind_name(spec.kind));
  cfg.key("count").value(spec.count);
  cfg.key("m").value(spec.m);
  cfg.key("n").value(spec.n);
  cfg.key("lo").value(static_cast<std::int64_t>(spec.lo));
  cfg.key("hi").value(static_cast<std::int64_t>(spec.hi));
  cfg.key("kappa");
  if (spec.kappa_target) {
    cfg.value(*spec.kappa_target);
  } else {
    cfg.null();
  }
  cfg.key("jobs").value(g.jobs);
  cfg.key("out_dir").value(resolve_out_dir(g).string());
  cfg.end_object();

  Manifest man;
  man.command = man.file_stem = "generate";
  man.seed = g.seed;
  man.config_json = cfg.str();
  return run_with_manifest(std::move(man), g,
                           [&](const fs::path& dir, Manifest& m) {
                             Ensemble e{spec, generate(spec)};
                             const fs::path path = dir / "ensemble.json";
                             save_ensemble(path, e);
                             m.outputs.push_back(path.string());
                           });
}

// ----------------------------------------------------------------- gapscan

struct GapscanArgs {
  std::string input;
  int grid = 100;
  int c = 2;
  bool unscaled = false;
  int max_qubits = 16;
};

int cmd_gapscan(const GlobalArgs& g, const GapscanArgs& a) {
  JsonWriter cfg;
  cfg.begin_object();
  cfg.key("input").value(a.input);
  cfg.key("grid").value(a.grid);
  cfg.key("c").value(a.c);
  cfg.key("unscaled").value(a.unscaled);
  cfg.key("max_qubits").value(a.max_qubits);
  cfg.key("jobs").value(g.jobs);
  cfg.key("out_dir").value(resolve_out_dir(g).string());
  cfg.end_object();

  Manifest man;
  man.command = man.file_stem = "gapscan";
  man.seed = g.seed;
  man.config_json = cfg.str();
  return run_with_manifest(std::move(man), g, [&](const fs::path& dir,
                                                  Manifest& m) {
    const Ensemble e = load_ensemble(a.input);
    const FixedPointEncoding enc = FixedPointEncoding::integer_bits(a.c);
    const Schedule sched = Schedule::standard(a.grid);

    std::string summary = "problem,qubits,scale,g_min,s_at_min,degenerate\n";
    for (std::size_t i = 0; i < e.problems.size(); ++i) {
      const QuboModel qubo = build_qubo(e.problems[i], enc);
      IsingModel ising = qubo_to_ising(qubo);
      if (!a.unscaled) ising = scale_ising(ising);
      if (ising.num_spins() > a.max_qubits) {
        m.skips.push_back("problem " + std::to_string(i) + ": needs " +
                          std::to_string(ising.num_spins()) +
                          " qubits, limit " + std::to_string(a.max_qubits));
        continue;
      }
      ScanOptions opts;
      opts.max_qubits = a.max_qubits;
      opts.jobs = g.jobs;
      opts.seed = derive_seed(g.seed, RngStage::sweep_ensemble,
                              static_cast<std::uint64_t>(i));
      const GapScan scan = scan_gap(ising, sched, opts);

      char name[32];
      std::snprintf(name, sizeof(name), "gapscan_%03zu.csv", i);
      const fs::path path = dir / name;
      write_gapscan_csv(scan, path);
      m.outputs.push_back(path.string());

      summary += std::to_string(i) + "," + std::to_string(ising.num_spins()) +
                 "," + format_double(ising.scale) + "," +
                 format_double(scan.g_min) + "," +
                 format_double(scan.s_at_min) + "," +
                 (scan.degenerate ? "1" : "0") + "\n";
    }
    const fs::path summary_path = dir / "gapscan_summary.csv";
    write_text_file(summary_path, summary);
    m.outputs.push_back(summary_path.string());
  });
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string name;
  int per_value = 0;   // 0: preset default
  int grid = 0;        // 0: preset default
  int max_qubits = 0;  // 0: preset default
  bool unscaled = false;
};

std::vector<CurveFamily> sweep_fit_families(SweepParameter p) {
  switch (p) {
    case SweepParameter::precision_c:
    case SweepParameter::variables_n:
      return {CurveFamily::exp_decay, CurveFamily::poly_decay};
    case SweepParameter::rows_m:
      return {CurveFamily::plateau};
    case SweepParameter::condition_kappa:
      return {CurveFamily::plateau, CurveFamily::plateau_offset};
  }
  return {};
}

int cmd_sweep(const GlobalArgs& g, const SweepArgs& a) {
  const SweepParameter parameter = parse_sweep_parameter(a.name);
  SweepConfig config = SweepConfig::preset(parameter);
  if (a.per_value > 0) config.per_value = a.per_value;
  if (a.grid > 0) config.grid_points = a.grid;
  if (a.max_qubits > 0) config.max_qubits = a.max_qubits;
  config.scaled = !a.unscaled;
  config.jobs = g.jobs;
  try {
    config.validate();
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }

  JsonWriter cfg;
  cfg.begin_object();
  cfg.key("parameter").value(sweep_parameter_name(parameter));
  cfg.key("values").begin_array();
  for (double v : config.values) cfg.value(v);
  cfg.end_array();
  cfg.key("per_value").value(config.per_value);
  cfg.key("kind").value(kind_name(config.kind));
  cfg.key("base_m").value(config.base_m);
  cfg.key("base_n").value(config.base_n);
  cfg.key("base_c").value(config.base_c);
  cfg.key("lo").value(static_cast<std::int64_t>(config.lo));
  cfg.key("hi").value(static_cast<std::int64_t>(config.hi));
  cfg.key("scaled").value(config.scaled);
  cfg.key("grid_points").value(config.grid_points);
  cfg.key("max_qubits").value(config.max_qubits);
  cfg.key("jobs").value(g.jobs);
  cfg.key("out_dir").value(resolve_out_dir(g).string());
  cfg.end_object();

  Manifest man;
  man.command = "sweep";
  man.file_stem = "sweep_" + a.name;
  man.seed = g.seed;
  man.config_json = cfg.str();
  return run_with_manifest(
      std::move(man), g, [&](const fs::path& dir, Manifest& m) {
        std::vector<SweepFailure> failures;
        const std::vector<SweepRow> rows = run_sweep(config, g.seed, &failures);
        for (const auto& f : failures) {
          m.skips.push_back(
              "value " + format_double(config.values[f.value_index]) +
              " problem " + std::to_string(f.problem_index) + ": " + f.message);
        }

        const fs::path csv_path = dir / ("sweep_" + a.name + ".csv");
        write_sweep_csv(rows, parameter, csv_path);
        m.outputs.push_back(csv_path.string());

        std::vector<double> xs, ys;
        for (const auto& row : rows) {
          xs.push_back(row.value);
          ys.push_back(row.median_gmin);
        }
        std::vector<CurveFit> fits;
        for (CurveFamily family : sweep_fit_families(parameter)) {
          fits.push_back(fit_curve(family, xs, ys));
        }
        const fs::path fits_path = dir / ("fits_" + a.name + ".json");
        write_fits_json(fits, fits_path);
        m.outputs.push_back(fits_path.string());
      });
}

// ------------------------------------------------------------------ hybrid

struct HybridArgs {
  std::string input;
  std::string sampler = "exhaustive";
  int reads = 1000;
  int sweeps = 50;
  bool post_process = false;
  int c = 2;
  int rounds = 1;
  long long max_iters = -1;
};

int cmd_hybrid(const GlobalArgs& g, const HybridArgs& a) {
  if (a.max_iters < -1) {
    return usage_error("--max-iters must be >= -1");
  }
  HybridConfig config;
  config.encoding = FixedPointEncoding::integer_bits(a.c);
  config.sampler = parse_sampler(a.sampler);
  config.reads = a.reads;
  config.sa_sweeps = a.sweeps;
  config.post_process = a.post_process;
  config.anneal_rounds = a.rounds;
  config.stop.max_iters = a.max_iters;
  config.seed = g.seed;
  config.jobs = g.jobs;
  try {
    config.validate();
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }

  JsonWriter cfg;
  cfg.begin_object();
  cfg.key("input").value(a.input);
  cfg.key("sampler").value(sampler_name(config.sampler));
  cfg.key("reads").value(config.reads);
  cfg.key("sweeps").value(config.sa_sweeps);
  cfg.key("post_process").value(config.post_process);
  cfg.key("c").value(a.c);
  cfg.key("rounds").value(config.anneal_rounds);
  cfg.key("max_iters").value(static_cast<std::int64_t>(config.stop.max_iters));
  cfg.key("jobs").value(g.jobs);
  cfg.key("out_dir").value(resolve_out_dir(g).string());
  cfg.end_object();

  Manifest man;
  man.command = man.file_stem = "hybrid";
  man.seed = g.seed;
  man.config_json = cfg.str();
  return run_with_manifest(
      std::move(man), g, [&](const fs::path& dir, Manifest& m) {
        const Ensemble e = load_ensemble(a.input);
        const BenchmarkResult result = run_benchmark(e, config);
        for (const auto& err : result.errors) m.skips.push_back(err);

        const fs::path csv_path = dir / "benchmark.csv";
        write_benchmark_csv(result, csv_path);
        m.outputs.push_back(csv_path.string());

        const fs::path summary_path = dir / "summary.json";
        write_summary_json(result.summary, summary_path);
        m.outputs.push_back(summary_path.string());
      });
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string input;
  std::vector<std::string> families;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Pulls the (value, median_gmin) columns out of a sweep CSV.
void load_sweep_columns(const std::string& path, std::vector<double>* xs,
                        std::vector<double>* ys) {
  const std::string text = read_text_file(path);
  std::optional<int> x_col, y_col;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (!x_col) {  // first data line is the header
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] == "value") x_col = static_cast<int>(k);
        if (cells[k] == "median_gmin") y_col = static_cast<int>(k);
      }
      if (!x_col || !y_col) {
        throw std::runtime_error(
            "fit input needs value and median_gmin columns: " + path);
      }
      continue;
    }
    const auto max_col = static_cast<std::size_t>(std::max(*x_col, *y_col));
    if (cells.size() <= max_col) {
      throw std::runtime_error("short CSV row in " + path);
    }
    char* rest = nullptr;
    const std::string& xc = cells[static_cast<std::size_t>(*x_col)];
    const std::string& yc = cells[static_cast<std::size_t>(*y_col)];
    const double x = std::strtod(xc.c_str(), &rest);
    if (rest == xc.c_str() || *rest != '\0') {
      throw std::runtime_error("bad number '" + xc + "' in " + path);
    }
    const double y = std::strtod(yc.c_str(), &rest);
    if (rest == yc.c_str() || *rest != '\0') {
      throw std::runtime_error("bad number '" + yc + "' in " + path);
    }
    xs->push_back(x);
    ys->push_back(y);
  }
  if (xs->empty()) throw std::runtime_error("no data rows in " + path);
}

int cmd_fit(const GlobalArgs& g, const FitArgs& a) {
  std::vector<CurveFamily> families;
  if (a.families.empty()) {
    families = {CurveFamily::exp_decay, CurveFamily::poly_decay,
                CurveFamily::plateau, CurveFamily::plateau_offset};
  } else {
    for (const auto& name : a.families) families.push_back(parse_family(name));
  }

  JsonWriter cfg;
  cfg.begin_object();
  cfg.key("input").value(a.input);
  cfg.key("families").begin_array();
  for (CurveFamily f : families) cfg.value(family_name(f));
  cfg.end_array();
  cfg.key("out_dir").value(resolve_out_dir(g).string());
  cfg.end_object();

  Manifest man;
  man.command = man.file_stem = "fit";
  man.seed = g.seed;
  man.config_json = cfg.str();
  return run_with_manifest(std::move(man), g,
                           [&](const fs::path& dir, Manifest& m) {
                             std::vector<double> xs, ys;
                             load_sweep_columns(a.input, &xs, &ys);
                             std::vector<CurveFit> fits;
                             for (CurveFamily family : families) {
                               fits.push_back(fit_curve(family, xs, ys));
                             }
                             const fs::path path = dir / "fits.json";
                             write_fits_json(fits, path);
                             m.outputs.push_back(path.string());
                           });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimum-gap scaling and sampler-seeded Krylov workbench"};
  app.set_version_flag("--version", GROUNDGAP_VERSION);
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--seed", g.seed, "base seed for all stochastic stages")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir,
                 "output directory (default $GROUNDGAP_OUT, then cwd)");

  auto* gen = app.add_subcommand("generate", "write a random problem ensemble");
  gen->fallthrough();
  GenerateArgs ga;
  gen->add_option("--kind", ga.kind, "problem kind")
      ->check(CLI::IsMember({"lls", "lse"}))
      ->capture_default_str();
  auto* gen_m = gen->add_option("--m", ga.m, "rows (lls only; lse uses --n)");
  gen->add_option("--n", ga.n, "variables")->required();
  gen->add_option("--count", ga.count, "number of instances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--range", ga.range, "planted entry box lo:hi, hi exclusive")
      ->capture_default_str();
  auto* gen_kappa =
      gen->add_option("--kappa", ga.kappa, "target condition number");

  auto* gap = app.add_subcommand("gapscan",
                                 "scan the anneal gap of each problem");
  gap->fallthrough();
  GapscanArgs gsa;
  gap->add_option("--input", gsa.input, "ensemble file")->required();
  gap->add_option("--grid", gsa.grid, "schedule points")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
  gap->add_option("--c", gsa.c, "fixed-point bits per variable")
      ->check(CLI::Range(2, 62))
      ->capture_default_str();
  gap->add_flag("--unscaled", gsa.unscaled, "skip coefficient rescaling");
  gap->add_option("--max-qubits", gsa.max_qubits, "skip larger problems")
      ->check(CLI::Range(1, 30))
      ->capture_default_str();

  auto* swp = app.add_subcommand("sweep",
                                 "median g_min versus one problem parameter");
  swp->fallthrough();
  SweepArgs wa;
  swp->add_option("name", wa.name, "swept parameter")
      ->required()
      ->check(CLI::IsMember({"precision", "variables", "rows", "condition"}));
  swp->add_option("--per-value", wa.per_value, "problems per swept value")
      ->check(CLI::PositiveNumber);
  swp->add_option("--grid", wa.grid, "schedule points")
      ->check(CLI::Range(2, 100000));
  swp->add_option("--max-qubits", wa.max_qubits, "per-problem qubit budget")
      ->check(CLI::Range(1, 30));
  swp->add_flag("--unscaled", wa.unscaled, "skip coefficient rescaling");

  auto* hyb = app.add_subcommand("hybrid",
                                 "sampler-seeded versus zero-seeded solves");
  hyb->fallthrough();
  HybridArgs ha;
  hyb->add_option("--input", ha.input, "ensemble file")->required();
  hyb->add_option("--sampler", ha.sampler, "seeding sampler")
      ->check(CLI::IsMember({"exhaustive", "sa"}))
      ->capture_default_str();
  hyb->add_option("--reads", ha.reads, "sa reads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hyb->add_option("--sweeps", ha.sweeps, "sa sweeps per read")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hyb->add_flag("--post-process", ha.post_process,
                "greedy descent on the best read");
  hyb->add_option("--c", ha.c, "fixed-point bits per variable")
      ->check(CLI::Range(2, 62))
      ->capture_default_str();
  hyb->add_option("--rounds", ha.rounds, "sampler rounds, best kept")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hyb->add_option("--max-iters", ha.max_iters,
                  "solver iteration cap (-1: dimension-based)");

  auto* fit = app.add_subcommand("fit", "fit decay curves to a sweep CSV");
  fit->fallthrough();
  FitArgs fa;
  fit->add_option("--input", fa.input, "sweep CSV")->required();
  fit->add_option("--family", fa.families, "curve family (repeatable)")
      ->check(CLI::IsMember(
          {"exp_decay", "poly_decay", "plateau", "plateau_offset"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ga.has_m = gen_m->count() > 0;
  ga.has_kappa = gen_kappa->count() > 0;

  try {
    if (gen->parsed()) return cmd_generate(g, ga);
    if (gap->parsed()) return cmd_gapscan(g, gsa);
    if (swp->parsed()) return cmd_sweep(g, wa);
    if (hyb->parsed()) return cmd_hybrid(g, ha);
    if (fit->parsed()) return cmd_fit(g, fa);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
