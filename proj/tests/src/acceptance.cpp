// Acceptance gate: runs the eight shipping criteria end to end and prints
// one PASS/FAIL line each; the exit code is the number of failures. Runtime
// budgets are part of the criteria and are enforced here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "groundgap/encoding.hpp"
#include "groundgap/hybrid.hpp"
#include "groundgap/krylov.hpp"
#include "groundgap/problems.hpp"
#include "groundgap/rng.hpp"
#include "groundgap/spectral.hpp"
#include "groundgap/sweeps.hpp"
#include "groundgap/textio.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace groundgap;

struct Checker {
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ------------------------------------------------------------- criterion 1

void criterion_encoding(Checker& ck) {
  std::mt19937_64 dims(101);
  std::uniform_int_distribution<int> pick_n(1, 4);
  std::uniform_int_distribution<int> pick_c(2, 5);
  std::uniform_int_distribution<int> extra_rows(1, 6);

  for (int i = 0; i < 200; ++i) {
    const int n = pick_n(dims);
    int c = pick_c(dims);
    while (n * c > 16) c = pick_c(dims);

    EnsembleSpec spec;
    spec.kind = ProblemKind::lls;
    spec.count = 1;
    spec.n = n;
    spec.m = n + extra_rows(dims);
    spec.lo = -4;
    spec.hi = 4;
    spec.seed = 9000 + static_cast<std::uint64_t>(i);
    const Problem p = generate(spec)[0];

    const auto enc = FixedPointEncoding::integer_bits(c);
    const QuboModel q = build_qubo(p, enc);
    const int nb = q.num_bits();
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << nb); ++z) {
      const auto bits = oracles::bits_of(z, nb);
      const double lhs = q.evaluate(bits) + q.offset;
      const Eigen::VectorXd x = decode(bits, enc, n);
      const double truth = (p.a * x - p.b).squaredNorm();
      const double rel = std::abs(lhs - truth) / std::max(1.0, std::abs(truth));
      if (rel > 1e-8) {
        ck.require(false, "problem " + std::to_string(i) + " assignment " +
                              std::to_string(z) + ": F'(q)+offset=" + num(lhs) +
                              " vs residual " + num(truth));
        return;
      }
    }
  }
}

// ------------------------------------------------------------- criterion 2

IsingModel random_ising(int nq, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  IsingModel m(nq);
  for (int a = 0; a < nq; ++a) m.h[a] = coef(rng);
  for (int a = 0; a < nq; ++a) {
    for (int b = a + 1; b < nq; ++b) m.coupling(a, b) = coef(rng);
  }
  return m;
}

void criterion_spectral(Checker& ck) {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> pick_nq(2, 10);
  std::uniform_real_distribution<double> pick_s(0.05, 0.95);
  const Schedule sched;

  for (int i = 0; i < 50; ++i) {
    const int nq = pick_nq(rng);
    const IsingModel model = random_ising(nq, 4000 + static_cast<std::uint64_t>(i));
    const double s = pick_s(rng);
    const auto cache = AnnealOperator::diagonal_cache(model);

    LanczosOptions lopt;
    lopt.seed = 600 + static_cast<std::uint64_t>(i);
    const auto [e0, e1] =
        lowest_two(AnnealOperator::at(cache, nq, sched, s), lopt);
    const Eigen::VectorXd dense = oracles::dense_spectrum(
        oracles::dense_hamiltonian(model, sched.a_of_s(s), sched.b_of_s(s)));
    ck.require(std::abs(e0 - dense(0)) <= 1e-8,
               "model " + std::to_string(i) + ": e0=" + num(e0) +
                   " vs dense " + num(dense(0)) + " at s=" + num(s));
    ck.require(std::abs(e1 - dense(1)) <= 1e-8,
               "model " + std::to_string(i) + ": e1=" + num(e1) +
                   " vs dense " + num(dense(1)) + " at s=" + num(s));

    const auto [f0, f1] =
        lowest_two(AnnealOperator::at(cache, nq, sched, 0.0), lopt);
    ck.require(std::abs((f1 - f0) - 2.0) <= 1e-9,
               "model " + std::to_string(i) +
                   ": gap at s=0 is " + num(f1 - f0));
    if (!ck.failures.empty()) return;
  }

  IsingModel one(1);
  one.h[0] = 1.0;
  const auto cache = AnnealOperator::diagonal_cache(one);
  const auto [g0, g1] = lowest_two(AnnealOperator::at(cache, 1, sched, 0.5));
  ck.require(std::abs((g1 - g0) - std::sqrt(2.0)) <= 1e-9,
             "single qubit: gap at s=0.5 is " + num(g1 - g0));
}

// ------------------------------------------------------------- criterion 3

void criterion_precision_sweep(Checker& ck) {
  SweepConfig config = SweepConfig::preset(SweepParameter::precision_c);
  config.per_value = 20;
  const auto rows = run_sweep(config, 301, nullptr);
  ck.require(rows.size() == 5, "expected 5 sweep rows");
  if (rows.size() != 5) return;

  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    ck.require(row.n_samples == 20,
               "c=" + num(row.value) + ": only " +
                   std::to_string(row.n_samples) + " samples");
    xs.push_back(row.value);
    ys.push_back(row.median_gmin);
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ck.require(ys[i] < ys[i - 1],
               "median not strictly decreasing: g(" + num(xs[i - 1]) + ")=" +
                   num(ys[i - 1]) + ", g(" + num(xs[i]) + ")=" + num(ys[i]));
  }

  const CurveFit exp_fit = fit_curve(CurveFamily::exp_decay, xs, ys);
  const CurveFit plat_fit = fit_curve(CurveFamily::plateau, xs, ys);
  ck.require(exp_fit.relative_error < plat_fit.relative_error,
             "exp fit error " + num(exp_fit.relative_error) +
                 " not below plateau fit error " +
                 num(plat_fit.relative_error));
  ck.require(exp_fit.params[1] > 0.5,
             "fitted decay rate b=" + num(exp_fit.params[1]) + " <= 0.5");
}

// ------------------------------------------------------------- criterion 4

void criterion_rows_sweep(Checker& ck) {
  SweepConfig config = SweepConfig::preset(SweepParameter::rows_m);
  config.per_value = 20;
  const auto rows = run_sweep(config, 401, nullptr);
  ck.require(rows.size() == 30, "expected 30 sweep rows");
  if (rows.size() != 30) return;

  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    xs.push_back(row.value);
    ys.push_back(row.median_gmin);
  }
  const CurveFit plat = fit_curve(CurveFamily::plateau, xs, ys);
  ck.require(plat.relative_error <= 0.1,
             "plateau fit relative error " + num(plat.relative_error) +
                 " > 0.1");
  ck.require(ys.back() >= ys.front(),
             "median shrank from m=10 (" + num(ys.front()) + ") to m=300 (" +
                 num(ys.back()) + ")");
}

// ------------------------------------------------------------- criterion 5

double median_at(const std::vector<SweepRow>& rows, double value) {
  for (const auto& row : rows) {
    if (row.value == value) return row.median_gmin;
  }
  throw std::runtime_error("no sweep row at value " + num(value));
}

void criterion_condition_sweep(Checker& ck) {
  // Medians at the four referenced kappa values only; the complete 39-value
  // grid would blow the runtime budget without changing any clause. Sample
  // medians at high kappa carry heavy-tailed noise, so per-value is raised
  // to the largest count the budget allows.
  SweepConfig scaled = SweepConfig::preset(SweepParameter::condition_kappa);
  scaled.values = {1.0, 10.0, 200.0, 300.0};
  scaled.per_value = 200;
  std::vector<SweepFailure> scaled_failures;
  const auto rows = run_sweep(scaled, 501, &scaled_failures);
  ck.require(scaled_failures.empty(),
             std::to_string(scaled_failures.size()) +
                 " scaled scans failed; first: " +
                 (scaled_failures.empty() ? "" : scaled_failures[0].message));
  const double med1 = median_at(rows, 1.0);
  const double med10 = median_at(rows, 10.0);
  const double med200 = median_at(rows, 200.0);
  const double med300 = median_at(rows, 300.0);
  ck.require(med10 <= 0.5 * med1, "median at kappa=10 (" + num(med10) +
                                      ") above half of kappa=1 (" + num(med1) +
                                      ")");
  ck.require(std::abs(med200 - med300) <= 0.15 * med200,
             "no flattening: median(200)=" + num(med200) +
                 ", median(300)=" + num(med300));

  SweepConfig unscaled = SweepConfig::preset(SweepParameter::condition_kappa);
  unscaled.values = {100.0, 200.0, 300.0};
  unscaled.per_value = 20;
  unscaled.scaled = false;
  std::vector<SweepFailure> raw_failures;
  const auto raw_rows = run_sweep(unscaled, 502, &raw_failures);
  ck.require(raw_failures.empty(),
             std::to_string(raw_failures.size()) +
                 " unscaled scans failed; first: " +
                 (raw_failures.empty() ? "" : raw_failures[0].message));
  for (const auto& row : raw_rows) {
    ck.require(row.median_gmin >= 1.8,
               "unscaled median at kappa=" + num(row.value) + " is " +
                   num(row.median_gmin) + " < 1.8");
  }

  // Basis energies scale linearly, so the classical (s=1) gap scales exactly.
  const auto enc = FixedPointEncoding::integer_bits(2);
  for (const double kappa : {1.0, 10.0, 100.0, 300.0}) {
    EnsembleSpec spec;
    spec.kind = ProblemKind::lls;
    spec.count = 5;
    spec.m = 40;
    spec.n = 4;
    spec.lo = -2;
    spec.hi = 2;
    spec.kappa_target = kappa;
    spec.seed = 550 + static_cast<std::uint64_t>(kappa);
    for (const Problem& p : generate(spec)) {
      const IsingModel raw = qubo_to_ising(build_qubo(p, enc));
      const IsingModel scaled_model = scale_ising(raw);
      const auto [r0, r1] = lowest_two_diagonal(raw);
      const auto [s0, s1] = lowest_two_diagonal(scaled_model);
      const double expected = scaled_model.scale * (r1 - r0);
      ck.require(std::abs((s1 - s0) - expected) <=
                     1e-9 * std::max(1.0, std::abs(expected)),
                 "kappa=" + num(kappa) + ": scaled gap " + num(s1 - s0) +
                     " vs scale*raw " + num(expected));
    }
  }
}

// ------------------------------------------------------------- criterion 6

void criterion_krylov(Checker& ck) {
  for (int i = 0; i < 50; ++i) {  // least squares, LSMR
    EnsembleSpec spec;
    spec.kind = ProblemKind::lls;
    spec.count = 1;
    spec.n = 3 + (i % 33);
    spec.m = spec.n + 8;
    spec.lo = -8;
    spec.hi = 8;
    spec.seed = 7000 + static_cast<std::uint64_t>(i);
    const Problem p = generate(spec)[0];
    const std::string tag = "lls " + std::to_string(i);

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.a.cols());
    const SolveReport cold = lsmr(p.a, p.b, zero, StoppingRule{});
    ck.require(cold.termination == Termination::converged,
               tag + ": cold solve did not converge");
    const double fr = cold.final_residual();
    const double nar = (p.a.transpose() * (p.b - p.a * cold.x)).norm();
    const double bound =
        1e-6 * p.b.norm() + 1e-6 * p.a.norm() * cold.x.norm();
    ck.require(fr <= 1.001 * bound || nar <= 1.001 * 1e-6 * p.a.norm() * fr,
               tag + ": residual " + num(fr) + " outside tolerance " +
                   num(bound));
    const Eigen::VectorXd oracle = oracles::normal_solve(p.a, p.b);
    ck.require((cold.x - oracle).norm() <= 1e-3 * std::max(1.0, oracle.norm()),
               tag + ": solution " + num((cold.x - oracle).norm()) +
                   " from direct oracle");

    const SolveReport warm = lsmr(p.a, p.b, *p.x_star, StoppingRule{});
    ck.require(warm.iterations == 0 &&
                   warm.termination == Termination::converged,
               tag + ": exact seed took " + std::to_string(warm.iterations) +
                   " iterations");
    ck.require(warm.iterations <= cold.iterations,
               tag + ": warm start exceeded the cold iteration count");
    if (!ck.failures.empty()) return;
  }

  for (int i = 0; i < 50; ++i) {  // square systems, BiCG
    EnsembleSpec spec;
    spec.kind = ProblemKind::lse;
    spec.count = 1;
    spec.n = 2 + (i % 34);
    spec.m = spec.n;
    spec.lo = -8;
    spec.hi = 8;
    spec.seed = 7500 + static_cast<std::uint64_t>(i);
    const Problem p = generate(spec)[0];
    const std::string tag = "lse " + std::to_string(i);

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.a.cols());
    const SolveReport cold = bicg(p.a, p.b, zero, StoppingRule{});
    ck.require(cold.termination == Termination::converged,
               tag + ": cold solve did not converge");
    ck.require(cold.final_residual() <= 1.001 * 1e-5 * p.b.norm(),
               tag + ": residual " + num(cold.final_residual()) +
                   " above rtol*||b||");
    const Eigen::VectorXd oracle = oracles::gauss_solve(p.a, p.b);
    ck.require((cold.x - oracle).norm() <= 1e-3 * std::max(1.0, oracle.norm()),
               tag + ": solution " + num((cold.x - oracle).norm()) +
                   " from direct oracle");

    const SolveReport warm = bicg(p.a, p.b, *p.x_star, StoppingRule{});
    ck.require(warm.iterations == 0 &&
                   warm.termination == Termination::converged,
               tag + ": exact seed took " + std::to_string(warm.iterations) +
                   " iterations");
    ck.require(warm.iterations <= cold.iterations,
               tag + ": warm start exceeded the cold iteration count");
    if (!ck.failures.empty()) return;
  }
}

// ------------------------------------------------------------- criterion 7

void criterion_hybrid(Checker& ck) {
  EnsembleSpec spec;
  spec.kind = ProblemKind::lls;
  spec.count = 50;
  spec.m = 100;
  spec.n = 4;
  spec.lo = -8;
  spec.hi = 8;
  spec.seed = 701;
  const Ensemble e{spec, generate(spec)};

  HybridConfig exhaustive;
  exhaustive.encoding = FixedPointEncoding::integer_bits(4);
  const BenchmarkResult exact = run_benchmark(e, exhaustive);
  ck.require(exact.summary.failures == 0,
             std::to_string(exact.summary.failures) + " exhaustive failures");
  ck.require(exact.summary.problems == 50, "expected 50 comparisons");
  int eligible = 0, quantum_wins = 0;
  for (const Comparison& cmp : exact.comparisons) {
    if (cmp.iterations_zero >= 1) {
      ++eligible;
      if (cmp.verdict_iters == Verdict::quantum) ++quantum_wins;
    }
  }
  ck.require(eligible > 0, "no baseline needed any iterations");
  ck.require(quantum_wins == eligible,
             std::to_string(quantum_wins) + " of " + std::to_string(eligible) +
                 " eligible problems won metric (i)");

  HybridConfig annealer = exhaustive;
  annealer.sampler = SamplerKind::sa;
  annealer.reads = 1000;
  annealer.sa_sweeps = 50;
  annealer.seed = 702;
  const BenchmarkResult sampled = run_benchmark(e, annealer);
  ck.require(sampled.summary.failures == 0,
             std::to_string(sampled.summary.failures) + " sa failures");
  ck.require(sampled.summary.losses_resid <= 0.2 * sampled.summary.problems,
             "sa lost metric (ii) on " +
                 std::to_string(sampled.summary.losses_resid) + " of " +
                 std::to_string(sampled.summary.problems) + " problems");
}

// ------------------------------------------------------------- criterion 8

int run_cli(const std::string& args, const fs::path& cwd) {
  fs::create_directories(cwd);
  const std::string cmd = "cd '" + cwd.string() + "' && env -u GROUNDGAP_OUT '" +
                          GROUNDGAP_CLI_PATH + "' " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism(Checker& ck) {
  const fs::path base =
      fs::temp_directory_path() /
      ("groundgap_accept_" + std::to_string(getpid()));
  const std::vector<std::string> commands = {
      "generate --kind lls --m 6 --n 2 --count 2 --range -2:2 --seed 9 "
      "--out-dir run",
      "gapscan --input run/ensemble.json --grid 11 --c 2 --seed 9 "
      "--out-dir run",
      "sweep precision --per-value 1 --grid 5 --seed 9 --out-dir run",
      "hybrid --input run/ensemble.json --sampler sa --reads 10 --sweeps 5 "
      "--seed 9 --out-dir run",
      "fit --input run/sweep_precision.csv --seed 9 --out-dir run",
  };
  for (const char* rep : {"rep_a", "rep_b"}) {
    for (const std::string& cmd : commands) {
      const int code = run_cli(cmd, base / rep);
      ck.require(code == 0, std::string(rep) + ": exit " +
                                std::to_string(code) + " from: " + cmd);
      if (code != 0) return;
    }
  }

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(base / "rep_a" / "run")) {
    if (entry.is_regular_file()) names.push_back(entry.path().filename());
  }
  std::sort(names.begin(), names.end());
  ck.require(!names.empty(), "first replica produced no files");

  for (const std::string& name : names) {
    const fs::path first = base / "rep_a" / "run" / name;
    const fs::path second = base / "rep_b" / "run" / name;
    if (!fs::exists(second)) {
      ck.require(false, name + " missing from the second replica");
      continue;
    }
    if (name.size() > 14 &&
        name.compare(name.size() - 14, 14, "_manifest.json") == 0) {
      auto m1 = nlohmann::json::parse(std::ifstream(first));
      auto m2 = nlohmann::json::parse(std::ifstream(second));
      for (auto* m : {&m1, &m2}) {
        m->erase("started_at");
        m->erase("duration_seconds");
      }
      ck.require(m1 == m2, name + " differs beyond its timestamps");
    } else {
      ck.require(read_text_file(first) == read_text_file(second),
                 name + " is not byte-identical across reruns");
    }
  }
  fs::remove_all(base);
}

// ------------------------------------------------------------------ driver

struct Criterion {
  int number;
  const char* label;
  double budget_seconds;  // 0: no budget in the criterion
  std::function<void(Checker&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "encoding oracle", 60.0, criterion_encoding},
      {2, "spectral correctness", 300.0, criterion_spectral},
      {3, "precision sweep", 1200.0, criterion_precision_sweep},
      {4, "rows sweep", 1800.0, criterion_rows_sweep},
      {5, "condition sweep", 1800.0, criterion_condition_sweep},
      {6, "krylov correctness", 0.0, criterion_krylov},
      {7, "hybrid pipeline", 0.0, criterion_hybrid},
      {8, "determinism", 0.0, criterion_determinism},
  };

  // Optional arguments: criterion numbers to run (default all).
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.number) == wanted.end()) {
      continue;
    }
    Checker ck;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(ck);
    } catch (const std::exception& e) {
      ck.require(false, std::string("unhandled error: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
      ck.require(false, "runtime " + num(seconds) + " s exceeds the " +
                            num(c.budget_seconds) + " s budget");
    }
    std::printf("criterion %d (%s): %s (%.1f s)\n", c.number, c.label,
                ck.failures.empty() ? "PASS" : "FAIL", seconds);
    for (const std::string& what : ck.failures) {
      std::printf("  - %s\n", what.c_str());
    }
    std::fflush(stdout);
    if (!ck.failures.empty()) ++failed;
  }
  return failed;
}
