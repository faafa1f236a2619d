#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groundgap/encoding.hpp"
#include "groundgap/krylov.hpp"
#include "groundgap/problems.hpp"
#include "groundgap/samplers.hpp"

namespace groundgap {

enum class SamplerKind { exhaustive, sa };

const char* sampler_name(SamplerKind k);
SamplerKind parse_sampler(const std::string& name);

struct HybridConfig {
  FixedPointEncoding encoding = FixedPointEncoding::integer_bits(2);
  SamplerKind sampler = SamplerKind::exhaustive;
  int reads = 1000;    // sa
  int sa_sweeps = 50;  // sa
  bool post_process = false;  // greedy descent on the best read
  int anneal_rounds = 1;      // extra sampler rounds, best round kept
  StoppingRule stop;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

struct HybridResult {
  SolveReport report;  // warm-started solve, tagged quantum
  SampleSet samples;
  Eigen::VectorXd x_seed;   // decoded x^(q)
  double seed_energy = 0.0;  // F'(q) of the seeding bits
};

// Algorithm: build the residual QUBO, sample, optionally post-process the
// best read, decode to x^(q), then LSMR (LLS) or BiCG (LSE) from x^(q).
HybridResult run_hybrid(const Problem& p, const HybridConfig& config);

enum class Verdict { quantum, classical, tie };
const char* verdict_name(Verdict v);

struct Comparison {
  int problem_id = 0;
  long long iterations_quantum = 0;
  long long iterations_zero = 0;
  // Final true residuals when both solvers get exactly iterations_zero steps.
  double residual_quantum = 0.0;
  double residual_zero = 0.0;
  Verdict verdict_iters = Verdict::tie;
  // Unset when the zero-guess baseline never converged (metric unusable).
  std::optional<Verdict> verdict_residual;
};

// Metric (i): fewer iterations to converge. Metric (ii): smaller residual at
// the common budget iterations_zero; residuals within 1e-12 tie.
Comparison compare(const Problem& p, const HybridConfig& config,
                   int problem_id = 0);

struct BenchmarkSummary {
  int wins_iters = 0, ties_iters = 0, losses_iters = 0;
  int wins_resid = 0, ties_resid = 0, losses_resid = 0;
  // Median % iteration saving among metric-(i) quantum wins.
  std::optional<double> median_improvement_pct;
  int problems = 0;  // successful comparisons
  int failures = 0;
  bool valid() const { return problems > 0; }
};

struct BenchmarkResult {
  std::vector<Comparison> comparisons;
  BenchmarkSummary summary;
  std::vector<std::string> errors;  // one message per failed problem
};

BenchmarkResult run_benchmark(const Ensemble& ensemble,
                              const HybridConfig& config);

// CSV `problem_id,iters_quantum,iters_zero,res_quantum,res_zero,
// verdict_iters,verdict_residual` (verdict_residual: `unusable` when unset).
void write_benchmark_csv(const BenchmarkResult& result,
                         const std::filesystem::path& path);
// JSON with win/tie/loss counts per metric, median_improvement_pct
// (null when there are no wins) and a validity flag.
void write_summary_json(const BenchmarkSummary& summary,
                        const std::filesystem::path& path);

}  // namespace groundgap
