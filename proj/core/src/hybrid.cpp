#include "groundgap/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "groundgap/parallel.hpp"
#include "groundgap/rng.hpp"
#include "groundgap/sweeps.hpp"
#include "groundgap/textio.hpp"

namespace groundgap {

const char* sampler_name(SamplerKind k) {
  return k == SamplerKind::exhaustive ? "exhaustive" : "sa";
}

SamplerKind parse_sampler(const std::string& name) {
  if (name == "exhaustive") return SamplerKind::exhaustive;
  if (name == "sa") return SamplerKind::sa;
  throw std::invalid_argument("unknown sampler '" + name +
                              "' (expected exhaustive or sa)");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::quantum: return "quantum";
    case Verdict::classical: return "classical";
    case Verdict::tie: return "tie";
  }
  return "unknown";
}

void HybridConfig::validate() const {
  encoding.validate();
  if (reads < 1) throw std::invalid_argument("reads must be >= 1");
  if (sa_sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
  if (anneal_rounds < 1)
    throw std::invalid_argument("anneal_rounds must be >= 1");
}

namespace {

template <typename Fn>
auto stage(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(label) + ": " + e.what());
  }
}

SolveReport solve_from(const Problem& p, const Eigen::VectorXd& x0,
                       const StoppingRule& stop) {
  return p.kind == ProblemKind::lls ? lsmr(p.a, p.b, x0, stop)
                                    : bicg(p.a, p.b, x0, stop);
}

}  // namespace

HybridResult run_hybrid(const Problem& p, const HybridConfig& config) {
  config.validate();
  p.validate();

  const QuboModel qubo =
      stage("qubo build", [&] { return build_qubo(p, config.encoding); });

  SampleSet samples;
  if (config.sampler == SamplerKind::exhaustive) {
    samples = stage("sampler", [&] { return solve_exhaustive(qubo); });
  } else {
    samples = stage("sampler", [&] {
      SampleSet best;
      for (int round = 0; round < config.anneal_rounds; ++round) {
        SaOptions sa;
        sa.reads = config.reads;
        sa.sweeps = config.sa_sweeps;
        sa.seed = derive_seed(config.seed, RngStage::hybrid_sampler,
                              static_cast<std::uint64_t>(round));
        sa.jobs = config.jobs;
        SampleSet set = sample_sa(qubo, sa);
        if (round == 0 || sample_less(set.best(), best.best())) {
          best = std::move(set);
        }
      }
      return best;
    });
  }

  std::vector<std::uint8_t> bits = samples.best().bits;
  if (config.post_process)
    bits = stage("post-process", [&] { return greedy_descent(qubo, bits); });

  HybridResult result;
  result.samples = std::move(samples);
  result.seed_energy = qubo.evaluate(bits);
  result.x_seed = stage("decode", [&] {
    return decode(bits, config.encoding, static_cast<int>(p.cols()));
  });
  result.report =
      stage("solver", [&] { return solve_from(p, result.x_seed, config.stop); });
  result.report.guess = GuessTag::quantum;
  return result;
}

Comparison compare(const Problem& p, const HybridConfig& config,
                   int problem_id) {
  const HybridResult hybrid = run_hybrid(p, config);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.cols());
  const SolveReport base = solve_from(p, zero, config.stop);

  Comparison cmp;
  cmp.problem_id = problem_id;
  cmp.iterations_quantum = hybrid.report.iterations;
  cmp.iterations_zero = base.iterations;
  if (cmp.iterations_quantum != cmp.iterations_zero) {
    cmp.verdict_iters = cmp.iterations_quantum < cmp.iterations_zero
                            ? Verdict::quantum
                            : Verdict::classical;
  }

  // Metric (ii): fixed common budget, compare final true residuals.
  StoppingRule fixed = config.stop;
  fixed.max_iters = base.iterations;
  const SolveReport q2 = solve_from(p, hybrid.x_seed, fixed);
  const SolveReport z2 = solve_from(p, zero, fixed);
  cmp.residual_quantum = (p.b - p.a * q2.x).norm();
  cmp.residual_zero = (p.b - p.a * z2.x).norm();
  if (base.termination == Termination::converged) {
    if (std::abs(cmp.residual_quantum - cmp.residual_zero) <= 1e-12)
      cmp.verdict_residual = Verdict::tie;
    else
      cmp.verdict_residual = cmp.residual_quantum < cmp.residual_zero
                                 ? Verdict::quantum
                                 : Verdict::classical;
  }
  return cmp;
}

BenchmarkResult run_benchmark(const Ensemble& ensemble,
                              const HybridConfig& config) {
  if (ensemble.problems.empty())
    throw std::invalid_argument("benchmark ensemble is empty");
  const std::size_t count = ensemble.problems.size();

  std::vector<std::optional<Comparison>> slots(count);
  std::vector<std::string> errors(count);
  parallel_for_index(count, config.jobs, [&](std::size_t j) {
    HybridConfig local = config;
    local.jobs = 1;
    local.seed = derive_seed(config.seed, RngStage::hybrid_sampler, j);
    try {
      slots[j] = compare(ensemble.problems[j], local, static_cast<int>(j));
    } catch (const std::exception& e) {
      errors[j] = "problem " + std::to_string(j) + ": " + e.what();
    }
  });

  BenchmarkResult result;
  std::vector<double> improvements;
  for (std::size_t j = 0; j < count; ++j) {
    if (!slots[j]) {
      result.errors.push_back(errors[j]);
      ++result.summary.failures;
      continue;
    }
    const Comparison& cmp = *slots[j];
    result.comparisons.push_back(cmp);
    ++result.summary.problems;
    switch (cmp.verdict_iters) {
      case Verdict::quantum:
        ++result.summary.wins_iters;
        improvements.push_back(
            100.0 *
            static_cast<double>(cmp.iterations_zero - cmp.iterations_quantum) /
            static_cast<double>(cmp.iterations_zero));
        break;
      case Verdict::classical: ++result.summary.losses_iters; break;
      case Verdict::tie: ++result.summary.ties_iters; break;
    }
    if (cmp.verdict_residual) {
      switch (*cmp.verdict_residual) {
        case Verdict::quantum: ++result.summary.wins_resid; break;
        case Verdict::classical: ++result.summary.losses_resid; break;
        case Verdict::tie: ++result.summary.ties_resid; break;
      }
    }
  }
  if (!improvements.empty())
    result.summary.median_improvement_pct = median_and_mad(improvements).first;
  return result;
}

void write_benchmark_csv(const BenchmarkResult& result,
                         const std::filesystem::path& path) {
  std::string out =
      "problem_id,iters_quantum,iters_zero,res_quantum,res_zero,"
      "verdict_iters,verdict_residual\n";
  for (const Comparison& cmp : result.comparisons) {
    out += format_integer(cmp.problem_id);
    out += ',';
    out += format_integer(cmp.iterations_quantum);
    out += ',';
    out += format_integer(cmp.iterations_zero);
    out += ',';
    out += format_double(cmp.residual_quantum);
    out += ',';
    out += format_double(cmp.residual_zero);
    out += ',';
    out += verdict_name(cmp.verdict_iters);
    out += ',';
    out += cmp.verdict_residual ? verdict_name(*cmp.verdict_residual)
                                : "unusable";
    out += '\n';
  }
  write_text_file(path, out);
}

void write_summary_json(const BenchmarkSummary& summary,
                        const std::filesystem::path& path) {
  JsonWriter w;
  w.begin_object();
  w.key("wins_iters");
  w.value(static_cast<std::int64_t>(summary.wins_iters));
  w.key("ties_iters");
  w.value(static_cast<std::int64_t>(summary.ties_iters));
  w.key("losses_iters");
  w.value(static_cast<std::int64_t>(summary.losses_iters));
  w.key("wins_resid");
  w.value(static_cast<std::int64_t>(summary.wins_resid));
  w.key("ties_resid");
  w.value(static_cast<std::int64_t>(summary.ties_resid));
  w.key("losses_resid");
  w.value(static_cast<std::int64_t>(summary.losses_resid));
  w.key("median_improvement_pct");
  if (summary.median_improvement_pct)
    w.value(*summary.median_improvement_pct);
  else
    w.null();
  w.key("valid");
  w.value(summary.valid());
  w.end_object();
  write_text_file(path, w.str() + "\n");
}

}  // namespace groundgap
