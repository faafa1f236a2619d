// Microbenchmarks for the hot paths: the anneal matvec, the Lanczos
// eigensolve, SA sampling, QUBO construction and the Krylov solvers.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "groundgap/encoding.hpp"
#include "groundgap/krylov.hpp"
#include "groundgap/problems.hpp"
#include "groundgap/samplers.hpp"
#include "groundgap/spectral.hpp"

namespace {

using namespace groundgap;

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

Problem planted(ProblemKind kind, int m, int n, std::uint64_t seed) {
  EnsembleSpec spec;
  spec.kind = kind;
  spec.count = 1;
  spec.m = m;
  spec.n = n;
  spec.lo = -8;
  spec.hi = 8;
  spec.seed = seed;
  return generate(spec)[0];
}

void bm_anneal_apply(benchmark::State& state) {
  const int nq = static_cast<int>(state.range(0));
  const IsingModel model = random_ising(nq, 11);
  const AnnealOperator op = AnnealOperator::at(
      AnnealOperator::diagonal_cache(model), nq, Schedule{}, 0.5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(op.dim()), out(op.dim());
  for (double& vi : v) vi = gauss(rng);
  for ([[maybe_unused]] auto _ : state) {
    op.apply(v.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(op.dim()));
}

void bm_lowest_two(benchmark::State& state) {
  const int nq = static_cast<int>(state.range(0));
  const IsingModel model = random_ising(nq, 13);
  const AnnealOperator op = AnnealOperator::at(
      AnnealOperator::diagonal_cache(model), nq, Schedule{}, 0.5);
  for ([[maybe_unused]] auto _ : state) {
    benchmark::DoNotOptimize(lowest_two(op));
  }
}

void bm_build_qubo(benchmark::State& state) {
  const Problem p = planted(ProblemKind::lls, 300, 6, 17);
  const auto enc = FixedPointEncoding::integer_bits(3);
  for ([[maybe_unused]] auto _ : state) {
    benchmark::DoNotOptimize(build_qubo(p, enc));
  }
}

void bm_sample_sa(benchmark::State& state) {
  const Problem p = planted(ProblemKind::lls, 40, 4, 19);
  const QuboModel q = build_qubo(p, FixedPointEncoding::integer_bits(2));
  SaOptions opts;
  opts.reads = 100;
  opts.sweeps = 50;
  opts.seed = 23;
  for ([[maybe_unused]] auto _ : state) {
    benchmark::DoNotOptimize(sample_sa(q, opts));
  }
}

void bm_lsmr(benchmark::State& state) {
  const Problem p = planted(ProblemKind::lls, 200, 50, 29);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.a.cols());
  for ([[maybe_unused]] auto _ : state) {
    benchmark::DoNotOptimize(lsmr(p.a, p.b, zero, StoppingRule{}));
  }
}

void bm_bicg(benchmark::State& state) {
  const Problem p = planted(ProblemKind::lse, 50, 50, 31);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.a.cols());
  for ([[maybe_unused]] auto _ : state) {
    benchmark::DoNotOptimize(bicg(p.a, p.b, zero, StoppingRule{}));
  }
}

BENCHMARK(bm_anneal_apply)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK(bm_lowest_two)->Arg(8)->Arg(10);
BENCHMARK(bm_build_qubo);
BENCHMARK(bm_sample_sa);
BENCHMARK(bm_lsmr);
BENCHMARK(bm_bicg);

}  // namespace

BENCHMARK_MAIN();
