#include "groundgap/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "groundgap/parallel.hpp"
#include "groundgap/rng.hpp"
#include "groundgap/textio.hpp"

namespace groundgap {

bool sample_less(const Sample& x, const Sample& y) {
  if (x.energy != y.energy) return x.energy < y.energy;
  return x.bits < y.bits;
}

const Sample& SampleSet::best() const {
  if (samples.empty()) throw std::logic_error("sample set is empty");
  return samples.front();
}

SampleSet solve_exhaustive(const QuboModel& q, int top_k) {
  const int nb = q.num_bits();
  if (nb < 1 || nb > 24)
    throw std::invalid_argument("exhaustive search supports 1..24 bits");
  if (top_k < 1) throw std::invalid_argument("top_k must be positive");

  std::vector<Sample> best;
  best.reserve(static_cast<std::size_t>(top_k) + 1);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(nb), 0);
  const auto visit = [&](double energy_estimate) {
    if (static_cast<int>(best.size()) == top_k &&
        energy_estimate > best.back().energy)
      return;
    Sample cand{bits, q.evaluate(bits)};  // store the exact energy
    auto pos = std::upper_bound(best.begin(), best.end(), cand, sample_less);
    if (static_cast<int>(best.size()) == top_k && pos == best.end()) return;
    best.insert(pos, std::move(cand));
    if (static_cast<int>(best.size()) > top_k) best.pop_back();
  };

  double energy = q.evaluate(bits);
  visit(energy);
  const std::uint64_t total = std::uint64_t{1} << nb;
  for (std::uint64_t counter = 1; counter < total; ++counter) {
    const int a = std::countr_zero(counter);  // Gray-code flip position
    energy += q.flip_delta(bits, a);
    bits[static_cast<std::size_t>(a)] ^= 1u;
    if ((counter & 0xffffu) == 0) energy = q.evaluate(bits);  // drift resync
    visit(energy);
  }

  SampleSet set;
  set.samples = std::move(best);
  set.reads = static_cast<long long>(total);
  set.sampler = "exhaustive";
  return set;
}

SampleSet sample_sa(const QuboModel& q, const SaOptions& opts) {
  const int nb = q.num_bits();
  if (nb < 1) throw std::invalid_argument("model has no bits");
  if (opts.reads < 1) throw std::invalid_argument("reads must be >= 1");
  if (opts.sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
  if (!(opts.beta_start > 0.0))
    throw std::invalid_argument("beta_start must be positive");

  // Largest possible single-flip |dE| bounds the hot end of the ramp so the
  // final level accepts uphill moves with probability ~e^-10.
  double max_de = 0.0;
  for (int a = 0; a < nb; ++a) {
    double bound = std::abs(q.linear[static_cast<std::size_t>(a)]);
    for (int b = 0; b < nb; ++b) {
      if (b == a) continue;
      bound += std::abs(b < a ? q.quad(b, a) : q.quad(a, b));
    }
    max_de = std::max(max_de, bound);
  }
  const double beta_end =
      max_de > 0.0 ? std::max(opts.beta_start, 10.0 / max_de) : opts.beta_start;

  std::vector<double> betas(static_cast<std::size_t>(opts.sweeps));
  if (opts.sweeps == 1) {
    betas[0] = beta_end;
  } else {
    const double ratio = beta_end / opts.beta_start;
    for (int t = 0; t < opts.sweeps; ++t)
      betas[static_cast<std::size_t>(t)] =
          opts.beta_start * std::pow(ratio, static_cast<double>(t) /
                                                (opts.sweeps - 1));
  }

  std::vector<Sample> results(static_cast<std::size_t>(opts.reads));
  parallel_for_index(static_cast<std::size_t>(opts.reads), opts.jobs,
                     [&](std::size_t r) {
    std::mt19937_64 rng = make_rng(derive_seed(opts.seed, RngStage::sa_read, r));
    std::uniform_int_distribution<int> pick(0, nb - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(nb));
    for (auto& bit : bits) bit = static_cast<std::uint8_t>(rng() & 1u);
    for (double beta : betas) {
      for (int attempt = 0; attempt < nb; ++attempt) {
        const int a = pick(rng);
        const double de = q.flip_delta(bits, a);
        if (de <= 0.0 || unif(rng) < std::exp(-beta * de))
          bits[static_cast<std::size_t>(a)] ^= 1u;
      }
    }
    results[r].energy = q.evaluate(bits);
    results[r].bits = std::move(bits);
  });

  std::sort(results.begin(), results.end(), sample_less);
  SampleSet set;
  set.samples = std::move(results);
  set.reads = opts.reads;
  set.sampler = "sa";
  return set;
}

std::vector<std::uint8_t> greedy_descent(const QuboModel& q,
                                         std::vector<std::uint8_t> bits) {
  const int nb = q.num_bits();
  if (static_cast<int>(bits.size()) != nb)
    throw std::invalid_argument("greedy_descent: bit vector length mismatch");
  for (;;) {
    int best_bit = -1;
    double best_de = 0.0;
    for (int a = 0; a < nb; ++a) {
      const double de = q.flip_delta(bits, a);
      if (de < best_de) {
        best_de = de;
        best_bit = a;
      }
    }
    if (best_bit < 0) return bits;
    bits[static_cast<std::size_t>(best_bit)] ^= 1u;
  }
}

void write_sampleset_csv(const SampleSet& set,
                         const std::filesystem::path& path) {
  std::string out = "rank,energy,bits\n";
  for (std::size_t k = 0; k < set.samples.size(); ++k) {
    const Sample& s = set.samples[k];
    out += format_integer(static_cast<long long>(k));
    out += ',';
    out += format_double(s.energy);
    out += ',';
    for (std::uint8_t bit : s.bits) out += bit ? '1' : '0';
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace groundgap
