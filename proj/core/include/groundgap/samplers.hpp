#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "groundgap/encoding.hpp"

namespace groundgap {

struct Sample {
  std::vector<std::uint8_t> bits;
  double energy = 0.0;  // F'(q), offset excluded
};

// Ascending by energy, ties by lexicographic bits (bit 0 first).
bool sample_less(const Sample& x, const Sample& y);

struct SampleSet {
  std::vector<Sample> samples;
  long long reads = 0;  // states drawn (or enumerated) to build the set
  std::string sampler;

  const Sample& best() const;
};

// Enumerates every assignment (Gray-code incremental energies) and keeps the
// top_k lowest; the first entry is the exact global minimum. num_bits <= 24.
SampleSet solve_exhaustive(const QuboModel& q, int top_k = 16);

struct SaOptions {
  int reads = 1000;
  int sweeps = 50;           // beta-ladder levels; num_bits flips per level
  double beta_start = 0.1;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Independent single-bit-flip Metropolis restarts with a geometric inverse-
// temperature ramp from beta_start to 10 / max|dE|; returns each read's final
// state, sorted. Deterministic per seed, independent of jobs.
SampleSet sample_sa(const QuboModel& q, const SaOptions& opts = {});

// Steepest single-flip descent (ties: lowest bit index) to a 1-flip-local
// optimum; never increases energy.
std::vector<std::uint8_t> greedy_descent(const QuboModel& q,
                                         std::vector<std::uint8_t> bits);

// CSV `rank,energy,bits`; bits as a 0/1 string, bit 0 leftmost; rank from 0.
void write_sampleset_csv(const SampleSet& set,
                         const std::filesystem::path& path);

}  // namespace groundgap
