#pragma once

#include <cstdint>
#include <random>

namespace groundgap {

// Stage tags for deriving independent random streams from one user seed.
// A stream is identified by (seed, stage, index); see derive_seed().
enum class RngStage : std::uint64_t {
  problem_entries = 0x9b97'1157'03f3'a11bULL,
  problem_solution = 0x3c95'd3b2'81f6'0eddULL,
  conditioned_basis = 0x517c'c1b7'2722'0a95ULL,
  lanczos_start = 0xda94'2af0'354f'f8e1ULL,
  sa_read = 0x8f14'e45f'ceea'167aULL,
  sweep_ensemble = 0x6c62'272e'07bb'0142ULL,
  hybrid_sampler = 0x27d4'eb2f'1656'67c5ULL,
  fit_start = 0x4cf5'ad43'2745'937fULL,
};

// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, RngStage stage,
                                 std::uint64_t index = 0) {
  std::uint64_t s = seed ^ static_cast<std::uint64_t>(stage);
  s = mix64(s ^ mix64(index));
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStage stage,
                                std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, stage, index));
}

}  // namespace groundgap
