#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "groundgap/problems.hpp"

namespace groundgap {

// Two's-complement-style fixed point: exponent set Theta = {lowest_exp ..
// highest_exp} plus an optional sign bit of weight -2^(highest_exp + 1).
// An empty Theta (lowest_exp == highest_exp + 1) is allowed only together
// with the sign bit. Per-variable bit order is sign first, then exponents
// descending.
struct FixedPointEncoding {
  int lowest_exp = 0;   // o
  int highest_exp = 0;  // p
  bool has_sign = true;

  int theta_size() const { return highest_exp - lowest_exp + 1; }
  int bits_per_var() const { return theta_size() + (has_sign ? 1 : 0); }
  double sign_weight() const;
  // Weight of each bit in order: sign (if present), 2^p, ..., 2^o.
  std::vector<double> bit_weights() const;
  double min_value() const;
  double max_value() const;
  void validate() const;

  // c total bits as sign + Theta = {0 .. c-2}; c >= 2.
  static FixedPointEncoding integer_bits(int c);
  // Smallest integer_bits encoding covering every integer in [lo, hi).
  static FixedPointEncoding for_range(long long lo, long long hi);
};

// Quadratic binary objective F'(q) = sum_a v_a q_a + sum_{a<b} w_ab q_a q_b.
// offset carries the constant ||b||^2 dropped from the residual expansion,
// so F'(q) + offset equals ||A decode(q) - b||^2.
class QuboModel {
 public:
  QuboModel() = default;
  explicit QuboModel(int num_bits);

  int num_bits() const { return static_cast<int>(linear.size()); }
  double& quad(int i, int j);
  double quad(int i, int j) const;
  double evaluate(std::span<const std::uint8_t> bits) const;  // offset excluded
  // Energy change of flipping bit a, O(num_bits).
  double flip_delta(std::span<const std::uint8_t> bits, int a) const;

  struct BitInfo {
    int var = 0;
    double weight = 0.0;
  };

  std::vector<double> linear;       // v
  std::vector<BitInfo> bit_map;     // owning variable and weight per bit
  double offset = 0.0;

 private:
  std::vector<double> quad_;  // strict upper triangle, row major
};

// Bipolar objective F(sigma) = sum h_a sigma_a + sum_{a<b} J_ab sigma_a
// sigma_b with its own offset so total energies match the QUBO form.
class IsingModel {
 public:
  IsingModel() = default;
  explicit IsingModel(int num_spins);

  int num_spins() const { return static_cast<int>(h.size()); }
  double& coupling(int i, int j);
  double coupling(int i, int j) const;
  double evaluate(std::span<const int> sigma) const;  // offset excluded
  // Energy of the computational basis state z (qubit a maps |0> -> +1).
  double basis_energy(std::uint64_t z) const;
  double max_abs_field() const;
  double max_abs_coupling() const;

  std::vector<double> h;
  double offset = 0.0;
  double scale = 1.0;

 private:
  std::vector<double> j_;  // strict upper triangle, row major
};

// Residual-norm QUBO over the fixed-point bits of x (variable-major order).
QuboModel build_qubo(const Problem& problem, const FixedPointEncoding& enc);

// Substitution q = (sigma + 1) / 2 with constants folded into the offset.
IsingModel qubo_to_ising(const QuboModel& q);

// Uniform factor k = min(2 / max|h|, 1 / max|J|) applied to h, J and
// offset; records k in the scale field. Argmin is unchanged.
IsingModel scale_ising(const IsingModel& m);

// Bits -> real vector for n variables.
Eigen::VectorXd decode(std::span<const std::uint8_t> bits,
                       const FixedPointEncoding& enc, int n);

// Exact bit pattern for x when every entry is representable.
std::optional<std::vector<std::uint8_t>> encode(const Eigen::VectorXd& x,
                                                const FixedPointEncoding& enc);

void write_qubo_json(const std::filesystem::path& path, const QuboModel& q);
void write_ising_json(const std::filesystem::path& path, const IsingModel& m);

}  // namespace groundgap
