#include "groundgap/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "groundgap/textio.hpp"

namespace groundgap {

double FixedPointEncoding::sign_weight() const {
  return -std::ldexp(1.0, highest_exp + 1);
}

std::vector<double> FixedPointEncoding::bit_weights() const {
  validate();
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(bits_per_var()));
  if (has_sign) w.push_back(sign_weight());
  for (int e = highest_exp; e >= lowest_exp; --e) {
    w.push_back(std::ldexp(1.0, e));
  }
  return w;
}

double FixedPointEncoding::min_value() const {
  return has_sign ? sign_weight() : 0.0;
}

double FixedPointEncoding::max_value() const {
  double v = 0.0;
  for (int e = lowest_exp; e <= highest_exp; ++e) v += std::ldexp(1.0, e);
  return v;
}

void FixedPointEncoding::validate() const {
  if (lowest_exp > highest_exp + 1) {
    throw std::invalid_argument("encoding: Theta must be a contiguous interval");
  }
  if (theta_size() == 0 && !has_sign) {
    throw std::invalid_argument("encoding: empty Theta requires a sign bit");
  }
}

FixedPointEncoding FixedPointEncoding::integer_bits(int c) {
  if (c < 2) {
    throw std::invalid_argument("integer_bits: need at least 2 bits");
  }
  return FixedPointEncoding{0, c - 2, true};
}

FixedPointEncoding FixedPointEncoding::for_range(long long lo, long long hi) {
  if (lo >= hi) throw std::invalid_argument("for_range: need lo < hi");
  // Sign weight -2^(p+1) with Theta = {0..p} covers [-2^(p+1), 2^(p+1)-1].
  int p = -1;
  while (-(1LL << (p + 1)) > lo || (1LL << (p + 1)) - 1 < hi - 1) {
    if (++p > 60) throw std::invalid_argument("for_range: interval too wide");
  }
  return FixedPointEncoding{0, p, true};  // p == -1 is the sign-only case
}

QuboModel::QuboModel(int num_bits)
    : linear(static_cast<std::size_t>(num_bits), 0.0),
      bit_map(static_cast<std::size_t>(num_bits)),
      quad_(static_cast<std::size_t>(num_bits) * num_bits, 0.0) {}

double& QuboModel::quad(int i, int j) {
  return quad_[static_cast<std::size_t>(i) * num_bits() + j];
}

double QuboModel::quad(int i, int j) const {
  return quad_[static_cast<std::size_t>(i) * num_bits() + j];
}

double QuboModel::evaluate(std::span<const std::uint8_t> bits) const {
  const int nb = num_bits();
  if (static_cast<int>(bits.size()) != nb) {
    throw std::invalid_argument("evaluate: bit vector length mismatch");
  }
  double e = 0.0;
  for (int a = 0; a < nb; ++a) {
    if (!bits[static_cast<std::size_t>(a)]) continue;
    e += linear[static_cast<std::size_t>(a)];
    for (int b = a + 1; b < nb; ++b) {
      if (bits[static_cast<std::size_t>(b)]) e += quad(a, b);
    }
  }
  return e;
}

double QuboModel::flip_delta(std::span<const std::uint8_t> bits, int a) const {
  const int nb = num_bits();
  double field = linear[static_cast<std::size_t>(a)];
  for (int b = 0; b < a; ++b) {
    if (bits[static_cast<std::size_t>(b)]) field += quad(b, a);
  }
  for (int b = a + 1; b < nb; ++b) {
    if (bits[static_cast<std::size_t>(b)]) field += quad(a, b);
  }
  return bits[static_cast<std::size_t>(a)] ? -field : field;
}

IsingModel::IsingModel(int num_spins)
    : h(static_cast<std::size_t>(num_spins), 0.0),
      j_(static_cast<std::size_t>(num_spins) * num_spins, 0.0) {}

double& IsingModel::coupling(int i, int j) {
  return j_[static_cast<std::size_t>(i) * num_spins() + j];
}

double IsingModel::coupling(int i, int j) const {
  return j_[static_cast<std::size_t>(i) * num_spins() + j];
}

double IsingModel::evaluate(std::span<const int> sigma) const {
  const int n = num_spins();
  if (static_cast<int>(sigma.size()) != n) {
    throw std::invalid_argument("evaluate: spin vector length mismatch");
  }
  double e = 0.0;
  for (int a = 0; a < n; ++a) {
    e += h[static_cast<std::size_t>(a)] * sigma[static_cast<std::size_t>(a)];
    for (int b = a + 1; b < n; ++b) {
      e += coupling(a, b) * sigma[static_cast<std::size_t>(a)] *
           sigma[static_cast<std::size_t>(b)];
    }
  }
  return e;
}

double IsingModel::basis_energy(std::uint64_t z) const {
  const int n = num_spins();
  double e = 0.0;
  for (int a = 0; a < n; ++a) {
    const double sa = ((z >> a) & 1u) ? -1.0 : 1.0;
    e += h[static_cast<std::size_t>(a)] * sa;
    for (int b = a + 1; b < n; ++b) {
      const double sb = ((z >> b) & 1u) ? -1.0 : 1.0;
      e += coupling(a, b) * sa * sb;
    }
  }
  return e;
}

double IsingModel::max_abs_field() const {
  double m = 0.0;
  for (double v : h) m = std::max(m, std::abs(v));
  return m;
}

double IsingModel::max_abs_coupling() const {
  const int n = num_spins();
  double m = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) m = std::max(m, std::abs(coupling(a, b)));
  }
  return m;
}

QuboModel build_qubo(const Problem& problem, const FixedPointEncoding& enc) {
  enc.validate();
  problem.validate();
  const int n = static_cast<int>(problem.cols());
  const int c = enc.bits_per_var();
  const std::vector<double> weights = enc.bit_weights();

  QuboModel q(n * c);
  const Eigen::MatrixXd gram = problem.a.transpose() * problem.a;
  const Eigen::VectorXd atb = problem.a.transpose() * problem.b;

  for (int j = 0; j < n; ++j) {
    for (int s = 0; s < c; ++s) {
      const int bit = j * c + s;
      const double ws = weights[static_cast<std::size_t>(s)];
      q.bit_map[static_cast<std::size_t>(bit)] = {j, ws};
      // v_js = s^2 sum_i A_ij^2 - 2 s (A^T b)_j
      q.linear[static_cast<std::size_t>(bit)] =
          ws * ws * gram(j, j) - 2.0 * ws * atb[j];
    }
  }
  const int nb = n * c;
  for (int a = 0; a < nb; ++a) {
    const auto& ba = q.bit_map[static_cast<std::size_t>(a)];
    for (int b = a + 1; b < nb; ++b) {
      const auto& bb = q.bit_map[static_cast<std::size_t>(b)];
      // w = 2 s t (A^T A)_{jk}; same-variable bit pairs use the diagonal.
      q.quad(a, b) = 2.0 * ba.weight * bb.weight * gram(ba.var, bb.var);
    }
  }
  q.offset = problem.b.squaredNorm();
  return q;
}

IsingModel qubo_to_ising(const QuboModel& q) {
  const int nb = q.num_bits();
  IsingModel m(nb);
  m.offset = q.offset;
  m.scale = 1.0;
  for (int a = 0; a < nb; ++a) {
    double ha = q.linear[static_cast<std::size_t>(a)] / 2.0;
    for (int b = a + 1; b < nb; ++b) {
      const double w4 = q.quad(a, b) / 4.0;
      m.coupling(a, b) = w4;
      ha += w4;
      m.h[static_cast<std::size_t>(b)] += w4;
      m.offset += w4;
    }
    m.h[static_cast<std::size_t>(a)] += ha;
    m.offset += q.linear[static_cast<std::size_t>(a)] / 2.0;
  }
  return m;
}

IsingModel scale_ising(const IsingModel& m) {
  const double max_h = m.max_abs_field();
  const double max_j = m.max_abs_coupling();
  double k = 1.0;
  if (max_h > 0.0 && max_j > 0.0) {
    k = std::min(2.0 / max_h, 1.0 / max_j);
  } else if (max_h > 0.0) {
    k = 2.0 / max_h;
  } else if (max_j > 0.0) {
    k = 1.0 / max_j;
  } else {
    return m;  // all-zero model, nothing to scale
  }
  IsingModel out(m.num_spins());
  const int n = m.num_spins();
  for (int a = 0; a < n; ++a) {
    out.h[static_cast<std::size_t>(a)] = k * m.h[static_cast<std::size_t>(a)];
    for (int b = a + 1; b < n; ++b) {
      out.coupling(a, b) = k * m.coupling(a, b);
    }
  }
  out.offset = k * m.offset;
  out.scale = m.scale * k;
  return out;
}

Eigen::VectorXd decode(std::span<const std::uint8_t> bits,
                       const FixedPointEncoding& enc, int n) {
  enc.validate();
  const int c = enc.bits_per_var();
  if (static_cast<int>(bits.size()) != n * c) {
    throw std::invalid_argument("decode: expected " + std::to_string(n * c) +
                                " bits, got " + std::to_string(bits.size()));
  }
  const std::vector<double> weights = enc.bit_weights();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    double v = 0.0;
    for (int s = 0; s < c; ++s) {
      if (bits[static_cast<std::size_t>(j * c + s)]) {
        v += weights[static_cast<std::size_t>(s)];
      }
    }
    x[j] = v;
  }
  return x;
}

std::optional<std::vector<std::uint8_t>> encode(const Eigen::VectorXd& x,
                                                const FixedPointEncoding& enc) {
  enc.validate();
  const int c = enc.bits_per_var();
  const int n = static_cast<int>(x.size());
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n * c), 0);
  for (int j = 0; j < n; ++j) {
    double r = x[j];
    int s = 0;
    if (enc.has_sign) {
      if (r < 0.0) {
        bits[static_cast<std::size_t>(j * c)] = 1;
        r -= enc.sign_weight();
      }
      s = 1;
    }
    for (int e = enc.highest_exp; e >= enc.lowest_exp; --e, ++s) {
      const double w = std::ldexp(1.0, e);
      if (r >= w) {
        bits[static_cast<std::size_t>(j * c + s)] = 1;
        r -= w;
      }
    }
    if (r != 0.0) return std::nullopt;
  }
  return bits;
}

namespace {

void append_model_json(JsonWriter& w, int nb,
                       const std::vector<double>& linear,
                       const std::function<double(int, int)>& pair,
                       double offset, double scale) {
  w.begin_object();
  w.key("num_bits").value(nb);
  w.key("linear").begin_array();
  for (double v : linear) w.value(v);
  w.end_array();
  w.key("quadratic").begin_array();
  for (int a = 0; a < nb; ++a) {
    for (int b = a + 1; b < nb; ++b) {
      const double v = pair(a, b);
      if (v == 0.0) continue;
      w.begin_array().value(a).value(b).value(v).end_array();
    }
  }
  w.end_array();
  w.key("offset").value(offset);
  w.key("scale").value(scale);
  w.end_object();
}

}  // namespace

void write_qubo_json(const std::filesystem::path& path, const QuboModel& q) {
  JsonWriter w;
  append_model_json(
      w, q.num_bits(), q.linear,
      [&q](int a, int b) { return q.quad(a, b); }, q.offset, 1.0);
  write_text_file(path, w.str() + "\n");
}

void write_ising_json(const std::filesystem::path& path, const IsingModel& m) {
  JsonWriter w;
  append_model_json(
      w, m.num_spins(), m.h,
      [&m](int a, int b) { return m.coupling(a, b); }, m.offset, m.scale);
  write_text_file(path, w.str() + "\n");
}

}  // namespace groundgap
