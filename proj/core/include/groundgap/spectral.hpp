#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "groundgap/encoding.hpp"

namespace groundgap {

// Anneal schedule: H(s) = -a_of_s(s)/2 * sum_a sigma^x_a
//                         + b_of_s(s)/2 * (Ising diagonal).
struct Schedule {
  std::function<double(double)> a_of_s = [](double s) { return 2.0 * (1.0 - s); };
  std::function<double(double)> b_of_s = [](double s) { return 2.0 * s; };
  std::vector<double> grid;  // sorted sample points in [0, 1]

  // points equally spaced values covering [0, 1] inclusive; points >= 2.
  static Schedule standard(int points = 100);
  void validate() const;
};

// Matrix-free H(s) on the 2^nq basis. Basis state z encodes spins as
// sigma_a = 1 - 2*((z >> a) & 1). The diagonal cache holds the full Ising
// energy per basis state; it is s-independent and shared across workers.
class AnnealOperator {
 public:
  using DiagCache = std::shared_ptr<const std::vector<double>>;

  AnnealOperator(DiagCache diag, int num_qubits, double half_a, double half_b);

  static DiagCache diagonal_cache(const IsingModel& m);
  // Operator at schedule point s, reusing a prebuilt cache.
  static AnnealOperator at(const DiagCache& diag, int num_qubits,
                           const Schedule& sched, double s);

  int num_qubits() const { return nq_; }
  std::size_t dim() const { return std::size_t{1} << nq_; }
  // True at s = 1 where the transverse term vanishes.
  bool diagonal_only() const { return half_a_ == 0.0; }
  double diagonal_entry(std::size_t z) const { return half_b_ * (*diag_)[z]; }
  // Upper bound on the operator 2-norm (triangle inequality).
  double norm_bound() const;

  // out = H v, O(nq * 2^nq); in and out must not alias.
  void apply(const double* in, double* out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

 private:
  DiagCache diag_;
  int nq_;
  double half_a_;  // a(s)/2, multiplies -sum sigma^x
  double half_b_;  // b(s)/2, multiplies the diagonal
};

struct LanczosOptions {
  double tol = 1e-10;            // absolute Ritz residual target
  std::size_t max_matvecs = 0;   // 0: 10 * 2^nq per eigenvalue
  int basis_cap = 250;           // restart when the basis reaches this size
  std::uint64_t seed = 0;        // start-vector stream
};

// Two smallest eigenvalues of H via restarted Lanczos with full
// reorthogonalization; the second is obtained by deflating the converged
// ground vector. Throws std::runtime_error on non-convergence.
std::pair<double, double> lowest_two(const AnnealOperator& op,
                                     const LanczosOptions& opts = {});

// Two smallest diagonal (s = 1, b/2 = 1) energies of the bare Ising model,
// counted with multiplicity; degenerate ground states give a zero gap.
std::pair<double, double> lowest_two_diagonal(const IsingModel& m);

struct GapScan {
  std::vector<double> s;
  std::vector<double> e0;
  std::vector<double> e1;
  double g_min = 0.0;
  double s_at_min = 0.0;
  std::size_t min_index = 0;
  bool degenerate = false;  // some grid point has e1 - e0 < 1e-9

  std::size_t points() const { return s.size(); }
  double gap(std::size_t k) const { return e1[k] - e0[k]; }
};

struct ScanOptions {
  int max_qubits = 16;
  int jobs = 1;
  std::uint64_t seed = 0;
  LanczosOptions lanczos;
};

// lowest_two at every grid point; g_min is the grid minimum of e1 - e0
// (no interpolation). Eigensolver failures are rethrown with the offending s.
GapScan scan_gap(const IsingModel& m, const Schedule& sched,
                 const ScanOptions& opts = {});

// CSV: header `s,e0,e1,gap`, one row per grid point, then a trailer line
// `# g_min=<value> at s=<value>`.
void write_gapscan_csv(const GapScan& scan, const std::filesystem::path& path);

}  // namespace groundgap
