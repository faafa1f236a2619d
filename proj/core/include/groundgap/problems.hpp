#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace groundgap {

enum class ProblemKind { lse, lls };

const char* kind_name(ProblemKind k);
ProblemKind parse_kind(const std::string& name);

// One linear problem instance: square system (lse, m == n) or tall least
// squares (lls, m > n). When x_star is present, b == a * x_star by
// construction (values are small integers, so the product is reproducible
// bit for bit).
struct Problem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::optional<Eigen::VectorXd> x_star;  // integer-valued planted solution
  ProblemKind kind = ProblemKind::lls;

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }
  void validate() const;
};

// Recipe for a random ensemble. Planted entries are integers drawn
// uniformly from [lo, hi); kappa_target switches the generator to the
// prescribed-condition-number construction.
struct EnsembleSpec {
  ProblemKind kind = ProblemKind::lls;
  int count = 1;
  int m = 0;
  int n = 0;
  long long lo = 0;
  long long hi = 1;
  std::optional<double> kappa_target;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Ensemble {
  EnsembleSpec spec;
  std::vector<Problem> problems;
};

// A entries i.i.d. standard normal, x_star uniform over the integer box,
// b = A x_star. Deterministic per (spec.seed, problem index).
std::vector<Problem> generate_planted(const EnsembleSpec& spec);

// A = U diag(sigma) V^T with orthonormalized Gaussian factors and singular
// values geometrically spaced from 1 to kappa_target.
std::vector<Problem> generate_conditioned(const EnsembleSpec& spec);

// Dispatches on spec.kappa_target.
std::vector<Problem> generate(const EnsembleSpec& spec);

// Singular values by one-sided Jacobi, descending order. This is the
// in-house routine backing condition_number; tests cross-check it against
// an independent dense SVD.
std::vector<double> jacobi_singular_values(const Eigen::MatrixXd& a);

// sigma_max / sigma_min; +inf when sigma_min < 1e-12 * sigma_max.
double condition_number(const Eigen::MatrixXd& a);

// Ensemble file: JSON document with bit-exact numeric round-trip
// (17-significant-digit decimals).
void save_ensemble(const std::filesystem::path& path, const Ensemble& e);
Ensemble load_ensemble(const std::filesystem::path& path);

}  // namespace groundgap
