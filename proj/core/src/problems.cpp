#include "groundgap/problems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "groundgap/rng.hpp"

namespace groundgap {

const char* kind_name(ProblemKind k) {
  return k == ProblemKind::lse ? "LSE" : "LLS";
}

ProblemKind parse_kind(const std::string& name) {
  if (name == "LSE" || name == "lse") return ProblemKind::lse;
  if (name == "LLS" || name == "lls") return ProblemKind::lls;
  throw std::invalid_argument("unknown problem kind: " + name);
}

void Problem::validate() const {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("problem: A rows and b length differ");
  }
  if (kind == ProblemKind::lse && a.rows() != a.cols()) {
    throw std::invalid_argument("LSE problem requires m == n");
  }
  if (kind == ProblemKind::lls && a.rows() <= a.cols()) {
    throw std::invalid_argument("LLS problem requires m > n");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("problem contains non-finite entries");
  }
  if (x_star) {
    if (x_star->size() != a.cols()) {
      throw std::invalid_argument("x_star length and A columns differ");
    }
    const double err = (a * (*x_star) - b).cwiseAbs().maxCoeff();
    if (err > 1e-9) {
      throw std::invalid_argument("planted solution violates A x = b (err " +
                                  std::to_string(err) + ")");
    }
  }
}

void EnsembleSpec::validate() const {
  if (count < 1) throw std::invalid_argument("spec: count must be positive");
  if (m < 1 || n < 1) {
    throw std::invalid_argument("spec: m and n must be positive");
  }
  if (kind == ProblemKind::lse && m != n) {
    throw std::invalid_argument("spec: LSE requires m == n");
  }
  if (kind == ProblemKind::lls && m <= n) {
    throw std::invalid_argument("spec: LLS requires m > n");
  }
  if (lo >= hi) throw std::invalid_argument("spec: need lo < hi");
  if (kappa_target && *kappa_target < 1.0) {
    throw std::invalid_argument("spec: kappa_target must be >= 1");
  }
}

namespace {

// Uniform integer vector over [lo, hi). When the box contains a nonzero
// point and the ensemble has more than one problem, the all-zero vector is
// resampled so ensembles stay informative.
Eigen::VectorXd draw_solution(const EnsembleSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<long long> dist(spec.lo, spec.hi - 1);
  Eigen::VectorXd x(spec.n);
  const bool zero_only = spec.lo == 0 && spec.hi == 1;
  const bool avoid_zero =
      spec.count > 1 && !zero_only && spec.lo <= 0 && spec.hi > 0;
  for (;;) {
    bool all_zero = true;
    for (int j = 0; j < spec.n; ++j) {
      const long long v = dist(rng);
      x[j] = static_cast<double>(v);
      all_zero = all_zero && v == 0;
    }
    if (!all_zero || !avoid_zero) return x;
  }
}

Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) a(i, j) = normal(rng);
  }
  return a;
}

// Thin orthonormal factor of a Gaussian matrix.
Eigen::MatrixXd random_orthonormal(int rows, int cols, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return q;
}

}  // namespace

std::vector<Problem> generate_planted(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.kappa_target) {
    throw std::invalid_argument(
        "generate_planted: spec carries kappa_target; use "
        "generate_conditioned");
  }
  std::vector<Problem> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    auto rng_a =
        make_rng(spec.seed, RngStage::problem_entries, static_cast<std::uint64_t>(i));
    auto rng_x = make_rng(spec.seed, RngStage::problem_solution,
                          static_cast<std::uint64_t>(i));
    Problem p;
    p.kind = spec.kind;
    p.a = gaussian_matrix(spec.m, spec.n, rng_a);
    p.x_star = draw_solution(spec, rng_x);
    p.b = p.a * (*p.x_star);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Problem> generate_conditioned(const EnsembleSpec& spec) {
  spec.validate();
  if (!spec.kappa_target) {
    throw std::invalid_argument("generate_conditioned: kappa_target missing");
  }
  const double kappa = *spec.kappa_target;
  std::vector<Problem> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    auto rng_a = make_rng(spec.seed, RngStage::conditioned_basis,
                          static_cast<std::uint64_t>(i));
    auto rng_x = make_rng(spec.seed, RngStage::problem_solution,
                          static_cast<std::uint64_t>(i));
    const Eigen::MatrixXd u = random_orthonormal(spec.m, spec.n, rng_a);
    const Eigen::MatrixXd v = random_orthonormal(spec.n, spec.n, rng_a);
    Eigen::VectorXd sigma(spec.n);
    for (int k = 0; k < spec.n; ++k) {
      // Geometric spacing: sigma_0 = 1, sigma_{n-1} = kappa. A single
      // column is degenerate and collapses to kappa = 1.
      sigma[k] = spec.n == 1
                     ? 1.0
                     : std::pow(kappa, static_cast<double>(k) /
                                           static_cast<double>(spec.n - 1));
    }
    Problem p;
    p.kind = spec.kind;
    p.a = u * sigma.asDiagonal() * v.transpose();
    p.x_star = draw_solution(spec, rng_x);
    p.b = p.a * (*p.x_star);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Problem> generate(const EnsembleSpec& spec) {
  return spec.kappa_target ? generate_conditioned(spec)
                           : generate_planted(spec);
}

std::vector<double> jacobi_singular_values(const Eigen::MatrixXd& a) {
  if (a.size() == 0) throw std::invalid_argument("empty matrix");
  // One-sided Jacobi operates on columns; transpose wide inputs so the
  // worked matrix is tall. Nonzero singular values are unchanged.
  Eigen::MatrixXd w = a.rows() >= a.cols() ? a : Eigen::MatrixXd(a.transpose());
  const int n = static_cast<int>(w.cols());
  const double eps = std::numeric_limits<double>::epsilon();
  const int max_sweeps = 60;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double app = w.col(p).squaredNorm();
        const double aqq = w.col(q).squaredNorm();
        const double apq = w.col(p).dot(w.col(q));
        if (std::abs(apq) <= 1e2 * eps * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) sv[static_cast<std::size_t>(j)] = w.col(j).norm();
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

double condition_number(const Eigen::MatrixXd& a) {
  if (a.size() == 0 || a.isZero(0.0)) {
    throw std::invalid_argument("condition_number: matrix is zero");
  }
  const std::vector<double> sv = jacobi_singular_values(a);
  const double smax = sv.front();
  const double smin = sv.back();
  if (smin < 1e-12 * smax) {
    return std::numeric_limits<double>::infinity();
  }
  return smax / smin;
}

}  // namespace groundgap
