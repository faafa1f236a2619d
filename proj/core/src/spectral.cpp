#include "groundgap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "groundgap/parallel.hpp"
#include "groundgap/rng.hpp"
#include "groundgap/textio.hpp"

namespace groundgap {

Schedule Schedule::standard(int points) {
  if (points < 2)
    throw std::invalid_argument("schedule needs at least 2 grid points");
  Schedule sched;
  sched.grid.resize(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    sched.grid[static_cast<std::size_t>(k)] =
        static_cast<double>(k) / (points - 1);
  return sched;
}

void Schedule::validate() const {
  if (!a_of_s || !b_of_s)
    throw std::invalid_argument("schedule functions unset");
  if (grid.empty()) throw std::invalid_argument("schedule grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0))
      throw std::invalid_argument("schedule grid point outside [0, 1]");
    if (k > 0 && grid[k] <= grid[k - 1])
      throw std::invalid_argument("schedule grid not strictly increasing");
  }
}

AnnealOperator::AnnealOperator(DiagCache diag, int num_qubits, double half_a,
                               double half_b)
    : diag_(std::move(diag)), nq_(num_qubits), half_a_(half_a), half_b_(half_b) {
  if (nq_ < 1 || nq_ > 30)
    throw std::invalid_argument("qubit count out of range");
  if (!diag_ || diag_->size() != dim())
    throw std::invalid_argument("diagonal cache size mismatch");
}

AnnealOperator::DiagCache AnnealOperator::diagonal_cache(const IsingModel& m) {
  const std::size_t n = std::size_t{1} << m.num_spins();
  std::vector<double> energies(n);
  for (std::size_t z = 0; z < n; ++z) energies[z] = m.basis_energy(z);
  return std::make_shared<const std::vector<double>>(std::move(energies));
}

AnnealOperator AnnealOperator::at(const DiagCache& diag, int num_qubits,
                                  const Schedule& sched, double s) {
  return AnnealOperator(diag, num_qubits, 0.5 * sched.a_of_s(s),
                        0.5 * sched.b_of_s(s));
}

double AnnealOperator::norm_bound() const {
  double dmax = 0.0;
  for (double e : *diag_) dmax = std::max(dmax, std::abs(e));
  return std::abs(half_b_) * dmax + std::abs(half_a_) * nq_;
}

void AnnealOperator::apply(const double* in, double* out) const {
  const std::size_t n = dim();
  const std::vector<double>& d = *diag_;
  for (std::size_t z = 0; z < n; ++z) out[z] = half_b_ * d[z] * in[z];
  if (half_a_ != 0.0) {
    for (int a = 0; a < nq_; ++a) {
      const std::size_t bit = std::size_t{1} << a;
      for (std::size_t z = 0; z < n; ++z) out[z] -= half_a_ * in[z ^ bit];
    }
  }
}

Eigen::VectorXd AnnealOperator::apply(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != dim())
    throw std::invalid_argument("state vector dimension mismatch");
  Eigen::VectorXd out(v.size());
  apply(v.data(), out.data());
  return out;
}

namespace {

struct EigPair {
  double value = 0.0;
  Eigen::VectorXd vector;
};

// Smallest eigenpair of op restricted to the orthogonal complement of the
// `deflate` columns (if any): restarted Lanczos, full reorthogonalization,
// restart vector = best Ritz vector so far. Throws when the matvec budget
// runs out before the residual drops below tol.
EigPair lowest_eigenpair(const AnnealOperator& op,
                         const Eigen::MatrixXd* deflate, std::mt19937_64& rng,
                         double tol, std::size_t max_matvecs, int basis_cap,
                         std::size_t* matvecs_used) {
  const Eigen::Index dim = static_cast<Eigen::Index>(op.dim());
  const int cap =
      static_cast<int>(std::min<Eigen::Index>(std::max(2, basis_cap), dim));
  std::normal_distribution<double> gauss;

  auto project_out = [&](Eigen::VectorXd& w) {
    if (deflate && deflate->cols() > 0)
      w.noalias() -= (*deflate) * (deflate->transpose() * w);
  };
  auto random_unit = [&]() {
    Eigen::VectorXd v(dim);
    for (;;) {
      for (Eigen::Index z = 0; z < dim; ++z) v[z] = gauss(rng);
      project_out(v);
      const double nrm = v.norm();
      if (nrm > 1e-8) {
        v /= nrm;
        return v;
      }
    }
  };

  constexpr int kCheckEvery = 8;
  Eigen::MatrixXd basis(dim, cap);
  Eigen::VectorXd start = random_unit();
  EigPair best;
  bool have_best = false;
  int stalled_restarts = 0;

  while (*matvecs_used < max_matvecs) {
    const double best_before = have_best ? best.value : 0.0;
    const bool had_best = have_best;
    basis.col(0) = start;
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] couples basis columns j and j+1
    int size = 0;
    for (;;) {
      Eigen::VectorXd w = op.apply(basis.col(size));
      ++*matvecs_used;
      alpha.push_back(basis.col(size).dot(w));
      ++size;
      for (int pass = 0; pass < 2; ++pass) {
        project_out(w);
        w.noalias() -=
            basis.leftCols(size) * (basis.leftCols(size).transpose() * w);
      }
      const double b = w.norm();
      const bool at_cap = size == cap;
      const bool out_of_budget = *matvecs_used >= max_matvecs;
      if (b <= tol || at_cap || out_of_budget || size % kCheckEvery == 0) {
        // Normalize the tridiagonal: QL sweeps can stall on extreme
        // magnitude ranges, and scaling is exact up to one rounding.
        double tmax = 0.0;
        for (double v : alpha) tmax = std::max(tmax, std::abs(v));
        for (double v : beta) tmax = std::max(tmax, std::abs(v));
        const double tscale = tmax > 0.0 ? tmax : 1.0;
        Eigen::VectorXd diag(size);
        for (int k = 0; k < size; ++k) diag[k] = alpha[static_cast<std::size_t>(k)] / tscale;
        Eigen::VectorXd sub(size - 1);
        for (int k = 0; k + 1 < size; ++k)
          sub[k] = beta[static_cast<std::size_t>(k)] / tscale;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success)
          throw std::runtime_error("tridiagonal eigensolve failed");
        const double theta = es.eigenvalues()(0) * tscale;
        const Eigen::VectorXd ritz = es.eigenvectors().col(0);
        Eigen::VectorXd y = basis.leftCols(size) * ritz;
        y /= y.norm();
        if (!have_best || theta <= best.value) {
          best.value = theta;
          best.vector = y;
          have_best = true;
        }
        if (b * std::abs(ritz(size - 1)) <= tol) {
          // Ritz bound passed; confirm with the true residual.
          Eigen::VectorXd r = op.apply(y);
          ++*matvecs_used;
          r.noalias() -= theta * y;
          project_out(r);
          if (r.norm() <= 50.0 * tol) return {theta, y};
        }
      }
      if (b <= tol || at_cap || out_of_budget) break;
      basis.col(size) = w / b;
      beta.push_back(b);
    }
    if (!have_best) break;
    // A restart from an unimproved Ritz vector can reproduce the same
    // one-step cycle forever; reseed randomly after a few stalls.
    stalled_restarts =
        had_best && !(best.value < best_before) ? stalled_restarts + 1 : 0;
    if (stalled_restarts >= 3) {
      start = random_unit();
      stalled_restarts = 0;
      continue;
    }
    start = best.vector;
    project_out(start);
    const double nrm = start.norm();
    if (nrm > 1e-8)
      start /= nrm;
    else
      start = random_unit();
  }
  throw std::runtime_error("lanczos did not converge within the matvec budget");
}

}  // namespace

std::pair<double, double> lowest_two(const AnnealOperator& op,
                                     const LanczosOptions& opts) {
  if (op.diagonal_only()) {
    // The operator is classical; the two smallest entries are exact and
    // Lanczos is at its worst (degeneracies, huge magnitude ranges).
    double e0 = std::numeric_limits<double>::infinity();
    double e1 = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < op.dim(); ++z) {
      const double e = op.diagonal_entry(z);
      if (e < e0) {
        e1 = e0;
        e0 = e;
      } else if (e < e1) {
        e1 = e;
      }
    }
    return {e0, e1};
  }
  const std::size_t budget =
      opts.max_matvecs ? opts.max_matvecs : 10 * op.dim();
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol =
      std::max(opts.tol, 64.0 * eps * std::max(1.0, op.norm_bound()));
  std::mt19937_64 rng = make_rng(opts.seed);

  std::size_t used = 0;
  EigPair ground = lowest_eigenpair(op, nullptr, rng, tol, budget,
                                    opts.basis_cap, &used);
  Eigen::MatrixXd defl(static_cast<Eigen::Index>(op.dim()), 1);
  defl.col(0) = ground.vector;
  used = 0;
  EigPair excited = lowest_eigenpair(op, &defl, rng, tol, budget,
                                     opts.basis_cap, &used);
  return {ground.value, std::max(ground.value, excited.value)};
}

std::pair<double, double> lowest_two_diagonal(const IsingModel& m) {
  if (m.num_spins() < 1) {
    throw std::invalid_argument("model needs at least one spin");
  }
  const std::size_t n = std::size_t{1} << m.num_spins();
  double e0 = std::numeric_limits<double>::infinity();
  double e1 = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < n; ++z) {
    const double e = m.basis_energy(z);
    if (e < e0) {
      e1 = e0;
      e0 = e;
    } else if (e < e1) {
      e1 = e;
    }
  }
  return {e0, e1};
}

GapScan scan_gap(const IsingModel& m, const Schedule& sched,
                 const ScanOptions& opts) {
  sched.validate();
  if (m.num_spins() > opts.max_qubits)
    throw std::invalid_argument("model has " + std::to_string(m.num_spins()) +
                                " qubits, scan limit is " +
                                std::to_string(opts.max_qubits));
  const AnnealOperator::DiagCache diag = AnnealOperator::diagonal_cache(m);

  GapScan scan;
  scan.s = sched.grid;
  const std::size_t npts = scan.s.size();
  scan.e0.resize(npts);
  scan.e1.resize(npts);
  parallel_for_index(npts, opts.jobs, [&](std::size_t k) {
    const double s = scan.s[k];
    AnnealOperator op = AnnealOperator::at(diag, m.num_spins(), sched, s);
    LanczosOptions lopts = opts.lanczos;
    lopts.seed = derive_seed(opts.seed, RngStage::lanczos_start, k);
    try {
      const auto [e0, e1] = lowest_two(op, lopts);
      scan.e0[k] = e0;
      scan.e1[k] = e1;
    } catch (const std::exception& err) {
      throw std::runtime_error("gap scan failed at s=" + format_double(s) +
                               ": " + err.what());
    }
  });

  scan.min_index = 0;
  for (std::size_t k = 0; k < npts; ++k) {
    if (scan.gap(k) < scan.gap(scan.min_index)) scan.min_index = k;
    if (scan.gap(k) < 1e-9) scan.degenerate = true;
  }
  scan.g_min = scan.gap(scan.min_index);
  scan.s_at_min = scan.s[scan.min_index];
  return scan;
}

void write_gapscan_csv(const GapScan& scan, const std::filesystem::path& path) {
  std::string out = "s,e0,e1,gap\n";
  for (std::size_t k = 0; k < scan.points(); ++k) {
    out += format_double(scan.s[k]);
    out += ',';
    out += format_double(scan.e0[k]);
    out += ',';
    out += format_double(scan.e1[k]);
    out += ',';
    out += format_double(scan.gap(k));
    out += '\n';
  }
  out += "# g_min=" + format_double(scan.g_min) +
         " at s=" + format_double(scan.s_at_min) + "\n";
  write_text_file(path, out);
}

}  // namespace groundgap
