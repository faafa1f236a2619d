#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace groundgap {

enum class Termination { converged, max_iters, breakdown };
enum class GuessTag { zero, quantum, custom };

const char* termination_name(Termination t);
const char* guess_name(GuessTag g);

struct StoppingRule {
  double atol = 1e-6;       // lsmr least-squares test
  double btol = 1e-6;       // lsmr consistent-system test
  double conlim = 1e8;      // lsmr condition limit
  double rtol = 1e-5;       // bicg relative residual
  long long max_iters = -1;  // -1: 2*min(m,n) for lsmr, 10*n for bicg
};

struct SolveReport {
  Eigen::VectorXd x;
  long long iterations = 0;
  // True recomputed ||A x_k - b|| for k = 0..iterations.
  std::vector<double> residual_history;
  Termination termination = Termination::converged;
  GuessTag guess = GuessTag::custom;

  double final_residual() const { return residual_history.back(); }
};

// LSMR (Golub-Kahan bidiagonalization) on the shifted problem A*dx = b - A*x0,
// returning x0 + dx. Stopping tests use true recomputed residuals and the
// exact Frobenius norm of A, so an exact initial guess stops at 0 iterations.
// Requires m >= n.
SolveReport lsmr(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& x0, const StoppingRule& stop = {});

// Unpreconditioned BiCG on r0 = b - A*x0 for square systems. Breakdown
// (rho or pivot ~ 0) returns the best iterate seen so far.
SolveReport bicg(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& x0, const StoppingRule& stop = {});

// Dense oracle: partial-pivot LU for square systems, Cholesky on the normal
// equations otherwise. Throws on rank deficiency.
Eigen::VectorXd solve_direct(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

// JSON {"iterations":, "termination":, "residuals": [...], "x": [...],
//       "guess":}.
void write_solve_report_json(const SolveReport& report,
                             const std::filesystem::path& path);

}  // namespace groundgap
