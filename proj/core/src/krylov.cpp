#include "groundgap/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "groundgap/textio.hpp"

namespace groundgap {

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::breakdown: return "breakdown";
  }
  return "unknown";
}

const char* guess_name(GuessTag g) {
  switch (g) {
    case GuessTag::zero: return "zero";
    case GuessTag::quantum: return "quantum";
    case GuessTag::custom: return "custom";
  }
  return "unknown";
}

namespace {

void check_shapes(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& x0) {
  if (a.rows() < 1 || a.cols() < 1)
    throw std::invalid_argument("matrix is empty");
  if (b.size() != a.rows())
    throw std::invalid_argument("right-hand side length mismatch");
  if (x0.size() != a.cols())
    throw std::invalid_argument("initial guess length mismatch");
}

GuessTag tag_for(const Eigen::VectorXd& x0) {
  return x0.isZero(0.0) ? GuessTag::zero : GuessTag::custom;
}

struct Givens {
  double c, s, r;
};

// Stable symmetric orthogonal reflection as used by LSMR.
Givens sym_ortho(double a, double b) {
  if (b == 0.0) return {a >= 0.0 ? 1.0 : -1.0, 0.0, std::abs(a)};
  if (a == 0.0) return {0.0, b >= 0.0 ? 1.0 : -1.0, std::abs(b)};
  if (std::abs(b) > std::abs(a)) {
    const double tau = a / b;
    const double s = (b >= 0.0 ? 1.0 : -1.0) / std::sqrt(1.0 + tau * tau);
    return {s * tau, s, b / s};
  }
  const double tau = b / a;
  const double c = (a >= 0.0 ? 1.0 : -1.0) / std::sqrt(1.0 + tau * tau);
  return {c, c * tau, a / c};
}

}  // namespace

SolveReport lsmr(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& x0, const StoppingRule& stop) {
  check_shapes(a, b, x0);
  if (a.rows() < a.cols())
    throw std::invalid_argument("lsmr requires m >= n");

  const long long max_iters =
      stop.max_iters >= 0 ? stop.max_iters
                          : 2 * std::min(a.rows(), a.cols());
  const double normb = b.norm();
  const double norm_a = a.norm();  // Frobenius
  const double ctol = stop.conlim > 0.0 ? 1.0 / stop.conlim : 0.0;

  SolveReport report;
  report.guess = tag_for(x0);
  report.x = x0;

  Eigen::VectorXd r = b - a * x0;
  double normr = r.norm();
  double normar = (a.transpose() * r).norm();
  report.residual_history.push_back(normr);

  const auto small_enough = [&](double nr, double nar, double nx) {
    if (nr <= stop.btol * normb + stop.atol * norm_a * nx) return true;
    return nar <= stop.atol * norm_a * nr;
  };
  if (small_enough(normr, normar, x0.norm()) || max_iters == 0) {
    report.termination = max_iters == 0 && !small_enough(normr, normar, x0.norm())
                             ? Termination::max_iters
                             : Termination::converged;
    return report;
  }

  // Golub-Kahan bidiagonalization of (A, r0).
  Eigen::VectorXd u = r;
  double beta = normr;
  u /= beta;
  Eigen::VectorXd v = a.transpose() * u;
  double alpha = v.norm();
  if (alpha > 0.0) v /= alpha;

  double zetabar = alpha * beta;
  double alphabar = alpha;
  double rho = 1.0, rhobar = 1.0, cbar = 1.0, sbar = 0.0;
  Eigen::VectorXd h = v;
  Eigen::VectorXd hbar = Eigen::VectorXd::Zero(a.cols());
  double maxrbar = 0.0;
  double minrbar = std::numeric_limits<double>::max();

  for (long long itn = 1; itn <= max_iters; ++itn) {
    u = a * v - alpha * u;
    beta = u.norm();
    if (beta > 0.0) u /= beta;
    v = a.transpose() * u - beta * v;
    alpha = v.norm();
    if (alpha > 0.0) v /= alpha;

    const double rhoold = rho;
    const Givens g1 = sym_ortho(alphabar, beta);
    rho = g1.r;
    const double thetanew = g1.s * alpha;
    alphabar = g1.c * alpha;

    const double rhobarold = rhobar;
    const double thetabar = sbar * rho;
    const double rhotemp = cbar * rho;
    const Givens g2 = sym_ortho(cbar * rho, thetanew);
    cbar = g2.c;
    sbar = g2.s;
    rhobar = g2.r;
    const double zeta = cbar * zetabar;
    zetabar = -sbar * zetabar;

    if (rho == 0.0 || rhobar == 0.0 || rhoold == 0.0 || rhobarold == 0.0) {
      report.termination = Termination::breakdown;
      return report;
    }
    hbar = h - (thetabar * rho / (rhoold * rhobarold)) * hbar;
    report.x += (zeta / (rho * rhobar)) * hbar;
    h = v - (thetanew / rho) * h;

    maxrbar = std::max(maxrbar, rhobarold);
    if (itn > 1) minrbar = std::min(minrbar, rhobarold);
    const double cond_a =
        std::max(maxrbar, rhotemp) / std::min(minrbar, rhotemp);

    r = b - a * report.x;
    normr = r.norm();
    normar = (a.transpose() * r).norm();
    report.residual_history.push_back(normr);
    report.iterations = itn;

    if (small_enough(normr, normar, report.x.norm())) {
      report.termination = Termination::converged;
      return report;
    }
    if (ctol > 0.0 && 1.0 / cond_a <= ctol) {
      report.termination = Termination::breakdown;
      return report;
    }
    if (alpha == 0.0 || beta == 0.0) {
      // Krylov space exhausted without passing the tests.
      report.termination = Termination::breakdown;
      return report;
    }
  }
  report.termination = Termination::max_iters;
  return report;
}

SolveReport bicg(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& x0, const StoppingRule& stop) {
  check_shapes(a, b, x0);
  if (a.rows() != a.cols())
    throw std::invalid_argument("bicg requires a square matrix");

  const long long max_iters =
      stop.max_iters >= 0 ? stop.max_iters : 10 * a.cols();
  const double normb = b.norm();

  SolveReport report;
  report.guess = tag_for(x0);
  report.x = x0;

  Eigen::VectorXd r = b - a * x0;
  double normr = r.norm();
  report.residual_history.push_back(normr);

  Eigen::VectorXd best_x = x0;
  double best_res = normr;

  if (normr <= stop.rtol * normb || max_iters == 0) {
    report.termination = normr <= stop.rtol * normb ? Termination::converged
                                                    : Termination::max_iters;
    return report;
  }

  Eigen::VectorXd rhat = r;
  Eigen::VectorXd p = r;
  Eigen::VectorXd phat = rhat;
  double rho = rhat.dot(r);

  constexpr double kBreakdownTol = 1e-14;
  if (std::abs(rho) <= kBreakdownTol * rhat.norm() * r.norm()) {
    report.termination = Termination::breakdown;
    return report;
  }

  for (long long itn = 1; itn <= max_iters; ++itn) {
    const Eigen::VectorXd q = a * p;
    const Eigen::VectorXd qhat = a.transpose() * phat;
    const double pivot = phat.dot(q);
    if (std::abs(pivot) <= kBreakdownTol * phat.norm() * q.norm()) {
      report.x = best_x;
      report.termination = Termination::breakdown;
      return report;
    }
    const double step = rho / pivot;
    report.x += step * p;
    r -= step * q;
    rhat -= step * qhat;

    normr = (b - a * report.x).norm();  // true residual, not the recurrence
    report.residual_history.push_back(normr);
    report.iterations = itn;
    if (normr < best_res) {
      best_res = normr;
      best_x = report.x;
    }
    if (normr <= stop.rtol * normb) {
      report.termination = Termination::converged;
      return report;
    }

    const double rho_next = rhat.dot(r);
    if (std::abs(rho_next) <= kBreakdownTol * rhat.norm() * r.norm()) {
      report.x = best_x;
      report.termination = Termination::breakdown;
      return report;
    }
    const double dir = rho_next / rho;
    p = r + dir * p;
    phat = rhat + dir * phat;
    rho = rho_next;
  }
  report.x = best_x;
  report.termination = Termination::max_iters;
  return report;
}

Eigen::VectorXd solve_direct(const Eigen::MatrixXd& a,
                             const Eigen::VectorXd& b) {
  if (a.rows() < 1 || a.cols() < 1)
    throw std::invalid_argument("matrix is empty");
  if (b.size() != a.rows())
    throw std::invalid_argument("right-hand side length mismatch");
  if (a.rows() < a.cols())
    throw std::invalid_argument("solve_direct requires m >= n");

  if (a.rows() == a.cols()) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    const double dmax = diag.maxCoeff();
    if (dmax == 0.0 || diag.minCoeff() < 1e-13 * dmax)
      throw std::runtime_error("solve_direct: matrix is singular to working precision");
    return lu.solve(b);
  }
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_direct: rank-deficient least-squares system");
  return llt.solve(a.transpose() * b);
}

void write_solve_report_json(const SolveReport& report,
                             const std::filesystem::path& path) {
  JsonWriter w;
  w.begin_object();
  w.key("iterations");
  w.value(static_cast<std::int64_t>(report.iterations));
  w.key("termination");
  w.value(termination_name(report.termination));
  w.key("residuals");
  w.begin_array();
  for (double r : report.residual_history) w.value(r);
  w.end_array();
  w.key("x");
  w.begin_array();
  for (Eigen::Index i = 0; i < report.x.size(); ++i) w.value(report.x[i]);
  w.end_array();
  w.key("guess");
  w.value(guess_name(report.guess));
  w.end_object();
  write_text_file(path, w.str() + "\n");
}

}  // namespace groundgap
