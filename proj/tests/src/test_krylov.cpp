#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "doctest.h"
#include "groundgap/krylov.hpp"
#include "groundgap/problems.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace groundgap;

namespace {

Eigen::MatrixXd gaussian(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  }
  return a;
}

bool history_is_true_residuals(const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& b,
                               const SolveReport& r) {
  if (static_cast<long long>(r.residual_history.size()) != r.iterations + 1) {
    return false;
  }
  const double final_true = (a * r.x - b).norm();
  return std::abs(r.residual_history.back() - final_true) <=
         1e-10 * std::max(1.0, final_true);
}

}  // namespace

TEST_CASE("solve_direct matches long double elimination on square systems") {
  for (int n : {2, 5, 11}) {
    const Eigen::MatrixXd a = gaussian(n, n, 10 + n);
    const Eigen::VectorXd b = gaussian(n, 1, 20 + n);
    const Eigen::VectorXd x = solve_direct(a, b);
    const Eigen::VectorXd ref = oracles::gauss_solve(a, b);
    CHECK((x - ref).norm() <= 1e-9 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("solve_direct matches the normal equations on tall systems") {
  const Eigen::MatrixXd a = gaussian(12, 4, 3);
  const Eigen::VectorXd b = gaussian(12, 1, 4);
  const Eigen::VectorXd x = solve_direct(a, b);
  const Eigen::VectorXd ref = oracles::normal_solve(a, b);
  CHECK((x - ref).norm() <= 1e-9 * std::max(1.0, ref.norm()));
}

TEST_CASE("solve_direct rejects singular input") {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd b(2);
  b << 1.0, 1.0;
  CHECK_THROWS(solve_direct(s, b));
  Eigen::MatrixXd tall(3, 2);
  tall << 1.0, 1.0, 2.0, 2.0, 3.0, 3.0;  // equal columns
  Eigen::VectorXd b3(3);
  b3 << 1.0, 2.0, 3.0;
  CHECK_THROWS(solve_direct(tall, b3));
}

TEST_CASE("lsmr converges on planted least squares problems") {
  EnsembleSpec spec;
  spec.kind = ProblemKind::lls;
  spec.count = 10;
  spec.m = 20;
  spec.n = 6;
  spec.lo = -8;
  spec.hi = 8;
  spec.seed = 40;
  for (const auto& p : generate_planted(spec)) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.cols());
    const SolveReport r = lsmr(p.a, p.b, zero);
    CHECK(r.termination == Termination::converged);
    CHECK(r.guess == GuessTag::zero);
    CHECK(r.iterations >= 1);
    CHECK(history_is_true_residuals(p.a, p.b, r));
    CHECK((r.x - *p.x_star).norm() <= 1e-4 * p.x_star->norm());
  }
}

TEST_CASE("lsmr with the exact solution stops immediately") {
  EnsembleSpec spec;
  spec.kind = ProblemKind::lls;
  spec.count = 5;
  spec.m = 15;
  spec.n = 5;
  spec.lo = -4;
  spec.hi = 4;
  spec.seed = 41;
  for (const auto& p : generate_planted(spec)) {
    const SolveReport r = lsmr(p.a, p.b, *p.x_star);
    CHECK(r.iterations == 0);
    CHECK(r.termination == Termination::converged);
    CHECK(r.guess == GuessTag::custom);
    CHECK((r.x - *p.x_star).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("lsmr residual history never increases beyond the slack") {
  const Eigen::MatrixXd a = gaussian(30, 8, 5);
  const Eigen::VectorXd b = gaussian(30, 1, 6);
  const SolveReport r = lsmr(a, b, Eigen::VectorXd::Zero(8));
  for (std::size_t k = 1; k < r.residual_history.size(); ++k) {
    CHECK(r.residual_history[k] <= r.residual_history[k - 1] + 1e-12);
  }
}

TEST_CASE("lsmr solves inconsistent systems to the normal equations") {
  const Eigen::MatrixXd a = gaussian(25, 5, 8);
  const Eigen::VectorXd b = gaussian(25, 1, 9);  // not in range(A)
  const SolveReport r = lsmr(a, b, Eigen::VectorXd::Zero(5));
  CHECK(r.termination == Termination::converged);
  const Eigen::VectorXd ref = oracles::normal_solve(a, b);
  CHECK((r.x - ref).norm() <= 1e-3 * std::max(1.0, ref.norm()));
}

TEST_CASE("lsmr honors a zero-iteration budget") {
  const Eigen::MatrixXd a = gaussian(10, 3, 12);
  const Eigen::VectorXd b = gaussian(10, 1, 13);
  StoppingRule stop;
  stop.max_iters = 0;
  const SolveReport r = lsmr(a, b, Eigen::VectorXd::Zero(3), stop);
  CHECK(r.iterations == 0);
  CHECK(r.termination == Termination::max_iters);
  CHECK(r.residual_history.size() == 1);
  CHECK(r.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lsmr rejects fat or mismatched shapes") {
  const Eigen::MatrixXd a = gaussian(3, 5, 1);
  CHECK_THROWS_AS(lsmr(a, gaussian(3, 1, 2), Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  const Eigen::MatrixXd ok = gaussian(5, 3, 1);
  CHECK_THROWS_AS(lsmr(ok, gaussian(4, 1, 2), Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(lsmr(ok, gaussian(5, 1, 2), Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("bicg converges on planted square systems") {
  EnsembleSpec spec;
  spec.kind = ProblemKind::lse;
  spec.count = 10;
  spec.m = 8;
  spec.n = 8;
  spec.lo = -8;
  spec.hi = 8;
  spec.seed = 50;
  for (const auto& p : generate_planted(spec)) {
    const SolveReport r = bicg(p.a, p.b, Eigen::VectorXd::Zero(8));
    CHECK(r.termination == Termination::converged);
    CHECK(r.final_residual() <= 1e-5 * p.b.norm());
    CHECK(history_is_true_residuals(p.a, p.b, r));
    const Eigen::VectorXd ref = oracles::gauss_solve(p.a, p.b);
    CHECK((r.x - ref).norm() <= 1e-3 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("bicg with the exact solution stops immediately") {
  EnsembleSpec spec;
  spec.kind = ProblemKind::lse;
  spec.count = 3;
  spec.m = 6;
  spec.n = 6;
  spec.lo = -4;
  spec.hi = 4;
  spec.seed = 51;
  for (const auto& p : generate_planted(spec)) {
    const SolveReport r = bicg(p.a, p.b, *p.x_star);
    CHECK(r.iterations == 0);
    CHECK(r.termination == Termination::converged);
  }
}

TEST_CASE("bicg reports breakdown on a singular system") {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;  // inconsistent: no solution exists
  const SolveReport r = bicg(s, b, Eigen::VectorXd::Zero(2));
  CHECK(r.termination == Termination::breakdown);
  CHECK(history_is_true_residuals(s, b, r));
}

TEST_CASE("bicg returns the best iterate when the budget runs out") {
  const Eigen::MatrixXd a = gaussian(12, 12, 71);
  const Eigen::VectorXd b = gaussian(12, 1, 72);
  StoppingRule stop;
  stop.max_iters = 3;
  const SolveReport r = bicg(a, b, Eigen::VectorXd::Zero(12), stop);
  CHECK(r.termination == Termination::max_iters);
  CHECK(r.iterations == 3);
  const double final_true = (a * r.x - b).norm();
  double best = r.residual_history.front();
  for (double v : r.residual_history) best = std::min(best, v);
  CHECK(final_true <= best + 1e-12);
  CHECK(r.residual_history.size() == 4);
}

TEST_CASE("bicg rejects rectangular input") {
  const Eigen::MatrixXd a = gaussian(4, 3, 2);
  CHECK_THROWS_AS(bicg(a, gaussian(4, 1, 3), Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("warm starts never need more iterations than cold starts") {
  EnsembleSpec spec;
  spec.kind = ProblemKind::lls;
  spec.count = 12;
  spec.m = 24;
  spec.n = 7;
  spec.lo = -8;
  spec.hi = 8;
  spec.seed = 60;
  for (const auto& p : generate_planted(spec)) {
    const SolveReport cold = lsmr(p.a, p.b, Eigen::VectorXd::Zero(7));
    const SolveReport warm = lsmr(p.a, p.b, *p.x_star);
    CHECK(warm.iterations <= cold.iterations);
  }
}

TEST_CASE("guess tags distinguish zero, custom and quantum starts") {
  CHECK(std::string(guess_name(GuessTag::zero)) == "zero");
  CHECK(std::string(guess_name(GuessTag::quantum)) == "quantum");
  CHECK(std::string(guess_name(GuessTag::custom)) == "custom");
  CHECK(std::string(termination_name(Termination::converged)) == "converged");
  CHECK(std::string(termination_name(Termination::max_iters)) == "max_iters");
  CHECK(std::string(termination_name(Termination::breakdown)) == "breakdown");
}

TEST_CASE("solve report JSON carries the history and the tag") {
  const Eigen::MatrixXd a = gaussian(10, 4, 81);
  const Eigen::VectorXd b = gaussian(10, 1, 82);
  const SolveReport r = lsmr(a, b, Eigen::VectorXd::Zero(4));
  const auto path = std::filesystem::temp_directory_path() /
                    ("groundgap_report_" + std::to_string(getpid()) + ".json");
  write_solve_report_json(r, path);
  const auto doc = nlohmann::json::parse(std::ifstream(path));
  CHECK(doc["iterations"].get<long long>() == r.iterations);
  CHECK(doc["termination"] == "converged");
  CHECK(doc["guess"] == "zero");
  CHECK(doc["residuals"].size() == r.residual_history.size());
  CHECK(doc["x"].size() == 4);
  CHECK(doc["x"][0].get<double>() == r.x(0));
  std::filesystem::remove(path);
}
