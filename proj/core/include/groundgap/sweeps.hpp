#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "groundgap/problems.hpp"
#include "groundgap/spectral.hpp"

namespace groundgap {

enum class SweepParameter { precision_c, variables_n, rows_m, condition_kappa };

// CSV / CLI names: precision, variables, rows, condition.
const char* sweep_parameter_name(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepConfig {
  SweepParameter parameter = SweepParameter::precision_c;
  std::vector<double> values;  // swept axis (c, n, m or kappa)
  int per_value = 100;
  ProblemKind kind = ProblemKind::lls;
  int base_m = 40;
  int base_n = 2;
  int base_c = 2;
  long long lo = -2;  // planted solution box [lo, hi)
  long long hi = 1;
  bool scaled = true;  // apply scale_ising before scanning
  int grid_points = 100;
  int max_qubits = 16;
  int jobs = 1;

  // Paper-matched defaults: precision m=40 n=2 c=2..6; variables m=40 c=2
  // n=2..6; rows n=4 c=2 m=10..300 step 10; condition m=40 n=4 c=2
  // kappa 1..10 then 20..300 step 10.
  static SweepConfig preset(SweepParameter p);

  // Resolved per-value dimensions.
  int value_m(double v) const;
  int value_n(double v) const;
  int value_c(double v) const;
  void validate() const;
};

struct SweepRow {
  double value = 0.0;
  double median_gmin = 0.0;
  double mad_gmin = 0.0;
  int n_samples = 0;  // successes only
  int failures = 0;
  // condition_kappa sweeps also record the raw (pre-scaling) s=1 diagonal
  // gap and the coefficient scale factor.
  std::optional<double> median_unscaled_gap;
  std::optional<double> median_scale_factor;
};

struct SweepFailure {
  std::size_t value_index = 0;
  int problem_index = 0;
  std::string message;
};

std::vector<SweepRow> run_sweep(const SweepConfig& config, std::uint64_t seed,
                                std::vector<SweepFailure>* failures = nullptr);

// Median (mean-of-middles for even length) and median absolute deviation.
std::pair<double, double> median_and_mad(std::vector<double> values);

enum class CurveFamily { exp_decay, poly_decay, plateau, plateau_offset };

const char* family_name(CurveFamily f);
CurveFamily parse_family(const std::string& name);
int family_param_count(CurveFamily f);

struct CurveFit {
  CurveFamily family = CurveFamily::exp_decay;
  std::vector<double> params;
  double relative_error = 0.0;
};

// exp_decay a*e^(-b x); poly_decay a*x^(-b); plateau a*x/(b+x);
// plateau_offset a*x/(b+x)+c. Params ordered (a, b[, c]).
double evaluate_curve(CurveFamily f, const std::vector<double>& params,
                      double x);

// Least-squares fit by multi-start (>= 16) Nelder-Mead with data-scaled
// start ranges; deterministic. relative_error = ||fit - ys|| / ||ys||.
CurveFit fit_curve(CurveFamily family, const std::vector<double>& xs,
                   const std::vector<double>& ys);

// CSV `param,value,median_gmin,mad_gmin,n_samples` plus
// `,median_unscaled_gap,median_scale_factor` when those fields are present.
void write_sweep_csv(const std::vector<SweepRow>& rows, SweepParameter p,
                     const std::filesystem::path& path);
// JSON array of {"family":, "params": [...], "relative_error":}.
void write_fits_json(const std::vector<CurveFit>& fits,
                     const std::filesystem::path& path);

}  // namespace groundgap
