#include "groundgap/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "groundgap/encoding.hpp"
#include "groundgap/parallel.hpp"
#include "groundgap/rng.hpp"
#include "groundgap/textio.hpp"

namespace groundgap {

const char* sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::precision_c: return "precision";
    case SweepParameter::variables_n: return "variables";
    case SweepParameter::rows_m: return "rows";
    case SweepParameter::condition_kappa: return "condition";
  }
  return "unknown";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "precision") return SweepParameter::precision_c;
  if (name == "variables") return SweepParameter::variables_n;
  if (name == "rows") return SweepParameter::rows_m;
  if (name == "condition") return SweepParameter::condition_kappa;
  throw std::invalid_argument(
      "unknown sweep parameter '" + name +
      "' (expected precision, variables, rows or condition)");
}

SweepConfig SweepConfig::preset(SweepParameter p) {
  SweepConfig cfg;
  cfg.parameter = p;
  switch (p) {
    case SweepParameter::precision_c:
      cfg.base_m = 40;
      cfg.base_n = 2;
      cfg.values = {2, 3, 4, 5, 6};
      break;
    case SweepParameter::variables_n:
      cfg.base_m = 40;
      cfg.base_c = 2;
      cfg.values = {2, 3, 4, 5, 6};
      break;
    case SweepParameter::rows_m:
      cfg.base_n = 4;
      cfg.base_c = 2;
      for (int m = 10; m <= 300; m += 10) cfg.values.push_back(m);
      break;
    case SweepParameter::condition_kappa:
      cfg.base_m = 40;
      cfg.base_n = 4;
      cfg.base_c = 2;
      for (int k = 1; k <= 10; ++k) cfg.values.push_back(k);
      for (int k = 20; k <= 300; k += 10) cfg.values.push_back(k);
      break;
  }
  return cfg;
}

int SweepConfig::value_m(double v) const {
  return parameter == SweepParameter::rows_m
             ? static_cast<int>(std::llround(v))
             : base_m;
}

int SweepConfig::value_n(double v) const {
  return parameter == SweepParameter::variables_n
             ? static_cast<int>(std::llround(v))
             : base_n;
}

int SweepConfig::value_c(double v) const {
  return parameter == SweepParameter::precision_c
             ? static_cast<int>(std::llround(v))
             : base_c;
}

void SweepConfig::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep value list is empty");
  if (per_value < 1)
    throw std::invalid_argument("sweep needs at least one problem per value");
  if (grid_points < 2)
    throw std::invalid_argument("sweep grid needs at least 2 points");
  if (lo >= hi) throw std::invalid_argument("solution box needs lo < hi");
  for (double v : values) {
    const int m = value_m(v);
    const int n = value_n(v);
    const int c = value_c(v);
    if (c < 2) throw std::invalid_argument("precision c must be >= 2");
    if (n < 1) throw std::invalid_argument("variable count must be >= 1");
    if (kind == ProblemKind::lse ? m != n : m <= n)
      throw std::invalid_argument("rows m incompatible with kind and n");
    if (n * c > max_qubits)
      throw std::invalid_argument("sweep value needs " + std::to_string(n * c) +
                                  " qubits, limit is " +
                                  std::to_string(max_qubits));
    if (parameter == SweepParameter::condition_kappa && !(v >= 1.0))
      throw std::invalid_argument("condition number must be >= 1");
  }
}

std::pair<double, double> median_and_mad(std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("median of an empty list");
  const auto median_of = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const double med = median_of(values);
  for (double& v : values) v = std::abs(v - med);
  return {med, median_of(values)};
}

std::vector<SweepRow> run_sweep(const SweepConfig& config, std::uint64_t seed,
                                std::vector<SweepFailure>* failures) {
  config.validate();
  std::vector<SweepRow> rows;
  rows.reserve(config.values.size());

  for (std::size_t vi = 0; vi < config.values.size(); ++vi) {
    const double value = config.values[vi];
    EnsembleSpec spec;
    spec.kind = config.kind;
    spec.count = config.per_value;
    spec.m = config.value_m(value);
    spec.n = config.value_n(value);
    spec.lo = config.lo;
    spec.hi = config.hi;
    if (config.parameter == SweepParameter::condition_kappa)
      spec.kappa_target = value;
    spec.seed = derive_seed(seed, RngStage::sweep_ensemble, vi);

    const std::vector<Problem> problems = generate(spec);
    const FixedPointEncoding enc =
        FixedPointEncoding::integer_bits(config.value_c(value));
    const Schedule sched = Schedule::standard(config.grid_points);
    const bool kappa_extras =
        config.parameter == SweepParameter::condition_kappa;

    const std::size_t count = problems.size();
    std::vector<double> gmins(count, 0.0);
    std::vector<double> raw_gaps(count, 0.0);
    std::vector<double> scale_factors(count, 0.0);
    std::vector<std::string> errors(count);
    std::vector<std::uint8_t> ok(count, 0);

    parallel_for_index(count, config.jobs, [&](std::size_t j) {
      try {
        const QuboModel qubo = build_qubo(problems[j], enc);
        const IsingModel raw = qubo_to_ising(qubo);
        const IsingModel model = config.scaled ? scale_ising(raw) : raw;
        ScanOptions sopts;
        sopts.max_qubits = config.max_qubits;
        sopts.jobs = 1;
        sopts.seed = derive_seed(spec.seed, RngStage::lanczos_start, j);
        gmins[j] = scan_gap(model, sched, sopts).g_min;
        if (kappa_extras) {
          const auto [d0, d1] = lowest_two_diagonal(raw);
          raw_gaps[j] = d1 - d0;
          scale_factors[j] = scale_ising(raw).scale;
        }
        ok[j] = 1;
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    });

    SweepRow row;
    row.value = value;
    std::vector<double> good, good_raw, good_scale;
    good.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
      if (ok[j]) {
        good.push_back(gmins[j]);
        if (kappa_extras) {
          good_raw.push_back(raw_gaps[j]);
          good_scale.push_back(scale_factors[j]);
        }
      } else {
        ++row.failures;
        if (failures)
          failures->push_back({vi, static_cast<int>(j), errors[j]});
      }
    }
    if (good.empty())
      throw std::runtime_error(
          "sweep value " + format_double(value) +
          ": every problem failed; first error: " + errors[0]);
    const auto [med, mad] = median_and_mad(good);
    row.median_gmin = med;
    row.mad_gmin = mad;
    row.n_samples = static_cast<int>(good.size());
    if (kappa_extras) {
      row.median_unscaled_gap = median_and_mad(good_raw).first;
      row.median_scale_factor = median_and_mad(good_scale).first;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* family_name(CurveFamily f) {
  switch (f) {
    case CurveFamily::exp_decay: return "exp_decay";
    case CurveFamily::poly_decay: return "poly_decay";
    case CurveFamily::plateau: return "plateau";
    case CurveFamily::plateau_offset: return "plateau_offset";
  }
  return "unknown";
}

CurveFamily parse_family(const std::string& name) {
  if (name == "exp_decay") return CurveFamily::exp_decay;
  if (name == "poly_decay") return CurveFamily::poly_decay;
  if (name == "plateau") return CurveFamily::plateau;
  if (name == "plateau_offset") return CurveFamily::plateau_offset;
  throw std::invalid_argument("unknown curve family '" + name +
                              "' (expected exp_decay, poly_decay, plateau or "
                              "plateau_offset)");
}

int family_param_count(CurveFamily f) {
  return f == CurveFamily::plateau_offset ? 3 : 2;
}

double evaluate_curve(CurveFamily f, const std::vector<double>& params,
                      double x) {
  if (static_cast<int>(params.size()) != family_param_count(f))
    throw std::invalid_argument("curve parameter count mismatch");
  switch (f) {
    case CurveFamily::exp_decay: return params[0] * std::exp(-params[1] * x);
    case CurveFamily::poly_decay: return params[0] * std::pow(x, -params[1]);
    case CurveFamily::plateau: return params[0] * x / (params[1] + x);
    case CurveFamily::plateau_offset:
      return params[0] * x / (params[1] + x) + params[2];
  }
  return 0.0;
}

namespace {

constexpr double kDiverged = 1e300;

// Standard Nelder-Mead; x becomes the best point, the best value returns.
double nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                   std::vector<double>& x, double step_rel, int max_evals) {
  const std::size_t dim = x.size();
  std::vector<std::vector<double>> pts(dim + 1, x);
  std::vector<double> fv(dim + 1);
  for (std::size_t i = 0; i < dim; ++i) {
    const double scale = std::abs(x[i]) > 1e-12 ? std::abs(x[i]) : 1.0;
    pts[i + 1][i] += step_rel * scale;
  }
  for (std::size_t i = 0; i <= dim; ++i) fv[i] = f(pts[i]);
  int evals = static_cast<int>(dim) + 1;

  while (evals < max_evals) {
    std::size_t best = 0, worst = 0, second = 0;
    for (std::size_t i = 1; i <= dim; ++i) {
      if (fv[i] < fv[best]) best = i;
      if (fv[i] > fv[worst]) worst = i;
    }
    second = best;
    for (std::size_t i = 0; i <= dim; ++i)
      if (i != worst && fv[i] > fv[second]) second = i;
    if (fv[worst] - fv[best] <= 1e-15 * std::abs(fv[best]) + 1e-300) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += pts[i][k];
    }
    for (double& ck : centroid) ck /= static_cast<double>(dim);

    const auto blend = [&](double t) {
      std::vector<double> p(dim);
      for (std::size_t k = 0; k < dim; ++k)
        p[k] = centroid[k] + t * (centroid[k] - pts[worst][k]);
      return p;
    };
    std::vector<double> xr = blend(1.0);
    const double fr = f(xr);
    ++evals;
    if (fr < fv[best]) {
      std::vector<double> xe = blend(2.0);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      std::vector<double> xc = blend(fr < fv[worst] ? 0.5 : -0.5);
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= dim; ++i) {  // shrink toward the best
          if (i == best) continue;
          for (std::size_t k = 0; k < dim; ++k)
            pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          fv[i] = f(pts[i]);
          ++evals;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= dim; ++i)
    if (fv[i] < fv[best]) best = i;
  x = pts[best];
  return fv[best];
}

}  // namespace

CurveFit fit_curve(CurveFamily family, const std::vector<double>& xs,
                   const std::vector<double>& ys) {
  const int npar = family_param_count(family);
  if (xs.size() != ys.size())
    throw std::invalid_argument("fit_curve: xs and ys length mismatch");
  if (static_cast<int>(xs.size()) < npar)
    throw std::invalid_argument("fit_curve: fewer points than parameters");
  const bool needs_positive_x = family != CurveFamily::exp_decay;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw std::invalid_argument("fit_curve: non-finite input");
    if (needs_positive_x && !(xs[i] > 0.0))
      throw std::invalid_argument("fit_curve: this family needs xs > 0");
  }

  const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  const double xmin = *xmin_it, xmax = *xmax_it;
  const double span = xmax > xmin ? xmax - xmin : 1.0;
  const double y_at_min = ys[static_cast<std::size_t>(xmin_it - xs.begin())];
  const double y_at_max = ys[static_cast<std::size_t>(xmax_it - xs.begin())];
  double ymax_abs = 0.0;
  for (double y : ys) ymax_abs = std::max(ymax_abs, std::abs(y));
  if (ymax_abs == 0.0) ymax_abs = 1.0;

  const auto basis = [&](double x, double b) {
    switch (family) {
      case CurveFamily::exp_decay: return std::exp(-b * x);
      case CurveFamily::poly_decay: return std::pow(x, -b);
      default: return x / (b + x);
    }
  };
  // Best linear coefficients for a fixed b seed the simplex.
  const auto profiled_start = [&](double b) {
    std::vector<double> p;
    if (family == CurveFamily::plateau_offset) {
      double sww = 0, sw1 = 0, swy = 0, s1y = 0;
      const double s11 = static_cast<double>(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = basis(xs[i], b);
        if (!std::isfinite(w)) return std::vector<double>{ymax_abs, b, 0.0};
        sww += w * w;
        sw1 += w;
        swy += w * ys[i];
        s1y += ys[i];
      }
      const double det = sww * s11 - sw1 * sw1;
      if (std::abs(det) < 1e-30) return std::vector<double>{ymax_abs, b, 0.0};
      const double a = (swy * s11 - sw1 * s1y) / det;
      const double c = (sww * s1y - sw1 * swy) / det;
      p = {a, b, c};
    } else {
      double sww = 0, swy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = basis(xs[i], b);
        if (!std::isfinite(w)) return std::vector<double>{ymax_abs, b};
        sww += w * w;
        swy += w * ys[i];
      }
      p = {sww > 1e-300 ? swy / sww : ymax_abs, b};
    }
    for (double v : p)
      if (!std::isfinite(v)) return std::vector<double>{ymax_abs, b, 0.0};
    return p;
  };

  std::vector<double> b_starts;
  if (y_at_min != 0.0 && y_at_max != 0.0 && y_at_min * y_at_max > 0.0) {
    if (family == CurveFamily::exp_decay) {
      const double est = std::log(std::abs(y_at_min / y_at_max)) / span;
      if (std::isfinite(est) && est > 0.0) b_starts.push_back(est);
    } else if (family == CurveFamily::poly_decay && xmax > xmin) {
      const double est =
          std::log(std::abs(y_at_min / y_at_max)) / std::log(xmax / xmin);
      if (std::isfinite(est) && est > 0.0) b_starts.push_back(est);
    }
  }
  if ((family == CurveFamily::plateau ||
       family == CurveFamily::plateau_offset) &&
      y_at_max != 0.0) {
    const double est = xmin * (y_at_max - y_at_min) / std::abs(y_at_max);
    if (std::isfinite(est) && est > 0.0) b_starts.push_back(est);
  }
  std::mt19937_64 rng =
      make_rng(0x5eedf17u, RngStage::fit_start, static_cast<std::uint64_t>(family));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    double b;
    if (family == CurveFamily::exp_decay) {
      b = std::pow(10.0, -2.0 + 3.3 * unif(rng)) / span;
    } else if (family == CurveFamily::poly_decay) {
      b = std::pow(10.0, -2.0 + 3.3 * unif(rng));
    } else {
      const double lo = std::log(xmin / 100.0), hi = std::log(xmax * 100.0);
      b = std::exp(lo + (hi - lo) * unif(rng));
    }
    b_starts.push_back(b);
  }

  const auto objective = [&](const std::vector<double>& p) {
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double fx = evaluate_curve(family, p, xs[i]);
      if (!std::isfinite(fx)) return kDiverged;
      const double d = fx - ys[i];
      sse += d * d;
    }
    return std::isfinite(sse) ? sse : kDiverged;
  };

  std::vector<double> best_params;
  double best_sse = std::numeric_limits<double>::infinity();
  const int evals_per_start = 800 * npar;
  for (double b : b_starts) {
    std::vector<double> p = profiled_start(b);
    const double sse = nelder_mead(objective, p, 0.25, evals_per_start);
    if (sse < best_sse) {
      best_sse = sse;
      best_params = p;
    }
  }
  if (!std::isfinite(best_sse) || best_sse >= kDiverged)
    throw std::runtime_error("fit_curve: every start diverged");
  for (double step : {1e-2, 1e-4}) {  // polish
    std::vector<double> p = best_params;
    const double sse = nelder_mead(objective, p, step, evals_per_start);
    if (sse < best_sse) {
      best_sse = sse;
      best_params = p;
    }
  }
  for (double v : best_params)
    if (!std::isfinite(v))
      throw std::runtime_error("fit_curve: non-finite fitted parameters");

  CurveFit fit;
  fit.family = family;
  fit.params = best_params;
  double ynorm = 0.0;
  for (double y : ys) ynorm += y * y;
  ynorm = std::sqrt(ynorm);
  fit.relative_error =
      ynorm > 0.0 ? std::sqrt(best_sse) / ynorm : std::sqrt(best_sse);
  return fit;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, SweepParameter p,
                     const std::filesystem::path& path) {
  const bool extras =
      !rows.empty() && rows.front().median_unscaled_gap.has_value();
  std::string out = "param,value,median_gmin,mad_gmin,n_samples";
  if (extras) out += ",median_unscaled_gap,median_scale_factor";
  out += '\n';
  for (const SweepRow& row : rows) {
    out += sweep_parameter_name(p);
    out += ',';
    out += format_double(row.value);
    out += ',';
    out += format_double(row.median_gmin);
    out += ',';
    out += format_double(row.mad_gmin);
    out += ',';
    out += format_integer(row.n_samples);
    if (extras) {
      out += ',';
      out += format_double(row.median_unscaled_gap.value_or(0.0));
      out += ',';
      out += format_double(row.median_scale_factor.value_or(0.0));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_fits_json(const std::vector<CurveFit>& fits,
                     const std::filesystem::path& path) {
  JsonWriter w;
  w.begin_array();
  for (const CurveFit& fit : fits) {
    w.begin_object();
    w.key("family");
    w.value(family_name(fit.family));
    w.key("params");
    w.begin_array();
    for (double p : fit.params) w.value(p);
    w.end_array();
    w.key("relative_error");
    w.value(fit.relative_error);
    w.end_object();
  }
  w.end_array();
  write_text_file(path, w.str() + "\n");
}

}  // namespace groundgap
