#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>

#include "groundgap/problems.hpp"
#include "groundgap/textio.hpp"

namespace groundgap {

namespace {

using nlohmann::json;

void append_spec(JsonWriter& w, const EnsembleSpec& spec) {
  w.begin_object();
  w.key("kind").value(kind_name(spec.kind));
  w.key("count").value(spec.count);
  w.key("m").value(spec.m);
  w.key("n").value(spec.n);
  w.key("lo").value(static_cast<std::int64_t>(spec.lo));
  w.key("hi").value(static_cast<std::int64_t>(spec.hi));
  w.key("kappa_target");
  if (spec.kappa_target) {
    w.value(*spec.kappa_target);
  } else {
    w.null();
  }
  w.key("seed").value(static_cast<std::uint64_t>(spec.seed));
  w.end_object();
}

EnsembleSpec parse_spec(const json& j) {
  EnsembleSpec spec;
  spec.kind = parse_kind(j.at("kind").get<std::string>());
  spec.count = j.at("count").get<int>();
  spec.m = j.at("m").get<int>();
  spec.n = j.at("n").get<int>();
  spec.lo = j.at("lo").get<long long>();
  spec.hi = j.at("hi").get<long long>();
  if (!j.at("kappa_target").is_null()) {
    spec.kappa_target = j.at("kappa_target").get<double>();
  }
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

Problem parse_problem(const json& j, std::size_t index) {
  const std::string where = "problem record #" + std::to_string(index);
  Problem p;
  p.kind = parse_kind(j.at("kind").get<std::string>());
  const auto m = j.at("m").get<Eigen::Index>();
  const auto n = j.at("n").get<Eigen::Index>();
  const auto& rows = j.at("a");
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != m) {
    throw std::runtime_error(where + ": 'a' must hold m rows");
  }
  p.a.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw std::runtime_error(where + ": row " + std::to_string(i) +
                               " must hold n entries");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      p.a(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  const auto& bvec = j.at("b");
  if (static_cast<Eigen::Index>(bvec.size()) != m) {
    throw std::runtime_error(where + ": 'b' must hold m entries");
  }
  p.b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    p.b[i] = bvec[static_cast<std::size_t>(i)].get<double>();
  }
  if (!j.at("x_star").is_null()) {
    const auto& xs = j.at("x_star");
    if (static_cast<Eigen::Index>(xs.size()) != n) {
      throw std::runtime_error(where + ": 'x_star' must hold n entries");
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      x[k] = xs[static_cast<std::size_t>(k)].get<double>();
    }
    p.x_star = std::move(x);
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
  return p;
}

}  // namespace

void save_ensemble(const std::filesystem::path& path, const Ensemble& e) {
  JsonWriter w;
  w.begin_object();
  w.key("spec");
  append_spec(w, e.spec);
  w.key("problems").begin_array();
  for (const Problem& p : e.problems) {
    w.begin_object();
    w.key("kind").value(kind_name(p.kind));
    w.key("m").value(static_cast<std::int64_t>(p.rows()));
    w.key("n").value(static_cast<std::int64_t>(p.cols()));
    w.key("a").begin_array();
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      w.begin_array();
      for (Eigen::Index k = 0; k < p.cols(); ++k) w.value(p.a(i, k));
      w.end_array();
    }
    w.end_array();
    w.key("b").begin_array();
    for (Eigen::Index i = 0; i < p.rows(); ++i) w.value(p.b[i]);
    w.end_array();
    w.key("x_star");
    if (p.x_star) {
      w.begin_array();
      for (Eigen::Index k = 0; k < p.cols(); ++k) {
        // Planted entries are exact integers; store them as such.
        w.value(static_cast<std::int64_t>(std::llround((*p.x_star)[k])));
      }
      w.end_array();
    } else {
      w.null();
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
  write_text_file(path, w.str() + "\n");
}

Ensemble load_ensemble(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("ensemble parse error in " + path.string() +
                             ": " + e.what());
  }
  Ensemble out;
  try {
    out.spec = parse_spec(doc.at("spec"));
    out.spec.validate();
  } catch (const json::exception& e) {
    throw std::runtime_error("ensemble spec invalid: " + std::string(e.what()));
  }
  const auto& problems = doc.at("problems");
  if (!problems.is_array()) {
    throw std::runtime_error("'problems' must be an array");
  }
  out.problems.reserve(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    try {
      out.problems.push_back(parse_problem(problems[i], i));
    } catch (const json::exception& e) {
      throw std::runtime_error("problem record #" + std::to_string(i) + ": " +
                               e.what());
    }
  }
  return out;
}

}  // namespace groundgap
