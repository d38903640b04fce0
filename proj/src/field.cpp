#include "lpdiss/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "lpdiss/rng.hpp"

namespace lpdiss {

DomainBox DomainBox::unit(int n) {
  DomainBox b;
  b.n = n;
  b.lo.assign(n, 0.0);
  b.hi.assign(n, 1.0);
  b.lo_unbounded.assign(n, false);
  b.hi_unbounded.assign(n, false);
  return b;
}

DomainBox DomainBox::interval(double a, double b) {
  DomainBox box = unit(1);
  box.lo[0] = a;
  box.hi[0] = b;
  box.validate();
  return box;
}

DomainBox DomainBox::half_line(double a, double truncation) {
  DomainBox box = unit(1);
  box.lo[0] = a;
  box.hi[0] = std::numeric_limits<double>::infinity();
  box.hi_unbounded[0] = true;
  box.truncation = truncation;
  box.validate();
  return box;
}

bool DomainBox::unbounded() const {
  for (int k = 0; k < n; ++k)
    if (lo_unbounded[k] || hi_unbounded[k]) return true;
  return false;
}

DomainBox DomainBox::effective(double truncation_override) const {
  const double trunc = truncation_override > 0 ? truncation_override : truncation;
  DomainBox out = *this;
  for (int k = 0; k < n; ++k) {
    if (lo_unbounded[k]) out.lo[k] = -trunc;
    if (hi_unbounded[k]) out.hi[k] = trunc;
    out.lo_unbounded[k] = out.hi_unbounded[k] = false;
    if (out.lo[k] >= out.hi[k])
      throw Error("DomainBox: truncation radius does not exceed the finite end");
  }
  out.truncation = trunc;
  return out;
}

bool DomainBox::contains(std::span<const double> x) const {
  if (int(x.size()) != n) return false;
  for (int k = 0; k < n; ++k) {
    if (!lo_unbounded[k] && x[k] < lo[k]) return false;
    if (!hi_unbounded[k] && x[k] > hi[k]) return false;
  }
  return true;
}

std::vector<double> DomainBox::center() const {
  const DomainBox eff = effective();
  std::vector<double> c(n);
  for (int k = 0; k < n; ++k) c[k] = 0.5 * (eff.lo[k] + eff.hi[k]);
  return c;
}

void DomainBox::validate() const {
  if (n < 1 || int(lo.size()) != n || int(hi.size()) != n ||
      int(lo_unbounded.size()) != n || int(hi_unbounded.size()) != n)
    throw Error("DomainBox: inconsistent dimensions");
  for (int k = 0; k < n; ++k) {
    const double a = lo_unbounded[k] ? -truncation : lo[k];
    const double b = hi_unbounded[k] ? truncation : hi[k];
    if (!(a < b)) throw Error("DomainBox: lo must be < hi on every axis");
  }
  if (unbounded() && !(truncation > 0))
    throw Error("DomainBox: unbounded axis requires a positive truncation");
}

std::vector<std::vector<double>> sample_points(const DomainBox& box,
                                               const SamplingPlan& plan) {
  plan.validate();
  const DomainBox eff = box.effective();
  SplitMix64 rng(plan.seed);
  std::vector<std::vector<double>> pts(plan.n_points);
  for (auto& p : pts) {
    p.resize(eff.n);
    for (int k = 0; k < eff.n; ++k)
      p[k] = eff.lo[k] + rng.next_double() * (eff.hi[k] - eff.lo[k]);
  }
  return pts;
}

CoefficientField CoefficientField::constant(ComplexMatrix a,
                                            std::optional<DomainBox> box) {
  a.check_finite();
  CoefficientField f;
  f.kind_ = Kind::constant;
  f.m_ = a.dim();
  f.box_ = box ? *box : DomainBox::unit(1);
  f.box_.validate();
  f.const_value_ = std::move(a);
  return f;
}

CoefficientField CoefficientField::expression(std::vector<std::vector<ExprAst>> entries,
                                              DomainBox box,
                                              std::map<std::string, double> params) {
  CoefficientField f;
  f.kind_ = Kind::expression;
  f.m_ = int(entries.size());
  if (f.m_ < 1) throw Error("expression field: empty entry grid");
  for (const auto& row : entries)
    if (int(row.size()) != f.m_) throw Error("expression field: ragged entry grid");
  box.validate();
  f.box_ = std::move(box);
  f.exprs_ = std::move(entries);
  f.params_ = std::move(params);
  return f;
}

CoefficientField CoefficientField::grid(std::vector<std::vector<double>> points,
                                        std::vector<ComplexMatrix> values,
                                        DomainBox box) {
  if (points.empty() || points.size() != values.size())
    throw Error("grid field: points/values size mismatch");
  box.validate();
  CoefficientField f;
  f.kind_ = Kind::grid;
  f.m_ = values.front().dim();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (int(points[i].size()) != box.n)
      throw Error("grid field: point dimension mismatch");
    if (!box.contains(points[i]))
      throw Error("grid field: sample point outside the box");
    if (values[i].dim() != f.m_) throw Error("grid field: matrix size mismatch");
    values[i].check_finite();
    for (std::size_t j = 0; j < i; ++j)
      if (points[i] == points[j])
        throw Error("grid field: duplicate sample points");
  }
  f.box_ = std::move(box);
  f.grid_points_ = std::move(points);
  f.grid_values_ = std::move(values);
  return f;
}

ComplexMatrix CoefficientField::eval(std::span<const double> x) const {
  if (int(x.size()) != box_.n)
    throw Error("eval_field: point dimension does not match the box");
  if (!box_.contains(x)) throw Error("eval_field: point outside the box");
  switch (kind_) {
    case Kind::constant: {
      if (scale_ == 1.0) return const_value_;
      return Complex(scale_) * const_value_;
    }
    case Kind::expression: {
      ComplexMatrix a(m_);
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j) {
          const Complex v = Complex(scale_) * exprs_[i][j].eval(x, params_);
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "eval_field: non-finite value of entry (" << i << "," << j << ")";
            throw Error(os.str());
          }
          a.at(i, j) = v;
        }
      return a;
    }
    case Kind::grid: {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < grid_points_.size(); ++i) {
        double d = 0.0;
        for (int k = 0; k < box_.n; ++k) {
          const double t = grid_points_[i][k] - x[k];
          d += t * t;
        }
        if (d < best_d) {  // strict: ties keep the lowest index
          best_d = d;
          best = i;
        }
      }
      if (scale_ == 1.0) return grid_values_[best];
      return Complex(scale_) * grid_values_[best];
    }
  }
  throw Error("corrupt field");
}

CoefficientField CoefficientField::scaled(double c) const {
  CoefficientField f = *this;
  f.scale_ *= c;
  return f;
}

namespace {

using nlohmann::json;

nlohmann::ordered_json box_to_json(const DomainBox& b) {
  nlohmann::ordered_json lo = nlohmann::ordered_json::array(), hi = nlohmann::ordered_json::array();
  for (int k = 0; k < b.n; ++k) {
    lo.push_back(b.lo_unbounded[k] ? nlohmann::ordered_json()
                                   : nlohmann::ordered_json(b.lo[k]));
    hi.push_back(b.hi_unbounded[k] ? nlohmann::ordered_json()
                                   : nlohmann::ordered_json(b.hi[k]));
  }
  nlohmann::ordered_json out{{"lo", lo}, {"hi", hi}};
  if (b.unbounded()) out["truncation"] = b.truncation;
  return out;
}

DomainBox box_from_json(const json& j, int n) {
  DomainBox b = DomainBox::unit(n);
  if (j.is_null()) return b;
  const auto& lo = j.at("lo");
  const auto& hi = j.at("hi");
  if (int(lo.size()) != n || int(hi.size()) != n)
    throw Error("field json: box dimension mismatch");
  for (int k = 0; k < n; ++k) {
    if (lo[k].is_null()) {
      b.lo_unbounded[k] = true;
      b.lo[k] = -std::numeric_limits<double>::infinity();
    } else {
      b.lo[k] = lo[k].get<double>();
    }
    if (hi[k].is_null()) {
      b.hi_unbounded[k] = true;
      b.hi[k] = std::numeric_limits<double>::infinity();
    } else {
      b.hi[k] = hi[k].get<double>();
    }
  }
  if (j.contains("truncation")) b.truncation = j["truncation"].get<double>();
  b.validate();
  return b;
}

Complex entry_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw Error("field json: matrix entry must be [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

ComplexMatrix matrix_from_json(const json& j, int m) {
  if (int(j.size()) != m) throw Error("field json: matrix row count mismatch");
  ComplexMatrix a(m);
  for (int i = 0; i < m; ++i) {
    if (int(j[i].size()) != m) throw Error("field json: matrix column count mismatch");
    for (int k = 0; k < m; ++k) a.at(i, k) = entry_from_json(j[i][k]);
  }
  a.check_finite();
  return a;
}

nlohmann::ordered_json matrix_to_json(const ComplexMatrix& a) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < a.dim(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int k = 0; k < a.dim(); ++k)
      row.push_back(nlohmann::ordered_json::array({a.at(i, k).real(), a.at(i, k).imag()}));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

CoefficientField field_from_json_text(const std::string& text) {
  json j = json::parse(text);
  const int m = j.at("m").get<int>();
  const int n = j.at("n").get<int>();
  if (m < 1 || n < 1) throw Error("field json: m and n must be >= 1");
  const std::string kind = j.at("kind").get<std::string>();
  DomainBox box = box_from_json(j.contains("box") ? j["box"] : json(), n);

  if (kind == "constant")
    return CoefficientField::constant(matrix_from_json(j.at("entries"), m), box);

  if (kind == "expression") {
    std::map<std::string, double> params;
    std::vector<std::string> param_names;
    if (j.contains("params"))
      for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
        params[it.key()] = it.value().get<double>();
        param_names.push_back(it.key());
      }
    const auto& entries = j.at("entries");
    if (int(entries.size()) != m) throw Error("field json: entry row count mismatch");
    std::vector<std::vector<ExprAst>> exprs(m);
    for (int i = 0; i < m; ++i) {
      if (int(entries[i].size()) != m)
        throw Error("field json: entry column count mismatch");
      for (int k = 0; k < m; ++k)
        exprs[i].push_back(parse_expr(entries[i][k].get<std::string>(), n, param_names));
    }
    return CoefficientField::expression(std::move(exprs), box, std::move(params));
  }

  if (kind == "grid") {
    std::vector<std::vector<double>> pts;
    for (const auto& p : j.at("points")) pts.push_back(p.get<std::vector<double>>());
    std::vector<ComplexMatrix> vals;
    for (const auto& v : j.at("values")) vals.push_back(matrix_from_json(v, m));
    return CoefficientField::grid(std::move(pts), std::move(vals), box);
  }

  throw Error("field json: unknown kind '" + kind + "'");
}

CoefficientField field_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open field file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return field_from_json_text(ss.str());
}

std::string field_to_json_text(const CoefficientField& f) {
  nlohmann::ordered_json j;
  j["m"] = f.m();
  j["n"] = f.box().n;
  switch (f.kind()) {
    case CoefficientField::Kind::constant: {
      j["kind"] = "constant";
      j["entries"] = matrix_to_json(f.eval(f.box().center()));
      break;
    }
    case CoefficientField::Kind::expression: {
      j["kind"] = "expression";
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& row : f.expr_entries()) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (const auto& e : row) r.push_back(e.print());
        rows.push_back(r);
      }
      j["entries"] = rows;
      if (!f.params().empty()) j["params"] = f.params();
      break;
    }
    case CoefficientField::Kind::grid: {
      j["kind"] = "grid";
      j["points"] = f.grid_points();
      nlohmann::ordered_json vals = nlohmann::ordered_json::array();
      for (const auto& v : f.grid_values()) vals.push_back(matrix_to_json(v));
      j["values"] = vals;
      break;
    }
  }
  j["box"] = box_to_json(f.box());
  return j.dump();
}

}  // namespace lpdiss
