#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lpdiss/elasticity.hpp"
#include "lpdiss/oracle.hpp"
#include "lpdiss/report.hpp"
#include "lpdiss/scalar.hpp"
#include "lpdiss/system.hpp"

namespace py = pybind11;
using namespace lpdiss;

namespace {

SamplingPlan make_plan(std::uint64_t seed, int points, int dirs, int refine) {
  SamplingPlan plan;
  plan.seed = seed;
  plan.n_points = points;
  plan.n_directions = dirs;
  plan.refine_iters = refine;
  return plan;
}

py::dict dict_of_verdict(const Verdict& v) {
  py::dict d;
  d["status"] = to_string(v.status);
  d["margin"] = v.margin;
  d["boundary"] = v.boundary;
  d["notes"] = v.notes;
  if (v.witness) {
    py::dict w;
    if (v.witness->h >= 0) w["h"] = v.witness->h + 1;
    if (!v.witness->x.empty()) w["x"] = v.witness->x;
    if (!v.witness->xi.empty()) w["xi"] = v.witness->xi;
    if (!v.witness->lambda.empty()) w["lambda"] = v.witness->lambda;
    if (!v.witness->omega.empty()) w["omega"] = v.witness->omega;
    w["value"] = v.witness->value;
    d["witness"] = w;
  }
  return d;
}

py::dict dict_of_interval(const AngleInterval& iv) {
  py::dict d;
  d["theta_minus"] = iv.theta_minus;
  d["theta_plus"] = iv.theta_plus;
  d["empty"] = iv.empty;
  return d;
}

py::dict dict_of_p_interval(const PInterval& iv) {
  py::dict d;
  d["empty"] = iv.empty;
  if (!iv.empty) {
    d["p_lo"] = iv.p_lo;
    d["p_hi"] = iv.p_hi;
    d["closed_lo"] = iv.closed_lo;
    d["closed_hi"] = iv.closed_hi;
  }
  return d;
}

py::dict dict_of_shift(const ShiftReport& r) {
  py::dict d;
  d["exists"] = r.exists;
  d["k_sup"] = r.k_sup;
  d["criterion_value"] = r.criterion_value;
  d["divergent"] = r.divergent;
  d["notes"] = r.notes;
  return d;
}

CoefficientField field_of(const py::object& src) {
  if (py::isinstance<py::str>(src)) return field_from_json_text(src.cast<std::string>());
  // nested [[re, im]] entry lists describe a constant matrix
  const auto rows = src.cast<std::vector<std::vector<std::complex<double>>>>();
  const int m = int(rows.size());
  ComplexMatrix a(m);
  for (int i = 0; i < m; ++i) {
    if (int(rows[i].size()) != m) throw Error("constant matrix must be square");
    for (int j = 0; j < m; ++j) a.at(i, j) = rows[i][j];
  }
  return CoefficientField::constant(a, DomainBox::unit(m));
}

}  // namespace

PYBIND11_MODULE(lpdiss, mod) {
  mod.doc() = "dissipativity criteria and verification oracles for second-order "
              "operators with complex matrix coefficients";
  mod.attr("__version__") = kVersion;

  mod.def(
      "scalar_check",
      [](const py::object& field, double p, std::uint64_t seed, int points, int dirs,
         int refine) {
        return dict_of_verdict(
            scalar_check(field_of(field), PExponent(p), make_plan(seed, points, dirs, refine)));
      },
      py::arg("field"), py::arg("p"), py::arg("seed") = 1, py::arg("points") = 64,
      py::arg("dirs") = 2048, py::arg("refine") = 40,
      "scalar dissipativity criterion; field is a JSON string or a nested "
      "[[complex]] constant matrix");

  mod.def(
      "scalar_angle",
      [](const py::object& field, double p, std::uint64_t seed, int points, int dirs,
         int refine) {
        const auto rep = scalar_angle(field_of(field), PExponent(p),
                                      make_plan(seed, points, dirs, refine));
        py::dict d = dict_of_interval(rep.interval);
        d["lambda1"] = rep.lambda1;
        d["lambda2"] = rep.lambda2;
        d["xi_empty"] = rep.xi_empty;
        return d;
      },
      py::arg("field"), py::arg("p"), py::arg("seed") = 1, py::arg("points") = 64,
      py::arg("dirs") = 2048, py::arg("refine") = 40);

  mod.def("real_scalar_angle", [](double p) {
    return dict_of_interval(real_scalar_angle(PExponent(p)));
  });

  mod.def(
      "system_check",
      [](const py::list& fields, double p, std::uint64_t seed, int points, int dirs,
         int refine) {
        std::vector<CoefficientField> fs;
        for (const auto& f : fields) fs.push_back(field_of(py::reinterpret_borrow<py::object>(f)));
        return dict_of_verdict(
            system_check(fs, PExponent(p), make_plan(seed, points, dirs, refine)).overall);
      },
      py::arg("fields"), py::arg("p"), py::arg("seed") = 1, py::arg("points") = 64,
      py::arg("dirs") = 4096, py::arg("refine") = 40);

  mod.def(
      "sym_system_check",
      [](const py::list& fields, double p, std::uint64_t seed, int points, int dirs,
         int refine) {
        std::vector<CoefficientField> fs;
        for (const auto& f : fields) fs.push_back(field_of(py::reinterpret_borrow<py::object>(f)));
        return dict_of_verdict(
            sym_system_check(fs, PExponent(p), make_plan(seed, points, dirs, refine)).overall);
      },
      py::arg("fields"), py::arg("p"), py::arg("seed") = 1, py::arg("points") = 64,
      py::arg("dirs") = 4096, py::arg("refine") = 40);

  mod.def(
      "system_angle",
      [](const py::list& fields, double p, std::uint64_t seed, int points, int dirs,
         int refine) {
        std::vector<CoefficientField> fs;
        for (const auto& f : fields) fs.push_back(field_of(py::reinterpret_borrow<py::object>(f)));
        return dict_of_interval(
            system_angle(fs, PExponent(p), make_plan(seed, points, dirs, refine)));
      },
      py::arg("fields"), py::arg("p"), py::arg("seed") = 1, py::arg("points") = 64,
      py::arg("dirs") = 8192, py::arg("refine") = 40);

  mod.def("sym_p_interval", [](double mu1, double mum) {
    return dict_of_p_interval(sym_p_interval(mu1, mum));
  });

  mod.def("sphere_product_max", [](const std::vector<double>& mu) {
    return sphere_product_max(mu);
  });

  mod.def(
      "pq_values",
      [](const py::object& matrix, double p, const std::vector<Complex>& lam,
         const std::vector<Complex>& om) {
        const auto f = field_of(matrix);
        const auto a = f.eval(f.box().center());
        const auto pq = pq_values(a, PExponent(p), lam, om);
        return py::make_tuple(pq.p_val, pq.q_val);
      },
      py::arg("matrix"), py::arg("p"), py::arg("lambda_"), py::arg("omega"));

  mod.def("elasticity_check", [](double nu, double p) {
    return dict_of_verdict(elasticity_check(ElasticityParams(nu), PExponent(p)));
  });
  mod.def("elasticity_p_interval", [](double nu) {
    return dict_of_p_interval(elasticity_p_interval(ElasticityParams(nu)));
  });
  mod.def("elasticity_nu_set", [](double p) {
    const auto s = elasticity_nu_set(PExponent(p));
    py::dict d;
    d["left_end"] = s.left_end;
    d["right_start"] = s.right_start;
    return d;
  });
  mod.def("elasticity_shift_lower", [](double nu, double p) {
    const auto r = elasticity_shift_lower(ElasticityParams(nu), PExponent(p));
    py::dict d = dict_of_shift(r);
    d["nu_reduced"] = r.nu_reduced;
    return d;
  });
  mod.def("elasticity_shift_upper", [](double nu, double p) {
    return dict_of_shift(elasticity_shift_upper(ElasticityParams(nu), PExponent(p)));
  });

  mod.def(
      "violation_search",
      [](const std::string& op_json, double p, long budget) -> py::object {
        const auto spec = OperatorSpec::from_json_text(op_json);
        const auto hit = violation_search(spec, PExponent(p), budget);
        if (!hit) return py::none();
        py::dict d;
        d["form_value"] = hit->value;
        d["field_json"] = testfield_to_json_text(hit->field);
        return d;
      },
      py::arg("op_json"), py::arg("p"), py::arg("budget") = 64,
      "search for a test field with a negative form value; returns None when "
      "no violation is found within the budget");

  mod.def(
      "form_value",
      [](const std::string& op_json, double p, const std::string& field_json) {
        return form_value(OperatorSpec::from_json_text(op_json), PExponent(p),
                          testfield_from_json_text(field_json));
      },
      py::arg("op_json"), py::arg("p"), py::arg("field_json"));

  py::register_exception<Error>(mod, "LpdissError");
}
