#include "lpdiss/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace lpdiss {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

Json json_number(double v) {
  // JSON has no inf/nan literals; encode them as strings
  if (std::isnan(v) || std::isinf(v)) return format_double(v);
  return v;
}

Json json_cvector(const std::vector<Complex>& v) {
  Json out = Json::array();
  for (const Complex& z : v) out.push_back(Json::array({z.real(), z.imag()}));
  return out;
}

}  // namespace

Json json_of_witness(const CheckWitness& w) {
  Json out;
  if (w.h >= 0) out["h"] = w.h + 1;
  if (!w.x.empty()) out["x"] = w.x;
  if (!w.xi.empty()) out["xi"] = w.xi;
  if (!w.lambda.empty()) out["lambda"] = json_cvector(w.lambda);
  if (!w.omega.empty()) out["omega"] = json_cvector(w.omega);
  out["value"] = json_number(w.value);
  return out;
}

Json json_of_verdict(const Verdict& v) {
  Json out;
  out["status"] = to_string(v.status);
  out["margin"] = json_number(v.margin);
  out["boundary"] = v.boundary;
  out["witness"] = v.witness ? json_of_witness(*v.witness) : Json();
  return out;
}

Json json_of_interval(const AngleInterval& iv) {
  if (iv.empty) return Json{{"empty", true}};
  return Json{{"theta_minus", json_number(iv.theta_minus)},
              {"theta_plus", json_number(iv.theta_plus)}};
}

Json json_of_p_interval(const PInterval& iv) {
  if (iv.empty) return Json{{"empty", true}};
  return Json{{"p_lo", json_number(iv.p_lo)},
              {"p_hi", json_number(iv.p_hi)},
              {"closed_lo", iv.closed_lo},
              {"closed_hi", iv.closed_hi}};
}

Json json_of_shift(const ShiftReport& r) {
  Json out;
  out["exists"] = r.exists;
  out["k_sup"] = json_number(r.k_sup);
  out["criterion_value"] = json_number(r.criterion_value);
  if (r.divergent) out["divergent"] = true;
  return out;
}

Json make_report(const std::string& command, std::uint64_t seed) {
  Json report;
  report["command"] = command;
  report["verdict"] = Json();
  report["margin"] = Json();
  report["witness"] = Json();
  report["interval"] = Json();
  report["p_interval"] = Json();
  report["oracle"] = Json();
  report["notes"] = Json::array();
  report["version"] = kVersion;
  report["seed"] = seed;
  return report;
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open output file: " + tmp);
    out << text;
    if (!out) throw Error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot rename temporary output into place: " + path);
}

namespace {

void csv_flatten(const Json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      csv_flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (j.is_array()) {
    int idx = 0;
    for (const auto& item : j) csv_flatten(item, prefix + "." + std::to_string(idx++), out);
    return;
  }
  out += prefix;
  out += ',';
  if (j.is_number_float())
    out += format_double(j.get<double>());
  else if (j.is_null())
    out += "";
  else if (j.is_string())
    out += j.get<std::string>();
  else
    out += j.dump();
  out += '\n';
}

}  // namespace

std::string report_to_csv(const Json& report) {
  std::string out = "key,value\n";
  csv_flatten(report, "", out);
  return out;
}

}  // namespace lpdiss
