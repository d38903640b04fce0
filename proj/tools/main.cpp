// Command-line front end: evaluates the dissipativity criteria, angle and
// shift computations, the variational oracle, the norm-decay simulation, and
// admissible-region sweeps, emitting machine-readable reports.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "lpdiss/elasticity.hpp"
#include "lpdiss/oracle.hpp"
#include "lpdiss/report.hpp"
#include "lpdiss/scalar.hpp"
#include "lpdiss/system.hpp"

namespace {

using namespace lpdiss;

constexpr int kExitHolds = 0;
constexpr int kExitFails = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUndetermined = 3;

struct CommonOpts {
  std::string op_kind;  // scalar | diag | general2d | elasticity
  std::string file;
  double p = 2.0;
  double nu = 0.0;
  bool has_nu = false;
  SamplingPlan plan;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_p = true) {
  cmd->add_option("--op", o.op_kind, "operator class: scalar|diag|general2d|elasticity");
  cmd->add_option("--file", o.file, "operator/coefficient JSON file");
  if (needs_p) cmd->add_option("--p", o.p, "Lebesgue exponent, in (1, inf)");
  cmd->add_option("--nu", o.nu, "Poisson ratio (elasticity)")->each([&](const std::string&) {
    o.has_nu = true;
  });
  cmd->add_option("--seed", o.plan.seed, "sampling seed");
  cmd->add_option("--points", o.plan.n_points, "spatial sample count");
  cmd->add_option("--dirs", o.plan.n_directions, "direction sample count");
  cmd->add_option("--refine", o.plan.refine_iters, "local refinement rounds");
  cmd->add_option("--out", o.out, "report output path (default: stdout)");
  cmd->add_option("--format", o.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

OperatorSpec load_operator(const CommonOpts& o) {
  if (o.op_kind == "elasticity") {
    if (!o.has_nu && o.file.empty())
      throw Error("elasticity operator needs --nu or --file");
    if (o.has_nu) return OperatorSpec::elasticity(o.nu);
    return OperatorSpec::from_json_file(o.file);
  }
  if (o.file.empty()) throw Error("operator class '" + o.op_kind + "' needs --file");
  OperatorSpec spec = OperatorSpec::from_json_file(o.file);
  if (o.op_kind == "scalar" && spec.kind != OperatorSpec::Kind::scalar) {
    if (spec.kind == OperatorSpec::Kind::diagonal && spec.fields.size() == 1 &&
        spec.fields.front().m() == 1)
      return OperatorSpec::scalar(spec.fields.front());
    throw Error("--op scalar: the file does not describe a scalar operator");
  }
  if (o.op_kind == "diag" && spec.kind == OperatorSpec::Kind::scalar &&
      spec.spatial_dim() == 1)
    return OperatorSpec::diagonal({spec.fields.front()});
  return spec;
}

void emit_text(const CommonOpts& o, const std::string& text) {
  if (o.out.empty())
    std::cout << text;
  else
    write_atomic(o.out, text);
}

void emit(const CommonOpts& o, const Json& report) {
  emit_text(o, o.format == "csv" ? report_to_csv(report) : report.dump(2) + "\n");
}

int exit_code_of(const Verdict& v) {
  switch (v.status) {
    case Status::holds: return kExitHolds;
    case Status::fails: return kExitFails;
    case Status::undetermined: return kExitUndetermined;
  }
  return kExitUndetermined;
}

void fill_verdict(Json& report, const Verdict& v) {
  report["verdict"] = to_string(v.status);
  report["margin"] =
      std::isfinite(v.margin) ? Json(v.margin) : Json(format_double(v.margin));
  if (v.witness) report["witness"] = json_of_witness(*v.witness);
  for (const auto& n : v.notes) report["notes"].push_back(n);
  if (v.boundary) report["notes"].push_back("margin within the boundary tolerance");
}

int run_check(const CommonOpts& o) {
  Json report = make_report("check", o.plan.seed);
  Verdict v;
  const OperatorSpec spec = load_operator(o);
  const PExponent p(o.p);
  switch (spec.kind) {
    case OperatorSpec::Kind::scalar:
      v = scalar_check(spec.fields.front(), p, o.plan);
      break;
    case OperatorSpec::Kind::diagonal:
      v = system_check(spec.fields, p, o.plan).overall;
      break;
    case OperatorSpec::Kind::general2d:
      v = general2d_necessary(spec.fields, p, o.plan);
      break;
    case OperatorSpec::Kind::elasticity: {
      v = elasticity_check(ElasticityParams(spec.nu), p);
      report["p_interval"] =
          json_of_p_interval(elasticity_p_interval(ElasticityParams(spec.nu)));
      break;
    }
  }
  fill_verdict(report, v);
  emit(o, report);
  return exit_code_of(v);
}

int run_angle(const CommonOpts& o) {
  Json report = make_report("angle", o.plan.seed);
  const OperatorSpec spec = load_operator(o);
  const PExponent p(o.p);
  try {
    if (spec.kind == OperatorSpec::Kind::scalar) {
      const auto rep = scalar_angle(spec.fields.front(), p, o.plan);
      report["verdict"] = "holds";
      report["interval"] = json_of_interval(rep.interval);
      report["oracle"] = Json{{"lambda1", format_double(rep.lambda1)},
                              {"lambda2", format_double(rep.lambda2)},
                              {"xi_empty", rep.xi_empty}};
      for (const auto& n : rep.notes) report["notes"].push_back(n);
    } else if (spec.kind == OperatorSpec::Kind::diagonal) {
      const auto iv = system_angle(spec.fields, p, o.plan);
      report["verdict"] = "holds";
      report["interval"] = json_of_interval(iv);
    } else {
      throw Error("angle: supported operator classes are scalar and diag");
    }
  } catch (const PreconditionError& pe) {
    fill_verdict(report, pe.verdict);
    report["notes"].push_back("the operator itself is not dissipative at this p");
    emit(o, report);
    return kExitFails;
  }
  emit(o, report);
  return kExitHolds;
}

int run_elasticity(const CommonOpts& o) {
  if (!o.has_nu) throw Error("elasticity: needs --nu");
  Json report = make_report("elasticity", o.plan.seed);
  const ElasticityParams params(o.nu);
  report["p_interval"] = json_of_p_interval(elasticity_p_interval(params));
  const auto nuset = elasticity_nu_set(PExponent(o.p));
  report["oracle"] = Json{{"nu_set_left_end", nuset.left_end},
                          {"nu_set_right_start", nuset.right_start},
                          {"strong_elliptic", params.strong_elliptic}};
  const Verdict v = elasticity_check(params, PExponent(o.p));
  fill_verdict(report, v);
  emit(o, report);
  return exit_code_of(v);
}

int run_shift(const CommonOpts& o, const std::string& direction,
              const std::string& mode) {
  Json report = make_report("shift", o.plan.seed);
  const OperatorSpec spec = load_operator(o);
  const PExponent p(o.p);
  ShiftReport r;
  Json extra;
  if (spec.kind == OperatorSpec::Kind::elasticity) {
    const ElasticityParams params(spec.nu);
    if (direction == "lower") {
      const auto er = elasticity_shift_lower(params, p);
      r = er;
      if (std::isfinite(er.nu_reduced)) extra["nu_reduced"] = er.nu_reduced;
    } else {
      r = elasticity_shift_upper(params, p);
    }
  } else if (spec.kind == OperatorSpec::Kind::diagonal) {
    ShiftMode m = ShiftMode::positive_k;
    if (mode == "any") m = ShiftMode::any_k;
    if (mode == "psd") m = ShiftMode::psd_variant;
    r = direction == "lower" ? shift_lower_bound(spec.fields, p, o.plan, m)
                             : shift_upper_bound(spec.fields, p, o.plan);
  } else {
    throw Error("shift: supported operator classes are elasticity and diag");
  }
  report["verdict"] = r.exists ? "holds" : "fails";
  Json oracle = json_of_shift(r);
  for (auto it = extra.begin(); it != extra.end(); ++it) oracle[it.key()] = it.value();
  report["oracle"] = oracle;
  for (const auto& n : r.notes) report["notes"].push_back(n);
  emit(o, report);
  return r.exists ? kExitHolds : kExitFails;
}

int run_oracle(const CommonOpts& o, bool search, int fields, int grid_nodes) {
  Json report = make_report("oracle", o.plan.seed);
  const OperatorSpec spec = load_operator(o);
  const PExponent p(o.p);

  if (search) {
    const auto hit = violation_search(spec, p, 64);
    if (hit) {
      report["verdict"] = "fails";
      report["margin"] = hit->value;
      report["oracle"] = Json{{"violation_form_value", hit->value},
                              {"field_nodes", hit->field.grid.nodes}};
      report["notes"].push_back(
          "violating test field found by the witness ladder or bump search");
      emit(o, report);
      return kExitFails;
    }
    report["verdict"] = "undetermined";
    report["notes"].push_back("no violating test field found within the budget; "
                              "the finite ladder cannot certify dissipativity");
    emit(o, report);
    return kExitUndetermined;
  }

  GridSpec grid;
  grid.box = spec.box().effective();
  if (spec.spatial_dim() == 1) {
    grid.nodes = {grid_nodes > 0 ? grid_nodes : 513};
  } else {
    const int side = grid_nodes > 0 ? grid_nodes : 129;
    grid.nodes = {side, side};
  }
  const bool real_fields = spec.kind == OperatorSpec::Kind::elasticity;
  double min_val = std::numeric_limits<double>::infinity();
  const int count = fields > 0 ? fields : 20;
  for (int k = 0; k < count; ++k) {
    const auto tf =
        random_test_field(grid, spec.components(), o.plan.seed + 1000 + k, real_fields);
    min_val = std::min(min_val, form_value(spec, p, tf));
  }
  report["oracle"] = Json{{"fields_tested", count}, {"min_form_value", min_val}};
  const bool ok = min_val >= -1e-8;
  report["verdict"] = ok ? "holds" : "fails";
  report["margin"] = min_val;
  emit(o, report);
  return ok ? kExitHolds : kExitFails;
}

int run_sim(const CommonOpts& o, double t_final, double dt, int grid_nodes) {
  Json report = make_report("sim", o.plan.seed);
  const OperatorSpec spec = load_operator(o);
  const PExponent p(o.p);
  GridSpec grid;
  grid.box = spec.box().effective();
  grid.nodes = {grid_nodes > 0 ? grid_nodes : 201};
  const auto u0 = random_test_field(grid, spec.components(), o.plan.seed + 7, true);
  double step = dt;
  if (step <= 0.0) {
    double amax = 1.0;
    for (const auto& x : sample_points(grid.box, o.plan))
      amax = std::max(amax,
                      spec.fields.front().eval(x).max_abs_entry() * spec.components());
    step = 0.35 * grid.spacing(0) * grid.spacing(0) / amax;
  }
  const auto sim = contraction_sim(spec, p, u0, t_final, step);
  Json oracle;
  oracle["steps"] = int(sim.norms.size()) - 1;
  oracle["initial_norm"] = sim.norms.front();
  oracle["final_norm"] = sim.norms.back();
  oracle["monotone"] = sim.monotone;
  if (sim.first_increase_step >= 0)
    oracle["first_increase_step"] = sim.first_increase_step;
  report["oracle"] = oracle;
  if (!sim.monotone) {
    report["verdict"] = "fails";
    report["notes"].push_back("p-norm increased during the evolution");
    emit(o, report);
    return kExitFails;
  }
  // no increase observed: decisive only when the criterion itself holds
  const bool criterion_holds =
      system_check(spec.kind == OperatorSpec::Kind::scalar
                       ? std::vector<CoefficientField>{spec.fields.front()}
                       : spec.fields,
                   p, o.plan)
          .overall.status == Status::holds;
  if (criterion_holds) {
    report["verdict"] = "holds";
    emit(o, report);
    return kExitHolds;
  }
  report["verdict"] = "undetermined";
  report["notes"].push_back("criterion fails but no norm increase was observed "
                            "within the simulated horizon; inconclusive");
  emit(o, report);
  return kExitUndetermined;
}

int run_region(const CommonOpts& o, double nu_lo, double nu_hi, int steps,
               double r_lo, double r_hi, int r_steps) {
  Json report = make_report("region", o.plan.seed);
  std::ostringstream csv;
  if (o.op_kind == "elasticity" || o.op_kind.empty()) {
    csv << "nu,p_lo,p_hi,empty\n";
    const bool crossed = (nu_lo - 0.5) * (nu_hi - 0.5) < 0.0;
    for (int k = 0; k <= steps; ++k) {
      const double nu = nu_lo + (nu_hi - nu_lo) * k / std::max(1, steps);
      if (std::abs(nu - 0.5) < 1e-12) continue;  // operator undefined on the pole
      const auto iv = elasticity_p_interval(ElasticityParams(nu));
      csv << format_double(nu) << ',';
      if (iv.empty)
        csv << ",,true\n";
      else
        csv << format_double(iv.p_lo) << ',' << format_double(iv.p_hi) << ",false\n";
    }
    if (crossed) {
      report["notes"].push_back("nu range crosses 1/2 where the operator is "
                                "undefined; the sweep is split around it");
      csv << "# note: nu range crosses 1/2 where the operator is undefined; "
             "the sweep is split around it\n";
    }
  } else if (o.op_kind == "diag") {
    csv << "ratio,p_lo,p_hi,open\n";
    for (int k = 0; k <= r_steps; ++k) {
      const double r = r_lo + (r_hi - r_lo) * k / std::max(1, r_steps);
      const auto iv = sym_p_interval(1.0, std::max(r, 1.0));
      csv << format_double(r) << ',' << format_double(iv.p_lo) << ','
          << format_double(iv.p_hi) << ',' << (iv.closed_lo ? "false" : "true") << '\n';
    }
  } else {
    throw Error("region: supported operator classes are elasticity and diag");
  }
  if (o.format == "csv") {
    emit_text(o, csv.str());
  } else {
    report["verdict"] = "holds";
    report["oracle"] = Json{{"region_csv", csv.str()}};
    emit(o, report);
  }
  return kExitHolds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dissipativity criteria and numerical verification for second-order "
               "operators with complex matrix coefficients"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration file");

  CommonOpts o;
  std::string direction = "lower", mode = "positive";
  bool search = false;
  int fields = 0, grid_nodes = 0;
  double t_final = 0.002, dt = 0.0;
  double nu_lo = -1.0, nu_hi = 2.0;
  int steps = 30;
  double r_lo = 1.0, r_hi = 16.0;
  int r_steps = 15;

  auto* check = app.add_subcommand("check", "evaluate the dissipativity criterion");
  add_common(check, o);
  auto* angle = app.add_subcommand("angle", "angle of dissipativity");
  add_common(angle, o);
  auto* elast = app.add_subcommand("elasticity", "admissible exponents and ratios");
  add_common(elast, o);
  auto* shift = app.add_subcommand("shift", "shift comparisons against the Laplacian");
  add_common(shift, o);
  shift->add_option("--direction", direction, "lower|upper")
      ->check(CLI::IsMember({"lower", "upper"}));
  shift->add_option("--mode", mode, "positive|any|psd")
      ->check(CLI::IsMember({"positive", "any", "psd"}));
  auto* oracle = app.add_subcommand("oracle", "variational form on test fields");
  add_common(oracle, o);
  oracle->add_flag("--search", search, "search for a violating test field");
  oracle->add_option("--fields", fields, "number of random test fields");
  oracle->add_option("--grid", grid_nodes, "grid nodes per axis");
  auto* sim = app.add_subcommand("sim", "norm-decay evolution run");
  add_common(sim, o);
  sim->add_option("--T", t_final, "final time");
  sim->add_option("--dt", dt, "time step (default: inside the stability bound)");
  sim->add_option("--grid", grid_nodes, "grid nodes");
  auto* region = app.add_subcommand("region", "admissible-region boundary sweep");
  add_common(region, o, false);
  region->add_option("--nu-min", nu_lo, "sweep start");
  region->add_option("--nu-max", nu_hi, "sweep end");
  region->add_option("--nu-steps", steps, "sweep resolution");
  region->add_option("--r-min", r_lo, "eigenvalue ratio sweep start");
  region->add_option("--r-max", r_hi, "eigenvalue ratio sweep end");
  region->add_option("--r-steps", r_steps, "ratio sweep resolution");

  std::string command;
  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error("cannot open config file: " + config_path);
      nlohmann::json cfg = nlohmann::json::parse(in);
      command = cfg.at("command").get<std::string>();
      if (cfg.contains("op")) o.op_kind = cfg["op"].get<std::string>();
      if (cfg.contains("file")) o.file = cfg["file"].get<std::string>();
      if (cfg.contains("p")) o.p = cfg["p"].get<double>();
      if (cfg.contains("nu")) {
        o.nu = cfg["nu"].get<double>();
        o.has_nu = true;
      }
      if (cfg.contains("plan")) {
        const auto& pl = cfg["plan"];
        if (pl.contains("seed")) o.plan.seed = pl["seed"].get<std::uint64_t>();
        if (pl.contains("n_points")) o.plan.n_points = pl["n_points"].get<int>();
        if (pl.contains("n_directions"))
          o.plan.n_directions = pl["n_directions"].get<int>();
        if (pl.contains("refine_iters"))
          o.plan.refine_iters = pl["refine_iters"].get<int>();
      }
      if (cfg.contains("output")) o.out = cfg["output"].get<std::string>();
      if (cfg.contains("format")) o.format = cfg["format"].get<std::string>();
      if (cfg.contains("direction")) direction = cfg["direction"].get<std::string>();
      if (cfg.contains("mode")) mode = cfg["mode"].get<std::string>();
      if (cfg.contains("search")) search = cfg["search"].get<bool>();
    } else if (app.get_subcommands().size() == 1) {
      command = app.get_subcommands().front()->get_name();
    } else {
      std::cerr << app.help() << std::endl;
      return kExitUsage;
    }

    if (command == "check") return run_check(o);
    if (command == "angle") return run_angle(o);
    if (command == "elasticity") return run_elasticity(o);
    if (command == "shift") return run_shift(o, direction, mode);
    if (command == "oracle") return run_oracle(o, search, fields, grid_nodes);
    if (command == "sim") return run_sim(o, t_final, dt, grid_nodes);
    if (command == "region")
      return run_region(o, nu_lo, nu_hi, steps, r_lo, r_hi, r_steps);
    std::cerr << "unknown command: " << command << std::endl;
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return kExitHolds;
    }
    std::cerr << e.what() << std::endl;
    return kExitUsage;
  } catch (const PreconditionError& e) {
    std::cerr << e.what() << std::endl;
    return kExitFails;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  }
}
