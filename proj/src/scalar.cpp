#include "lpdiss/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lpdiss/refine.hpp"
#include "lpdiss/rng.hpp"

namespace lpdiss {

std::string to_string(Status s) {
  switch (s) {
    case Status::holds: return "holds";
    case Status::fails: return "fails";
    case Status::undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

constexpr std::uint64_t kDirStreamOffset = 0x00C0FFEEULL;

std::vector<double> random_unit_vector(SplitMix64& rng, int n) {
  std::vector<double> v(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& c : v) {
      c = rng.next_normal();
      norm += c * c;
    }
  } while (norm < 1e-24);
  norm = std::sqrt(norm);
  for (auto& c : v) c /= norm;
  return v;
}

struct FormsAt {
  RealMatrix re, im;
  double scale = 1.0;
};

FormsAt forms_at(const CoefficientField& f, std::span<const double> x,
                 bool require_im_symmetric, bool* re_asym_seen) {
  const ComplexMatrix a = f.eval(x);
  auto [re, im] = re_im_split(a);
  const double scale = std::max(1.0, a.max_abs_entry());
  if (require_im_symmetric) {
    for (int i = 0; i < im.m; ++i)
      for (int j = i + 1; j < im.m; ++j)
        if (std::abs(im.at(i, j) - im.at(j, i)) > 1e-10 * scale)
          throw Error("hypothesis violated: Im of the coefficient matrix is not "
                      "symmetric at a sampled point");
  }
  if (re_asym_seen && !*re_asym_seen) {
    for (int i = 0; i < re.m; ++i)
      for (int j = i + 1; j < re.m; ++j)
        if (std::abs(re.at(i, j) - re.at(j, i)) > 1e-10 * scale)
          *re_asym_seen = true;
  }
  return {std::move(re), std::move(im), scale};
}

void add_sampling_notes(const CoefficientField& f, std::vector<std::string>& notes) {
  if (!f.is_constant())
    notes.push_back("verdict holds on the sampled set only (pointwise-evaluable "
                    "field; essential extrema approximated by sampled extrema)");
  if (f.box().unbounded())
    notes.push_back("unbounded domain truncated at radius " +
                    std::to_string(f.box().truncation));
}

}  // namespace

Verdict scalar_check(const CoefficientField& f, const PExponent& p,
                     const SamplingPlan& plan) {
  plan.validate();
  const int n = f.box().n;
  if (f.m() != n)
    throw Error("scalar_check: coefficient matrix size must equal the spatial dimension");

  const double two_sqrt = 2.0 * std::sqrt(p.p - 1.0);
  const double abs_q = std::abs(p.p - 2.0);

  std::vector<std::vector<double>> xs;
  if (f.is_constant())
    xs.push_back(f.box().center());
  else
    xs = sample_points(f.box(), plan);

  bool re_asym = false;
  std::vector<FormsAt> forms;
  forms.reserve(xs.size());
  double mat_scale = 1.0;
  for (const auto& x : xs) {
    forms.push_back(forms_at(f, x, true, &re_asym));
    mat_scale = std::max(mat_scale, forms.back().scale);
  }

  auto margin_at = [&](const FormsAt& fm, std::span<const double> xi) {
    return two_sqrt * sym_form(fm.re, xi) - abs_q * std::abs(sym_form(fm.im, xi));
  };

  SplitMix64 rng(plan.seed + kDirStreamOffset);
  struct Cand {
    double value;
    std::size_t x_idx;
    std::vector<double> xi;
  };
  std::vector<Cand> cands;
  for (std::size_t ix = 0; ix < xs.size(); ++ix)
    for (int d = 0; d < plan.n_directions; ++d) {
      auto xi = random_unit_vector(rng, n);
      cands.push_back({margin_at(forms[ix], xi), ix, std::move(xi)});
    }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.value < b.value; });

  const DomainBox eff = f.box().effective();
  const bool refine_x = !f.is_constant();
  const int keep = int(std::min<std::size_t>(6, cands.size()));

  double best = cands.front().value;
  std::vector<double> best_x = xs[cands.front().x_idx];
  std::vector<double> best_xi = cands.front().xi;

  for (int c = 0; c < keep; ++c) {
    std::vector<double> params;
    std::vector<double> widths;
    RefineOptions opt;
    opt.rounds = plan.refine_iters;
    const auto& x0 = xs[cands[c].x_idx];
    if (refine_x) {
      for (int k = 0; k < n; ++k) {
        params.push_back(x0[k]);
        widths.push_back(0.125 * (eff.hi[k] - eff.lo[k]));
        opt.lo.push_back(eff.lo[k]);
        opt.hi.push_back(eff.hi[k]);
      }
    }
    for (int k = 0; k < n; ++k) {
      params.push_back(cands[c].xi[k]);
      widths.push_back(0.5);
      opt.lo.push_back(-2.0);
      opt.hi.push_back(2.0);
    }
    opt.clamp = true;

    auto objective = [&](const std::vector<double>& q) {
      std::span<const double> xq = refine_x
                                       ? std::span<const double>(q.data(), n)
                                       : std::span<const double>(x0.data(), n);
      std::span<const double> xiq(q.data() + (refine_x ? n : 0), n);
      double nrm = 0.0;
      for (double v : xiq) nrm += v * v;
      if (nrm < 1e-24) return 1e30;
      nrm = std::sqrt(nrm);
      std::vector<double> xi_unit(xiq.begin(), xiq.end());
      for (auto& v : xi_unit) v /= nrm;
      const FormsAt fm = refine_x ? forms_at(f, xq, false, nullptr)
                                  : FormsAt(forms[cands[c].x_idx]);
      return margin_at(fm, xi_unit);
    };
    const double val = coordinate_refine(objective, params, widths, opt,
                                         plan.seed + 17 * (c + 1));
    if (val < best) {
      best = val;
      if (refine_x)
        best_x.assign(params.begin(), params.begin() + n);
      else
        best_x = x0;
      best_xi.assign(params.end() - n, params.end());
      double nrm = 0.0;
      for (double v : best_xi) nrm += v * v;
      nrm = std::sqrt(nrm);
      for (auto& v : best_xi) v /= nrm;
    }
  }

  Verdict verdict;
  verdict.margin = best;
  const double tol = kBoundaryTol * (two_sqrt + abs_q) * mat_scale;
  if (best < -tol) {
    verdict.status = Status::fails;
    CheckWitness w;
    w.x = best_x;
    w.xi = best_xi;
    w.value = best;
    verdict.witness = std::move(w);
  } else {
    verdict.status = Status::holds;
    verdict.boundary = std::abs(best) <= tol;
  }
  if (re_asym)
    verdict.notes.push_back("warning: Re of the coefficient matrix is not symmetric; "
                            "the scalar criterion only constrains its quadratic form");
  add_sampling_notes(f, verdict.notes);
  return verdict;
}

ScalarLambdaBounds scalar_lambda_bounds(const CoefficientField& f,
                                        const SamplingPlan& plan) {
  plan.validate();
  const int n = f.box().n;
  if (f.m() != n)
    throw Error("scalar_lambda_bounds: matrix size must equal the spatial dimension");

  std::vector<std::vector<double>> xs;
  if (f.is_constant())
    xs.push_back(f.box().center());
  else
    xs = sample_points(f.box(), plan);

  std::vector<FormsAt> forms;
  for (const auto& x : xs) forms.push_back(forms_at(f, x, false, nullptr));

  ScalarLambdaBounds out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_positive = false;

  // quotient with the +-inf conventions on the degenerate part; returns NaN
  // for pairs outside the admissible set
  auto quotient = [&](const FormsAt& fm, std::span<const double> xi) {
    const double reF = sym_form(fm.re, xi);
    const double imF = sym_form(fm.im, xi);
    const double tol = 1e-12 * fm.scale;
    if (reF > tol) return imF / reF;
    if (std::abs(reF) <= tol) {
      if (imF > tol) return std::numeric_limits<double>::infinity();
      if (imF < -tol) return -std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::quiet_NaN();
  };

  SplitMix64 rng(plan.seed + kDirStreamOffset);
  struct Cand {
    double theta;
    std::size_t x_idx;
    std::vector<double> xi;
  };
  std::vector<Cand> stream;
  for (std::size_t ix = 0; ix < xs.size(); ++ix)
    for (int d = 0; d < plan.n_directions; ++d) {
      auto xi = random_unit_vector(rng, n);
      const double reF = sym_form(forms[ix].re, xi);
      if (reF > 1e-12 * forms[ix].scale) any_positive = true;
      const double q = quotient(forms[ix], xi);
      if (std::isnan(q)) continue;
      if (std::isinf(q)) out.degenerate_pairs = true;
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      stream.push_back({arccot(q), ix, std::move(xi)});
    }

  if (!any_positive) {
    out.xi_empty = true;
    out.lambda1 = std::numeric_limits<double>::infinity();
    out.lambda2 = -std::numeric_limits<double>::infinity();
    return out;
  }

  // refine both extrema in arccot space (bounded, monotone in the quotient)
  auto refine_extremum = [&](bool maximize_quotient) {
    auto by_theta = stream;
    std::sort(by_theta.begin(), by_theta.end(), [&](const Cand& a, const Cand& b) {
      return maximize_quotient ? a.theta < b.theta : a.theta > b.theta;
    });
    const int keep = int(std::min<std::size_t>(4, by_theta.size()));
    double best_q = maximize_quotient ? hi : lo;
    const DomainBox eff = f.box().effective();
    const bool refine_x = !f.is_constant();
    for (int c = 0; c < keep; ++c) {
      std::vector<double> params;
      std::vector<double> widths;
      RefineOptions opt;
      opt.rounds = plan.refine_iters;
      opt.clamp = true;
      const auto& x0 = xs[by_theta[c].x_idx];
      if (refine_x)
        for (int k = 0; k < n; ++k) {
          params.push_back(x0[k]);
          widths.push_back(0.125 * (eff.hi[k] - eff.lo[k]));
          opt.lo.push_back(eff.lo[k]);
          opt.hi.push_back(eff.hi[k]);
        }
      for (int k = 0; k < n; ++k) {
        params.push_back(by_theta[c].xi[k]);
        widths.push_back(0.5);
        opt.lo.push_back(-2.0);
        opt.hi.push_back(2.0);
      }
      auto objective = [&](const std::vector<double>& qv) {
        std::span<const double> xq = refine_x
                                         ? std::span<const double>(qv.data(), n)
                                         : std::span<const double>(x0.data(), n);
        std::span<const double> xiq(qv.data() + (refine_x ? n : 0), n);
        double nrm = 0.0;
        for (double v : xiq) nrm += v * v;
        if (nrm < 1e-24) return 10.0;
        nrm = std::sqrt(nrm);
        std::vector<double> xi_unit(xiq.begin(), xiq.end());
        for (auto& v : xi_unit) v /= nrm;
        const FormsAt fm = refine_x ? forms_at(f, xq, false, nullptr)
                                    : FormsAt(forms[by_theta[c].x_idx]);
        const double q = quotient(fm, xi_unit);
        if (std::isnan(q)) return 10.0;  // outside the admissible set
        if (!std::isnan(q)) {
          if (maximize_quotient)
            best_q = std::max(best_q, q);
          else
            best_q = std::min(best_q, q);
        }
        const double theta = arccot(q);
        return maximize_quotient ? theta : (std::numbers::pi - theta);
      };
      coordinate_refine(objective, params, widths, opt, plan.seed + 31 * (c + 1));
    }
    return best_q;
  };

  out.lambda2 = refine_extremum(true);
  out.lambda1 = refine_extremum(false);
  return out;
}

ScalarAngleReport scalar_angle(const CoefficientField& f, const PExponent& p,
                               const SamplingPlan& plan) {
  Verdict base = scalar_check(f, p, plan);
  if (base.status == Status::fails) throw PreconditionError(std::move(base));

  const ScalarLambdaBounds lb = scalar_lambda_bounds(f, plan);
  ScalarAngleReport rep;
  rep.lambda1 = lb.lambda1;
  rep.lambda2 = lb.lambda2;
  rep.xi_empty = lb.xi_empty;
  rep.notes = base.notes;
  if (lb.degenerate_pairs)
    rep.notes.push_back("degenerate direction pairs (vanishing real form) present; "
                        "quotient extrema follow the +-inf conventions");

  const double pi = std::numbers::pi;
  if (std::abs(p.p - 2.0) < 1e-12) {
    rep.interval.theta_minus = arccot(rep.lambda1) - pi;
    rep.interval.theta_plus = arccot(rep.lambda2);
    return rep;
  }

  const double s = std::sqrt(p.p - 1.0);
  const double aq = std::abs(p.p - 2.0);
  const double p2 = p.p * p.p;
  {
    const double den = 2.0 * s + aq * rep.lambda1;
    rep.interval.theta_minus =
        den <= 0.0 ? 0.0 : arccot(2.0 * s / aq - (p2 / aq) / den) - pi;
  }
  {
    const double den = 2.0 * s - aq * rep.lambda2;
    rep.interval.theta_plus =
        den <= 0.0 ? 0.0 : arccot(-2.0 * s / aq + (p2 / aq) / den);
  }
  return rep;
}

AngleInterval real_scalar_angle(const PExponent& p) {
  AngleInterval out;
  const double half_pi = 0.5 * std::numbers::pi;
  if (std::abs(p.p - 2.0) < 1e-12) {
    out.theta_minus = -half_pi;
    out.theta_plus = half_pi;
    return out;
  }
  const double a = std::atan(2.0 * std::sqrt(p.p - 1.0) / std::abs(p.p - 2.0));
  out.theta_minus = -a;
  out.theta_plus = a;
  return out;
}

}  // namespace lpdiss
