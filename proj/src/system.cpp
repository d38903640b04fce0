#include "lpdiss/system.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "lpdiss/refine.hpp"
#include "lpdiss/rng.hpp"

namespace lpdiss {

PQValue pq_values(const ComplexMatrix& a, const PExponent& p,
                  std::span<const Complex> lambda, std::span<const Complex> omega) {
  const int m = a.dim();
  if (int(lambda.size()) != m || int(omega.size()) != m)
    throw Error("pq_values: vector length does not match matrix dimension");
  double wnorm = 0.0;
  for (const Complex& w : omega) wnorm += std::norm(w);
  wnorm = std::sqrt(wnorm);
  if (std::abs(wnorm - 1.0) > 1e-12)
    throw Error("pq_values: omega must be a unit vector");

  const Complex all = herm_form(a, lambda, lambda);
  const Complex aww = herm_form(a, omega, omega);
  const Complex awl = herm_form(a, omega, lambda);
  const Complex alw = herm_form(a, lambda, omega);
  double re_lw = 0.0;
  for (int j = 0; j < m; ++j) re_lw += (lambda[j] * std::conj(omega[j])).real();

  const double t = p.t();
  const Complex commut = awl - alw;
  PQValue out;
  out.p_val = all.real() - p.cp * aww.real() * re_lw * re_lw - t * commut.real() * re_lw;
  out.q_val = all.imag() - p.cp * aww.imag() * re_lw * re_lw - t * commut.imag() * re_lw;
  return out;
}

namespace {

constexpr std::uint64_t kDirStreamOffset = 0x00C0FFEEULL;

void check_fields(const std::vector<CoefficientField>& fields) {
  if (fields.empty()) throw Error("system: no coefficient fields given");
  const int m = fields.front().m();
  const DomainBox& box = fields.front().box();
  for (const auto& f : fields) {
    if (f.m() != m) throw Error("system: coefficient fields differ in matrix size");
    if (f.box().n != box.n) throw Error("system: coefficient fields differ in domain dimension");
  }
}

bool all_constant(const std::vector<CoefficientField>& fields) {
  for (const auto& f : fields)
    if (!f.is_constant()) return false;
  return true;
}

std::vector<Complex> random_unit_cvector(SplitMix64& rng, int m) {
  std::vector<Complex> v(m);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& c : v) {
      c = Complex(rng.next_normal(), rng.next_normal());
      norm += std::norm(c);
    }
  } while (norm < 1e-24);
  norm = std::sqrt(norm);
  for (auto& c : v) c /= norm;
  return v;
}

std::vector<Complex> unpack_unit(std::span<const double> raw, int m, bool* ok) {
  std::vector<Complex> v(m);
  double norm = 0.0;
  for (int j = 0; j < m; ++j) {
    v[j] = Complex(raw[2 * j], raw[2 * j + 1]);
    norm += std::norm(v[j]);
  }
  if (norm < 1e-24) {
    *ok = false;
    return v;
  }
  *ok = true;
  norm = std::sqrt(norm);
  for (auto& c : v) c /= norm;
  return v;
}

double field_scale(const std::vector<CoefficientField>& fields,
                   const std::vector<std::vector<double>>& xs) {
  double s = 1.0;
  for (const auto& f : fields)
    for (const auto& x : xs) s = std::max(s, f.eval(x).max_abs_entry());
  return s;
}

std::vector<std::vector<double>> spatial_samples(const std::vector<CoefficientField>& fields,
                                                 const SamplingPlan& plan) {
  const DomainBox& box = fields.front().box();
  if (all_constant(fields)) return {box.center()};
  return sample_points(box.effective(), plan);
}

/// Sampled + refined minimum of the direction form for one field; the
/// objective receives the matrix at x plus the normalized pair.
struct DirectionMin {
  double value = 0.0;
  std::vector<double> x;
  std::vector<Complex> lambda, omega;
};

DirectionMin minimize_pair_form(
    const CoefficientField& field, const SamplingPlan& plan,
    const std::vector<std::vector<double>>& xs,
    const std::function<double(const ComplexMatrix&, std::span<const Complex>,
                               std::span<const Complex>)>& objective,
    std::uint64_t stream_salt) {
  const int m = field.m();
  const int n = field.box().n;
  const bool refine_x = !field.is_constant();
  const DomainBox eff = field.box().effective();

  std::vector<ComplexMatrix> mats;
  mats.reserve(xs.size());
  for (const auto& x : xs) mats.push_back(field.eval(x));

  SplitMix64 rng(plan.seed + kDirStreamOffset + stream_salt);
  struct Cand {
    double value;
    std::size_t x_idx;
    std::vector<Complex> lambda, omega;
  };
  std::vector<Cand> cands;
  cands.reserve(xs.size() * std::size_t(plan.n_directions));
  for (std::size_t ix = 0; ix < xs.size(); ++ix)
    for (int d = 0; d < plan.n_directions; ++d) {
      auto lam = random_unit_cvector(rng, m);
      auto om = random_unit_cvector(rng, m);
      cands.push_back({objective(mats[ix], lam, om), ix, std::move(lam), std::move(om)});
    }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.value < b.value; });

  DirectionMin best;
  best.value = cands.front().value;
  best.x = xs[cands.front().x_idx];
  best.lambda = cands.front().lambda;
  best.omega = cands.front().omega;

  const int keep = int(std::min<std::size_t>(8, cands.size()));
  for (int c = 0; c < keep; ++c) {
    std::vector<double> params;
    std::vector<double> widths;
    RefineOptions opt;
    opt.rounds = plan.refine_iters;
    opt.clamp = true;
    const auto& x0 = xs[cands[c].x_idx];
    if (refine_x)
      for (int k = 0; k < n; ++k) {
        params.push_back(x0[k]);
        widths.push_back(0.125 * (eff.hi[k] - eff.lo[k]));
        opt.lo.push_back(eff.lo[k]);
        opt.hi.push_back(eff.hi[k]);
      }
    for (int j = 0; j < m; ++j) {
      params.push_back(cands[c].lambda[j].real());
      params.push_back(cands[c].lambda[j].imag());
    }
    for (int j = 0; j < m; ++j) {
      params.push_back(cands[c].omega[j].real());
      params.push_back(cands[c].omega[j].imag());
    }
    for (std::size_t k = (refine_x ? n : 0); k < params.size(); ++k) {
      widths.push_back(0.6);
      opt.lo.push_back(-3.0);
      opt.hi.push_back(3.0);
    }

    auto eval = [&](const std::vector<double>& q) {
      const std::size_t off = refine_x ? n : 0;
      bool ok_l = false, ok_w = false;
      auto lam = unpack_unit(std::span<const double>(q.data() + off, 2 * m), m, &ok_l);
      auto om = unpack_unit(std::span<const double>(q.data() + off + 2 * m, 2 * m), m, &ok_w);
      if (!ok_l || !ok_w) return 1e30;
      if (refine_x) {
        const ComplexMatrix a = field.eval(std::span<const double>(q.data(), n));
        return objective(a, lam, om);
      }
      return objective(mats[cands[c].x_idx], lam, om);
    };
    const double val = coordinate_refine(eval, params, widths, opt,
                                         plan.seed + stream_salt + 101 * (c + 1));
    if (val < best.value) {
      best.value = val;
      if (refine_x)
        best.x.assign(params.begin(), params.begin() + n);
      else
        best.x = x0;
      const std::size_t off = refine_x ? n : 0;
      bool ok = false;
      best.lambda = unpack_unit(std::span<const double>(params.data() + off, 2 * m), m, &ok);
      best.omega =
          unpack_unit(std::span<const double>(params.data() + off + 2 * m, 2 * m), m, &ok);
    }
  }
  return best;
}

void add_field_notes(const std::vector<CoefficientField>& fields, Verdict& v) {
  if (!all_constant(fields))
    v.notes.push_back("verdict holds on the sampled set only (essential extrema "
                      "approximated by sampled extrema)");
  if (fields.front().box().unbounded())
    v.notes.push_back("unbounded domain truncated at radius " +
                      std::to_string(fields.front().box().truncation));
}

}  // namespace

SystemVerdict system_check(const std::vector<CoefficientField>& fields,
                           const PExponent& p, const SamplingPlan& plan) {
  plan.validate();
  check_fields(fields);
  const auto xs = spatial_samples(fields, plan);
  const double scale = field_scale(fields, xs);
  const double tol = kBoundaryTol * (1.0 + p.cp + 2.0 * std::abs(p.t())) * scale;

  auto objective = [&p](const ComplexMatrix& a, std::span<const Complex> lam,
                        std::span<const Complex> om) {
    return pq_values(a, p, lam, om).p_val;
  };

  SystemVerdict out;
  out.overall.status = Status::holds;
  out.overall.margin = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < fields.size(); ++h) {
    const DirectionMin mn =
        minimize_pair_form(fields[h], plan, xs, objective, 7919 * (h + 1));
    Verdict vh;
    vh.margin = mn.value;
    if (mn.value < -tol) {
      vh.status = Status::fails;
      CheckWitness w;
      w.h = int(h);
      w.x = mn.x;
      w.lambda = mn.lambda;
      w.omega = mn.omega;
      w.value = mn.value;
      vh.witness = std::move(w);
    } else {
      vh.status = Status::holds;
      vh.boundary = std::abs(mn.value) <= tol;
    }
    if (vh.margin < out.overall.margin) {
      out.overall.margin = vh.margin;
      out.overall.status = vh.status;
      out.overall.boundary = vh.boundary;
      out.overall.witness = vh.witness;
    }
    out.per_h.push_back(std::move(vh));
  }
  add_field_notes(fields, out.overall);
  return out;
}

namespace {

struct EigenAt {
  double mu1, mum;
  double tr, det;
};

EigenAt real_sym_eigs_at(const CoefficientField& f, std::span<const double> x,
                         int h, bool require_psd) {
  const ComplexMatrix a = f.eval(x);
  auto [re, im] = re_im_split(a);
  const double scale = std::max(1.0, a.max_abs_entry());
  auto where = [&] {
    std::ostringstream os;
    os << "direction h=" << h + 1 << " at x=(";
    for (std::size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << x[k];
    os << ")";
    return os.str();
  };
  if (im.max_abs_entry() > 1e-10 * scale)
    throw Error("coefficient matrix is not real for " + where());
  EigenSpectrum sp = sym_eigs(re);  // errors if asymmetric
  if (require_psd && sp.values.front() < -1e-10 * scale)
    throw Error("coefficient matrix is indefinite for " + where());
  EigenAt out;
  out.mu1 = sp.values.front();
  out.mum = sp.values.back();
  out.tr = 0.0;
  for (int i = 0; i < re.m; ++i) out.tr += re.at(i, i);
  out.det = re.m == 2 ? re.at(0, 0) * re.at(1, 1) - re.at(0, 1) * re.at(1, 0) : 0.0;
  return out;
}

/// Sampled + refined extremum over x of a scalar function of one field.
double extremize_over_x(const CoefficientField& f, const SamplingPlan& plan,
                        const std::function<double(std::span<const double>)>& g,
                        bool minimize, double trunc_override = -1.0) {
  DomainBox b = f.box();
  if (trunc_override > 0) b.truncation = trunc_override;
  const DomainBox eff = b.effective();
  if (f.is_constant()) return g(eff.center());

  SamplingPlan xplan = plan;
  xplan.seed = plan.seed + 0xA11CE;
  const auto xs = sample_points(eff, xplan);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> argbest = xs.front();
  for (const auto& x : xs) {
    const double v = minimize ? g(x) : -g(x);
    if (v < best) {
      best = v;
      argbest = x;
    }
  }
  std::vector<double> widths;
  RefineOptions opt;
  opt.rounds = plan.refine_iters;
  opt.clamp = true;
  for (int k = 0; k < eff.n; ++k) {
    widths.push_back(0.25 * (eff.hi[k] - eff.lo[k]));
    opt.lo.push_back(eff.lo[k]);
    opt.hi.push_back(eff.hi[k]);
  }
  auto obj = [&](const std::vector<double>& x) { return minimize ? g(x) : -g(x); };
  const double val = coordinate_refine(obj, argbest, widths, opt, plan.seed + 0xF00D);
  best = std::min(best, val);
  return minimize ? best : -best;
}

struct TruncatedExtremum {
  double value = 0.0;
  double raw_at_full = 0.0;  // unextrapolated extremum at the full radius
  bool divergent = false;
  std::vector<std::string> notes;
};

/// Extremum over an unbounded domain: evaluated at truncations T/4, T/2, T
/// and geometrically extrapolated when the differences contract; flagged
/// divergent when they do not.
TruncatedExtremum truncated_extremum(const CoefficientField& f, const SamplingPlan& plan,
                                     const std::function<double(std::span<const double>)>& g,
                                     bool minimize) {
  TruncatedExtremum out;
  if (!f.box().unbounded()) {
    out.value = extremize_over_x(f, plan, g, minimize);
    out.raw_at_full = out.value;
    return out;
  }
  const double t = f.box().truncation;
  const double v1 = extremize_over_x(f, plan, g, minimize, t / 4.0);
  const double v2 = extremize_over_x(f, plan, g, minimize, t / 2.0);
  const double v3 = extremize_over_x(f, plan, g, minimize, t);
  out.raw_at_full = v3;
  const double d1 = v2 - v1, d2 = v3 - v2;
  std::ostringstream os;
  os << "truncation refinement at radii " << t / 4 << ", " << t / 2 << ", " << t
     << ": values " << v1 << ", " << v2 << ", " << v3;
  out.notes.push_back(os.str());
  const double scale = std::max({1.0, std::abs(v1), std::abs(v3)});
  if (std::abs(d2) <= 1e-9 * scale) {
    out.value = v3;
  } else if (std::abs(d1) > 0.0 && std::abs(d2) < 0.9 * std::abs(d1)) {
    const double r = d2 / d1;
    out.value = v3 + d2 * r / (1.0 - r);
    out.notes.push_back("extremum extrapolated geometrically to the untruncated domain");
  } else {
    out.value = v3;
    out.divergent = true;
    out.notes.push_back("extremum kept moving under truncation refinement "
                        "(suspected unbounded)");
  }
  return out;
}

}  // namespace

SystemVerdict sym_system_check(const std::vector<CoefficientField>& fields,
                               const PExponent& p, const SamplingPlan& plan) {
  plan.validate();
  check_fields(fields);
  const double half_diff = 0.5 - 1.0 / p.p;
  const double c2 = half_diff * half_diff;

  SystemVerdict out;
  out.overall.status = Status::holds;
  out.overall.margin = std::numeric_limits<double>::infinity();
  const int m = fields.front().m();

  for (std::size_t h = 0; h < fields.size(); ++h) {
    auto margin_fn = [&](std::span<const double> x) {
      const EigenAt e = real_sym_eigs_at(fields[h], x, int(h), true);
      const double sum = e.mu1 + e.mum;
      const double margin = e.mu1 * e.mum - c2 * sum * sum;
      if (m == 2) {
        // trace/determinant form must match the eigenvalue form
        const double alt = e.det - c2 * e.tr * e.tr;
        const double sc = std::max({1.0, std::abs(margin), std::abs(alt)});
        if (std::abs(alt - margin) > 1e-10 * sc)
          throw Error("sym_system_check: trace/determinant cross-check failed");
      }
      return margin;
    };
    const double margin = extremize_over_x(fields[h], plan, margin_fn, true);
    const std::vector<double> xc = fields[h].box().center();
    const double scale =
        std::max(1.0, fields[h].eval(xc).max_abs_entry());
    const double tol = kBoundaryTol * scale * scale;

    Verdict vh;
    vh.margin = margin;
    if (margin < -tol) {
      vh.status = Status::fails;
      CheckWitness w;
      w.h = int(h);
      w.value = margin;
      vh.witness = std::move(w);
    } else {
      vh.status = Status::holds;
      vh.boundary = std::abs(margin) <= tol;
    }
    if (vh.margin < out.overall.margin) {
      out.overall.margin = vh.margin;
      out.overall.status = vh.status;
      out.overall.boundary = vh.boundary;
      out.overall.witness = vh.witness;
    }
    out.per_h.push_back(std::move(vh));
  }
  add_field_notes(fields, out.overall);
  return out;
}

PInterval sym_p_interval(double mu1, double mum) {
  if (mu1 < 0.0) throw Error("sym_p_interval: smallest eigenvalue must be >= 0");
  if (mum < mu1) throw Error("sym_p_interval: eigenvalues must be ascending");
  PInterval out;
  if (mu1 == 0.0) {
    out.p_lo = out.p_hi = 2.0;
    return out;
  }
  const double b = std::sqrt(mu1 * mum) / (mu1 + mum);
  if (b >= 0.5) {  // equal eigenvalues: the full open range (1, inf)
    out.p_lo = 1.0;
    out.p_hi = std::numeric_limits<double>::infinity();
    out.closed_lo = out.closed_hi = false;
    return out;
  }
  out.p_lo = 1.0 / (0.5 + b);
  out.p_hi = 1.0 / (0.5 - b);
  return out;
}

Verdict positivity_necessary(const std::vector<CoefficientField>& fields,
                             const SamplingPlan& plan) {
  plan.validate();
  check_fields(fields);
  const auto xs = spatial_samples(fields, plan);
  const double scale = field_scale(fields, xs);

  auto objective = [](const ComplexMatrix& a, std::span<const Complex> lam,
                      std::span<const Complex>) {
    return herm_form(a, lam, lam).real();
  };

  Verdict out;
  out.status = Status::holds;
  out.margin = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < fields.size(); ++h) {
    const DirectionMin mn =
        minimize_pair_form(fields[h], plan, xs, objective, 104729 * (h + 1));
    if (mn.value < out.margin) {
      out.margin = mn.value;
      CheckWitness w;
      w.h = int(h);
      w.x = mn.x;
      w.lambda = mn.lambda;
      w.value = mn.value;
      out.witness = std::move(w);
    }
  }
  const double tol = kBoundaryTol * scale;
  if (out.margin < -tol) {
    out.status = Status::fails;
  } else {
    out.status = Status::holds;
    out.boundary = std::abs(out.margin) <= tol;
    if (!out.boundary) out.witness.reset();
  }
  out.notes.push_back("necessary condition only");
  add_field_notes(fields, out);
  return out;
}

namespace {

bool fields_real_symmetric(const std::vector<CoefficientField>& fields,
                           const SamplingPlan& plan) {
  SamplingPlan probe = plan;
  probe.n_points = std::min(plan.n_points, 16);
  for (const auto& f : fields) {
    const auto xs = f.is_constant() ? std::vector<std::vector<double>>{f.box().center()}
                                    : sample_points(f.box(), probe);
    for (const auto& x : xs) {
      const ComplexMatrix a = f.eval(x);
      auto [re, im] = re_im_split(a);
      const double scale = std::max(1.0, a.max_abs_entry());
      if (im.max_abs_entry() > 1e-10 * scale) return false;
      for (int i = 0; i < re.m; ++i)
        for (int j = i + 1; j < re.m; ++j)
          if (std::abs(re.at(i, j) - re.at(j, i)) > 1e-10 * scale) return false;
    }
  }
  return true;
}

}  // namespace

ShiftReport shift_lower_bound(const std::vector<CoefficientField>& fields,
                              const PExponent& p, const SamplingPlan& plan,
                              ShiftMode mode) {
  plan.validate();
  check_fields(fields);
  ShiftReport out;
  const double s_half = 0.5 * p.sqrt_pp();
  const double half_diff = 0.5 - 1.0 / p.p;
  const double c2 = half_diff * half_diff;

  if (fields_real_symmetric(fields, plan)) {
    double inf = std::numeric_limits<double>::infinity();
    double raw = std::numeric_limits<double>::infinity();
    bool divergent = false;
    for (std::size_t h = 0; h < fields.size(); ++h) {
      auto expr = [&](std::span<const double> x) {
        const EigenAt e =
            real_sym_eigs_at(fields[h], x, int(h), mode == ShiftMode::psd_variant);
        if (mode == ShiftMode::psd_variant) {
          const double sum = e.mu1 + e.mum;
          return e.mu1 * e.mum - c2 * sum * sum;
        }
        return (1.0 + s_half) * e.mu1 + (1.0 - s_half) * e.mum;
      };
      const TruncatedExtremum ex = truncated_extremum(fields[h], plan, expr, true);
      inf = std::min(inf, ex.value);
      raw = std::min(raw, ex.raw_at_full);
      divergent = divergent || ex.divergent;
      for (const auto& n : ex.notes) out.notes.push_back(n);
    }
    out.criterion_value = inf;
    out.value_at_truncation = raw;
    out.divergent = divergent;
    if (mode == ShiftMode::any_k) {
      out.exists = !(divergent && inf < 0.0);
      out.notes.push_back("criterion: sampled infimum > -inf");
      return out;
    }
    const double tol = kBoundaryTol * std::max(1.0, std::abs(inf));
    out.exists = inf > tol && !divergent;
    if (out.exists)
      out.k_sup = mode == ShiftMode::psd_variant
                      ? 0.5 * std::sqrt(p.p * p.p_conj * inf)
                      : 0.5 * inf;
    if (mode == ShiftMode::psd_variant) {
      // converse direction needs a uniform upper bound on the top eigenvalue
      double supmu = -std::numeric_limits<double>::infinity();
      bool sup_divergent = false;
      for (std::size_t h = 0; h < fields.size(); ++h) {
        auto topeig = [&](std::span<const double> x) {
          return real_sym_eigs_at(fields[h], x, int(h), false).mum;
        };
        const TruncatedExtremum ex = truncated_extremum(fields[h], plan, topeig, false);
        supmu = std::max(supmu, ex.value);
        sup_divergent = sup_divergent || ex.divergent;
      }
      std::ostringstream os;
      os << "boundedness check: sup of the largest eigenvalue "
         << (sup_divergent ? "is unbounded under truncation refinement; the "
                             "converse implication is not applicable"
                           : "= " + std::to_string(supmu));
      out.notes.push_back(os.str());
    }
    return out;
  }

  // general complex fields: sampled infimum of the direction form over
  // |lambda| = |omega| = 1
  const auto xs = spatial_samples(fields, plan);
  auto objective = [&p](const ComplexMatrix& a, std::span<const Complex> lam,
                        std::span<const Complex> om) {
    return pq_values(a, p, lam, om).p_val;
  };
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < fields.size(); ++h) {
    const DirectionMin mn =
        minimize_pair_form(fields[h], plan, xs, objective, 2557 * (h + 1));
    inf = std::min(inf, mn.value);
  }
  out.criterion_value = inf;
  out.value_at_truncation = inf;
  if (mode == ShiftMode::any_k) {
    out.exists = std::isfinite(inf);
    out.notes.push_back("criterion: sampled infimum > -inf");
  } else {
    out.exists = inf > kBoundaryTol * std::max(1.0, std::abs(inf));
    out.notes.push_back("general-coefficient path: no closed-form largest shift");
  }
  if (fields.front().box().unbounded())
    out.notes.push_back("unbounded domain truncated at radius " +
                        std::to_string(fields.front().box().truncation));
  return out;
}

ShiftReport shift_upper_bound(const std::vector<CoefficientField>& fields,
                              const PExponent& p, const SamplingPlan& plan) {
  plan.validate();
  check_fields(fields);
  if (!fields_real_symmetric(fields, plan))
    throw Error("shift_upper_bound: requires real symmetric coefficient fields");
  ShiftReport out;
  const double s_half = 0.5 * p.sqrt_pp();

  double sup = -std::numeric_limits<double>::infinity();
  double raw_sup = -std::numeric_limits<double>::infinity();
  bool divergent = false;
  bool psd = true;
  double supmu = -std::numeric_limits<double>::infinity();
  bool supmu_divergent = false;
  for (std::size_t h = 0; h < fields.size(); ++h) {
    auto expr = [&](std::span<const double> x) {
      const EigenAt e = real_sym_eigs_at(fields[h], x, int(h), false);
      return (1.0 - s_half) * e.mu1 + (1.0 + s_half) * e.mum;
    };
    const TruncatedExtremum ex = truncated_extremum(fields[h], plan, expr, false);
    sup = std::max(sup, ex.value);
    raw_sup = std::max(raw_sup, ex.raw_at_full);
    divergent = divergent || ex.divergent;
    for (const auto& n : ex.notes) out.notes.push_back(n);

    auto mu1_fn = [&](std::span<const double> x) {
      return real_sym_eigs_at(fields[h], x, int(h), false).mu1;
    };
    psd = psd && extremize_over_x(fields[h], plan, mu1_fn, true) >= -1e-10;
    auto topeig = [&](std::span<const double> x) {
      return real_sym_eigs_at(fields[h], x, int(h), false).mum;
    };
    const TruncatedExtremum mx = truncated_extremum(fields[h], plan, topeig, false);
    supmu = std::max(supmu, mx.value);
    supmu_divergent = supmu_divergent || mx.divergent;
  }
  out.criterion_value = sup;
  out.value_at_truncation = raw_sup;
  out.divergent = divergent;
  out.exists = !divergent;
  if (psd) {
    std::ostringstream os;
    os << "PSD fields: equivalent test sup of the largest eigenvalue "
       << (supmu_divergent ? std::string("diverges") : "= " + std::to_string(supmu));
    out.notes.push_back(os.str());
    out.exists = out.exists && !supmu_divergent;
  }
  return out;
}

double sphere_product_max(std::span<const double> mu) {
  if (mu.empty()) throw Error("sphere_product_max: empty vector");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0.0) throw Error("sphere_product_max: entries must be positive");
    if (i > 0 && mu[i] < mu[i - 1])
      throw Error("sphere_product_max: entries must be ascending");
  }
  const double mu1 = mu.front(), mum = mu.back();
  const double sum = mu1 + mum;
  return sum * sum / (4.0 * mu1 * mum);
}

AngleInterval system_angle(const std::vector<CoefficientField>& fields,
                           const PExponent& p, const SamplingPlan& plan) {
  plan.validate();
  check_fields(fields);
  {
    SystemVerdict base = system_check(fields, p, plan);
    if (base.overall.status == Status::fails)
      throw PreconditionError(std::move(base.overall));
  }

  const int m = fields.front().m();
  const int n = fields.front().box().n;
  const auto xs = spatial_samples(fields, plan);
  const double scale = field_scale(fields, xs);
  const double tol_p = 2.0 * kBoundaryTol * (1.0 + p.cp + 2.0 * std::abs(p.t())) * scale;
  const double pi = std::numbers::pi;

  AngleInterval combined;
  combined.theta_minus = -pi;
  combined.theta_plus = pi;

  for (std::size_t h = 0; h < fields.size(); ++h) {
    const CoefficientField& f = fields[h];
    std::vector<ComplexMatrix> mats;
    for (const auto& x : xs) mats.push_back(f.eval(x));

    // quotient theta = arccot(q/p) with the +-inf conventions; NaN when the
    // pair is outside the admissible set
    auto theta_of = [&](const ComplexMatrix& a, std::span<const Complex> lam,
                        std::span<const Complex> om) -> double {
      const PQValue pq = pq_values(a, p, lam, om);
      if (pq.p_val < -tol_p) {
        Verdict v;
        v.status = Status::fails;
        v.margin = pq.p_val;
        CheckWitness w;
        w.h = int(h);
        w.lambda.assign(lam.begin(), lam.end());
        w.omega.assign(om.begin(), om.end());
        w.value = pq.p_val;
        v.witness = std::move(w);
        throw PreconditionError(std::move(v));
      }
      if (pq.p_val <= tol_p) {
        if (pq.q_val > tol_p) return 0.0;        // quotient +inf
        if (pq.q_val < -tol_p) return pi;        // quotient -inf
        return std::numeric_limits<double>::quiet_NaN();
      }
      return arccot(pq.q_val / pq.p_val);
    };

    SplitMix64 rng(plan.seed + kDirStreamOffset + 9176 * (h + 1));
    struct Cand {
      double theta;
      std::size_t x_idx;
      std::vector<Complex> lambda, omega;
    };
    std::vector<Cand> stream;
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
      for (int d = 0; d < plan.n_directions; ++d) {
        auto lam = random_unit_cvector(rng, m);
        auto om = random_unit_cvector(rng, m);
        const double th = theta_of(mats[ix], lam, om);
        if (std::isnan(th)) continue;
        stream.push_back({th, ix, std::move(lam), std::move(om)});
      }

    if (stream.empty()) continue;  // empty admissible set: no constraint from h

    const bool refine_x = !f.is_constant();
    const DomainBox eff = f.box().effective();

    auto refine_theta = [&](bool minimize_theta) {
      auto by = stream;
      std::sort(by.begin(), by.end(), [&](const Cand& a, const Cand& b) {
        return minimize_theta ? a.theta < b.theta : a.theta > b.theta;
      });
      double best = by.front().theta;
      const int keep = int(std::min<std::size_t>(4, by.size()));
      for (int c = 0; c < keep; ++c) {
        std::vector<double> params;
        std::vector<double> widths;
        RefineOptions opt;
        opt.rounds = plan.refine_iters;
        opt.clamp = true;
        const auto& x0 = xs[by[c].x_idx];
        if (refine_x)
          for (int k = 0; k < n; ++k) {
            params.push_back(x0[k]);
            widths.push_back(0.125 * (eff.hi[k] - eff.lo[k]));
            opt.lo.push_back(eff.lo[k]);
            opt.hi.push_back(eff.hi[k]);
          }
        for (int j = 0; j < m; ++j) {
          params.push_back(by[c].lambda[j].real());
          params.push_back(by[c].lambda[j].imag());
        }
        for (int j = 0; j < m; ++j) {
          params.push_back(by[c].omega[j].real());
          params.push_back(by[c].omega[j].imag());
        }
        for (std::size_t k = (refine_x ? n : 0); k < params.size(); ++k) {
          widths.push_back(0.6);
          opt.lo.push_back(-3.0);
          opt.hi.push_back(3.0);
        }
        auto eval = [&](const std::vector<double>& q) {
          const std::size_t off = refine_x ? n : 0;
          bool ok_l = false, ok_w = false;
          auto lam = unpack_unit(std::span<const double>(q.data() + off, 2 * m), m, &ok_l);
          auto om =
              unpack_unit(std::span<const double>(q.data() + off + 2 * m, 2 * m), m, &ok_w);
          if (!ok_l || !ok_w) return 100.0;
          const ComplexMatrix a =
              refine_x ? f.eval(std::span<const double>(q.data(), n)) : mats[by[c].x_idx];
          const double th = theta_of(a, lam, om);
          if (std::isnan(th)) return 100.0;
          return minimize_theta ? th : -th;
        };
        const double v = coordinate_refine(eval, params, widths, opt,
                                           plan.seed + 771 * (c + 1) + h);
        if (minimize_theta)
          best = std::min(best, v);
        else
          best = std::max(best, -v);
      }
      return best;
    };

    const double theta_min = refine_theta(true);   // arccot of the quotient sup
    const double theta_max = refine_theta(false);  // arccot of the quotient inf
    AngleInterval ih;
    ih.theta_minus = theta_max - pi;
    ih.theta_plus = theta_min;
    combined = intersect(combined, ih);
  }
  return combined;
}

Verdict general2d_necessary(const std::vector<CoefficientField>& fields,
                            const PExponent& p, const SamplingPlan& plan) {
  plan.validate();
  if (fields.size() != 4)
    throw Error("general2d_necessary: expected the 2 x 2 block array of fields");
  check_fields(fields);
  if (fields.front().box().n != 2)
    throw Error("general2d_necessary: the domain must be two-dimensional");
  const int m = fields.front().m();
  const auto xs = spatial_samples(fields, plan);
  const double scale = field_scale(fields, xs);
  const double tol = kBoundaryTol * (1.0 + p.cp + 2.0 * std::abs(p.t())) * scale;

  std::vector<std::vector<ComplexMatrix>> blocks(xs.size());
  for (std::size_t ix = 0; ix < xs.size(); ++ix)
    for (int b = 0; b < 4; ++b) blocks[ix].push_back(fields[b].eval(xs[ix]));

  auto contracted = [&](const std::vector<ComplexMatrix>& blk, double phi) {
    const double xi[2] = {std::cos(phi), std::sin(phi)};
    ComplexMatrix mx(m);
    for (int hh = 0; hh < 2; ++hh)
      for (int kk = 0; kk < 2; ++kk) {
        const double w = xi[hh] * xi[kk];
        const ComplexMatrix& a = blk[2 * hh + kk];
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) mx.at(i, j) += w * a.at(i, j);
      }
    return mx;
  };

  SplitMix64 rng(plan.seed + kDirStreamOffset + 0xBEEF);
  struct Cand {
    double value;
    std::size_t x_idx;
    double phi;
    std::vector<Complex> lambda, omega;
  };
  std::vector<Cand> cands;
  for (std::size_t ix = 0; ix < xs.size(); ++ix)
    for (int d = 0; d < plan.n_directions; ++d) {
      const double phi = rng.next_double() * 2.0 * std::numbers::pi;
      auto lam = random_unit_cvector(rng, m);
      auto om = random_unit_cvector(rng, m);
      const double v = pq_values(contracted(blocks[ix], phi), p, lam, om).p_val;
      cands.push_back({v, ix, phi, std::move(lam), std::move(om)});
    }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.value < b.value; });

  const bool refine_x = !all_constant(fields);
  const DomainBox eff = fields.front().box().effective();
  double best = cands.front().value;
  Cand best_c = cands.front();
  std::vector<double> best_x = xs[best_c.x_idx];

  const int keep = int(std::min<std::size_t>(8, cands.size()));
  for (int c = 0; c < keep; ++c) {
    std::vector<double> params;
    std::vector<double> widths;
    RefineOptions opt;
    opt.rounds = plan.refine_iters;
    opt.clamp = true;
    const auto& x0 = xs[cands[c].x_idx];
    if (refine_x)
      for (int k = 0; k < 2; ++k) {
        params.push_back(x0[k]);
        widths.push_back(0.125 * (eff.hi[k] - eff.lo[k]));
        opt.lo.push_back(eff.lo[k]);
        opt.hi.push_back(eff.hi[k]);
      }
    params.push_back(cands[c].phi);
    widths.push_back(0.8);
    opt.lo.push_back(-10.0);
    opt.hi.push_back(10.0);
    for (int j = 0; j < m; ++j) {
      params.push_back(cands[c].lambda[j].real());
      params.push_back(cands[c].lambda[j].imag());
    }
    for (int j = 0; j < m; ++j) {
      params.push_back(cands[c].omega[j].real());
      params.push_back(cands[c].omega[j].imag());
    }
    for (std::size_t k = params.size() - 4 * m; k < params.size(); ++k) {
      widths.push_back(0.6);
      opt.lo.push_back(-3.0);
      opt.hi.push_back(3.0);
    }

    auto eval = [&](const std::vector<double>& q) {
      const std::size_t off = refine_x ? 2 : 0;
      bool ok_l = false, ok_w = false;
      auto lam =
          unpack_unit(std::span<const double>(q.data() + off + 1, 2 * m), m, &ok_l);
      auto om = unpack_unit(
          std::span<const double>(q.data() + off + 1 + 2 * m, 2 * m), m, &ok_w);
      if (!ok_l || !ok_w) return 1e30;
      std::vector<ComplexMatrix> blk;
      const std::vector<ComplexMatrix>* pb = &blocks[cands[c].x_idx];
      if (refine_x) {
        blk.reserve(4);
        for (int b = 0; b < 4; ++b)
          blk.push_back(fields[b].eval(std::span<const double>(q.data(), 2)));
        pb = &blk;
      }
      return pq_values(contracted(*pb, q[off]), p, lam, om).p_val;
    };
    const double v = coordinate_refine(eval, params, widths, opt, plan.seed + 555 * (c + 1));
    if (v < best) {
      best = v;
      const std::size_t off = refine_x ? 2 : 0;
      if (refine_x) best_x.assign(params.begin(), params.begin() + 2);
      best_c.phi = params[off];
      bool ok = false;
      best_c.lambda =
          unpack_unit(std::span<const double>(params.data() + off + 1, 2 * m), m, &ok);
      best_c.omega = unpack_unit(
          std::span<const double>(params.data() + off + 1 + 2 * m, 2 * m), m, &ok);
    }
  }

  Verdict out;
  out.margin = best;
  if (best < -tol) {
    out.status = Status::fails;
    CheckWitness w;
    w.x = best_x;
    w.xi = {std::cos(best_c.phi), std::sin(best_c.phi)};
    w.lambda = best_c.lambda;
    w.omega = best_c.omega;
    w.value = best;
    out.witness = std::move(w);
  } else {
    out.status = Status::holds;
    out.boundary = std::abs(best) <= tol;
  }
  out.notes.push_back("NECESSARY-ONLY: passing this condition does not certify "
                      "dissipativity for general nondiagonal systems");
  add_field_notes(fields, out);
  return out;
}

}  // namespace lpdiss
