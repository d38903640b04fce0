#include "lpdiss/elasticity.hpp"

#include <cmath>
#include <sstream>

namespace lpdiss {

Verdict elasticity_check(const ElasticityParams& params, const PExponent& p) {
  const double nu = params.nu;
  const double half_diff = 0.5 - 1.0 / p.p;
  const double c2 = half_diff * half_diff;
  const double denom = (3.0 - 4.0 * nu) * (3.0 - 4.0 * nu);
  const double numer = 2.0 * (nu - 1.0) * (2.0 * nu - 1.0);

  // scaled margins of the two equivalent forms; they coincide analytically
  const double m1 = numer - c2 * denom;
  const double m2 = denom / (p.p * p.p_conj) - 0.25;
  const double sc = std::max({1.0, std::abs(m1), std::abs(m2)});
  if (std::abs(m1 - m2) > 1e-12 * sc)
    throw Error("elasticity_check: the two criterion forms disagree");

  Verdict out;
  out.margin = denom > 0.0 ? m1 / denom : m1;
  const double tol = kBoundaryTol * std::max(1.0, denom);
  out.status = m1 >= 0.0 ? Status::holds : Status::fails;
  out.boundary = std::abs(m1) <= tol;
  if (denom == 0.0)
    out.notes.push_back("nu = 3/4: criterion evaluated without division; it fails "
                        "for every p since the numerator is negative");
  return out;
}

PInterval elasticity_p_interval(const ElasticityParams& params) {
  const double nu = params.nu;
  PInterval out;
  if ((nu - 1.0) * (2.0 * nu - 1.0) < 0.0) {
    out.empty = true;
    return out;
  }
  const double denom = (3.0 - 4.0 * nu) * (3.0 - 4.0 * nu);
  if (denom == 0.0) {  // nu = 3/4 sits in the excluded band anyway
    out.empty = true;
    return out;
  }
  const double b2 = 1.0 - 1.0 / denom;
  const double b = b2 > 0.0 ? std::sqrt(b2) : 0.0;
  out.p_lo = 2.0 / (1.0 + b);
  out.p_hi = 2.0 / (1.0 - b);
  return out;
}

NuSet elasticity_nu_set(const PExponent& p) {
  const double s_half = 0.5 * p.sqrt_pp();
  NuSet out;
  out.left_end = (3.0 - s_half) / 4.0;
  out.right_start = (3.0 + s_half) / 4.0;
  return out;
}

ElasticityShiftReport elasticity_shift_lower(const ElasticityParams& params,
                                             const PExponent& p) {
  const double nu = params.nu;
  const Verdict base = elasticity_check(params, p);

  ElasticityShiftReport out;
  out.criterion_value = base.margin;
  const double k_formula = (std::abs(3.0 - 4.0 * nu) - 0.5 * p.sqrt_pp()) /
                           (2.0 * std::abs(1.0 - 2.0 * nu));
  out.exists = base.status == Status::holds && !base.boundary && k_formula > 0.0;
  out.k_sup = k_formula >= 0.0 ? k_formula : std::numeric_limits<double>::quiet_NaN();
  if (out.exists) {
    const double k_half = 0.5 * out.k_sup;
    out.nu_reduced = nu * (1.0 - k_half) + 0.5 * k_half;
  }
  out.notes.push_back("criterion: strict inequality of the dissipativity condition");
  return out;
}

ShiftReport elasticity_shift_upper(const ElasticityParams& params, const PExponent& p) {
  const double nu = params.nu;
  if (nu == 0.25)
    throw Error("elasticity_shift_upper: degenerate denominator at nu = 1/4");
  const double half_diff = 0.5 - 1.0 / p.p;
  const double c2 = half_diff * half_diff;
  const double denom = (1.0 - 4.0 * nu) * (1.0 - 4.0 * nu);
  const double rhs = 2.0 * nu * (2.0 * nu - 1.0) / denom;

  ShiftReport out;
  out.criterion_value = rhs - c2;
  out.exists = c2 < rhs;

  // must agree with the lower-shift family at the reflected Poisson ratio
  const ElasticityParams reflected(1.0 - nu);
  const ElasticityShiftReport dual = elasticity_shift_lower(reflected, p);
  if (dual.exists != out.exists)
    throw Error("elasticity_shift_upper: disagreement with the reflected-parameter "
                "lower-shift check");
  out.notes.push_back("existence only; no largest admissible k is reported for "
                      "this direction");
  return out;
}

std::vector<ComplexMatrix> elasticity_coefficient_blocks(const ElasticityParams& params) {
  std::vector<ComplexMatrix> blocks;
  for (int h = 0; h < 2; ++h)
    for (int k = 0; k < 2; ++k) {
      ComplexMatrix a(2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double v = 0.0;
          if (h == k && i == j) v += 1.0;
          if (i == h && j == k) v += params.gamma;
          a.at(i, j) = v;
        }
      blocks.push_back(std::move(a));
    }
  return blocks;
}

}  // namespace lpdiss
