#pragma once

#include "lpdiss/criteria.hpp"

namespace lpdiss {

/// Planar elasticity operator u -> Lap u + (1-2 nu)^{-1} grad div u.
/// Undefined at nu = 1/2; strongly elliptic iff nu > 1 or nu < 1/2.
struct ElasticityParams {
  double nu;
  double gamma;  // (1 - 2 nu)^{-1}
  bool strong_elliptic;

  explicit ElasticityParams(double nu_in) : nu(nu_in) {
    if (nu == 0.5) throw Error("elasticity: operator undefined at nu = 1/2");
    if (!std::isfinite(nu)) throw Error("elasticity: nu must be finite");
    gamma = 1.0 / (1.0 - 2.0 * nu);
    strong_elliptic = nu > 1.0 || nu < 0.5;
  }
};

/// Exact dissipativity criterion: holds iff
/// (1/2 - 1/p)^2 (3-4nu)^2 <= 2 (nu-1)(2nu-1). Both the direct form and the
/// equivalent 4/(pp') (3-4nu)^2 >= 1 form are evaluated and must agree to
/// 1e-12. Margin is the difference of the two sides divided by (3-4nu)^2.
Verdict elasticity_check(const ElasticityParams& params, const PExponent& p);

/// All admissible p for a given nu: |1 - 2/p| <= sqrt(1 - (3-4nu)^{-2}).
/// Empty when (nu-1)(2nu-1) < 0.
PInterval elasticity_p_interval(const ElasticityParams& params);

/// Solution set in nu for a given p: two closed rays
/// nu <= (3 - sqrt(pp')/2)/4 and nu >= (3 + sqrt(pp')/2)/4 (nu = 1/2 always
/// excluded since the operator is undefined there).
struct NuSet {
  double left_end;    // ray (-inf, left_end]
  double right_start; // ray [right_start, +inf)
  bool contains(double nu) const {
    if (nu == 0.5) return false;
    return nu <= left_end || nu >= right_start;
  }
};
NuSet elasticity_nu_set(const PExponent& p);

/// Shift against k * Laplacian from below (operator - k Lap): exists for some
/// k > 0 iff the criterion holds strictly; largest admissible
/// k = (|3-4nu| - sqrt(pp')/2) / (2 |1-2nu|). Also reports the reduced
/// operator's nu' = nu (1-k) + k/2 evaluated at k_sup/2 as a cross-check input.
struct ElasticityShiftReport : ShiftReport {
  double nu_reduced = std::numeric_limits<double>::quiet_NaN();
};
ElasticityShiftReport elasticity_shift_lower(const ElasticityParams& params,
                                             const PExponent& p);

/// Dual family (k Lap - operator, k < 2): exists iff
/// (1/2 - 1/p)^2 < 2 nu (2nu-1) / (1-4nu)^2; cross-checked against
/// elasticity_shift_lower at nu~ = 1 - nu (the verdicts must agree).
/// nu = 1/4 is an error (degenerate denominator).
ShiftReport elasticity_shift_upper(const ElasticityParams& params, const PExponent& p);

/// The four m x m constant coefficient blocks of the planar elasticity
/// operator in divergence form, row-major in (h, k):
/// A^{hk}_{ij} = delta_hk delta_ij + gamma delta_ih delta_jk.
std::vector<ComplexMatrix> elasticity_coefficient_blocks(const ElasticityParams& params);

}  // namespace lpdiss
