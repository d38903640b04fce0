#pragma once

#include "lpdiss/criteria.hpp"

namespace lpdiss {

/// Real and imaginary parts of the direction form
///   <A l, l> - (1-2/p)^2 <A w, w> (Re<l,w>)^2
///   - (1-2/p) (<A w, l> - <A l, w>) Re<l,w>
/// evaluated with the outer Re (p_val) and Im (q_val) operators.
struct PQValue {
  double p_val = 0.0;
  double q_val = 0.0;
};

/// Requires |omega| = 1 within 1e-12. Degree-2 homogeneous in lambda and
/// invariant under a common phase rotation of (lambda, omega).
PQValue pq_values(const ComplexMatrix& a, const PExponent& p,
                  std::span<const Complex> lambda, std::span<const Complex> omega);

struct SystemVerdict {
  Verdict overall;
  std::vector<Verdict> per_h;
};

/// Necessary-and-sufficient check for operators that act independently per
/// coordinate direction (one m x m coefficient field per direction):
/// the direction form must be nonnegative for every h at sampled x and
/// complex unit pairs (lambda, omega), with local refinement.
SystemVerdict system_check(const std::vector<CoefficientField>& fields,
                           const PExponent& p, const SamplingPlan& plan);

/// Eigenvalue form of the same check for real symmetric positive
/// semidefinite coefficients: (1/2 - 1/p)^2 (mu_1 + mu_m)^2 <= mu_1 mu_m
/// per direction at every sampled point. For m = 2 the trace/determinant
/// form is cross-checked to 1e-10.
SystemVerdict sym_system_check(const std::vector<CoefficientField>& fields,
                               const PExponent& p, const SamplingPlan& plan);

/// All p with |1/2 - 1/p| <= sqrt(mu1 mum) / (mu1 + mum); closed, contains 2,
/// endpoints conjugate. mu1 = 0 degenerates to {2}; mu1 < 0 is an error.
PInterval sym_p_interval(double mu1, double mum);

/// Necessary condition only: Re <A^h l, l> >= 0 over sampled x, |l| = 1.
Verdict positivity_necessary(const std::vector<CoefficientField>& fields,
                             const SamplingPlan& plan);

enum class ShiftMode {
  positive_k,  // exists k > 0 (strict positivity of the criterion value)
  any_k,       // exists real k (criterion value > -inf)
  psd_variant  // positivity-hypothesis form with its boundedness side check
};

/// Largest shift k making (operator - k * componentwise second derivative)
/// dissipative. Real symmetric fields take the eigenvalue expression
/// (1 + sqrt(pp')/2) mu_1 + (1 - sqrt(pp')/2) mu_m; otherwise the sampled
/// infimum of the direction form over |lambda| = |omega| = 1 is tested.
ShiftReport shift_lower_bound(const std::vector<CoefficientField>& fields,
                              const PExponent& p, const SamplingPlan& plan,
                              ShiftMode mode = ShiftMode::positive_k);

/// Dual family (k * second derivative - operator): requires real symmetric
/// fields; tests boundedness of (1 - sqrt(pp')/2) mu_1 + (1 + sqrt(pp')/2) mu_m,
/// and reports the sup of mu_m alongside when the fields are PSD.
ShiftReport shift_upper_bound(const std::vector<CoefficientField>& fields,
                              const PExponent& p, const SamplingPlan& plan);

/// Closed form (mu_1 + mu_m)^2 / (4 mu_1 mu_m) of the sphere maximum of
/// (sum_h mu_h w_h^2)(sum_k mu_k^{-1} w_k^2). Entries must be positive
/// ascending.
double sphere_product_max(std::span<const double> mu);

/// Rotation range of dissipativity for the per-direction system: per h the
/// sampled extrema of q/p over the admissible set, combined across h by
/// max of the lower ends and min of the upper ends. Requires system_check
/// to hold (throws PreconditionError otherwise).
AngleInterval system_angle(const std::vector<CoefficientField>& fields,
                           const PExponent& p, const SamplingPlan& plan);

/// Necessary condition for general systems on a planar domain: the direction
/// form of the xi-contracted coefficient matrix must be nonnegative over
/// sampled x, real unit xi and complex unit (lambda, omega). The verdict is
/// labelled necessary-only. `fields` is the 2 x 2 block array, row-major.
Verdict general2d_necessary(const std::vector<CoefficientField>& fields,
                            const PExponent& p, const SamplingPlan& plan);

}  // namespace lpdiss
