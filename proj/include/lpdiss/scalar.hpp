#pragma once

#include "lpdiss/criteria.hpp"

namespace lpdiss {

/// Quotient bounds of the imaginary over the real coefficient form, taken
/// over sampled (x, xi) pairs with positive real form. Degenerate pairs
/// (real form ~ 0, imaginary form nonzero) contribute +-inf to the bounds.
struct ScalarAngleReport {
  double lambda1 = 0.0;  // extended real
  double lambda2 = 0.0;
  AngleInterval interval;
  bool xi_empty = false;
  std::vector<std::string> notes;
};

/// Dissipativity check for the scalar divergence-form operator with complex
/// matrix coefficients: |p-2| |<Im A xi, xi>| <= 2 sqrt(p-1) <Re A xi, xi>
/// over sampled x and unit xi, with local refinement around the worst sample.
/// Requires Im A symmetric at every sampled point (within 1e-10 relative).
Verdict scalar_check(const CoefficientField& f, const PExponent& p,
                     const SamplingPlan& plan);

struct ScalarLambdaBounds {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool xi_empty = false;
  bool degenerate_pairs = false;  // pairs with Re form ~ 0, Im form != 0 seen
};

/// Sampled extrema of <Im A xi, xi> / <Re A xi, xi> over pairs with positive
/// denominator. Empty set: (+inf, -inf, true).
ScalarLambdaBounds scalar_lambda_bounds(const CoefficientField& f,
                                        const SamplingPlan& plan);

/// Sharp rotation range [theta_minus, theta_plus] such that e^{i theta} A
/// stays dissipative. Requires scalar_check to hold (throws PreconditionError
/// carrying the failing verdict otherwise).
ScalarAngleReport scalar_angle(const CoefficientField& f, const PExponent& p,
                               const SamplingPlan& plan);

/// Rotation range for real coefficient matrices: +-arctan(2 sqrt(p-1)/|p-2|),
/// independent of the operator; +-pi/2 at p = 2.
AngleInterval real_scalar_angle(const PExponent& p);

}  // namespace lpdiss
