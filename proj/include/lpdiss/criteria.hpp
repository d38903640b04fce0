#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lpdiss/field.hpp"
#include "lpdiss/linalg.hpp"

namespace lpdiss {

/// Lebesgue exponent p in (1, inf) with its conjugate p/(p-1) and the
/// constant (1 - 2/p)^2. Symmetric roles: cp is invariant under p <-> p'.
struct PExponent {
  double p;
  double p_conj;
  double cp;

  explicit PExponent(double p_in) : p(p_in) {
    if (!(p > 1.0) || !std::isfinite(p))
      throw Error("PExponent: p must lie in (1, inf)");
    p_conj = p / (p - 1.0);
    const double t = 1.0 - 2.0 / p;
    cp = t * t;
  }

  double t() const { return 1.0 - 2.0 / p; }
  /// sqrt(p p') = p / sqrt(p-1)
  double sqrt_pp() const { return p / std::sqrt(p - 1.0); }
  PExponent conjugate() const { return PExponent(p_conj); }
};

enum class Status { holds, fails, undetermined };

std::string to_string(Status s);

/// Argmin data for a failed (or boundary) criterion check.
struct CheckWitness {
  int h = -1;                     // coordinate index for per-direction systems
  std::vector<double> x;          // spatial point
  std::vector<double> xi;         // real direction (scalar / general2d checks)
  std::vector<Complex> lambda;    // complex direction pair (system checks)
  std::vector<Complex> omega;
  double value = 0.0;             // the recomputed criterion margin there
};

struct Verdict {
  Status status = Status::undetermined;
  double margin = 0.0;
  std::optional<CheckWitness> witness;
  bool boundary = false;          // |margin| within the boundary tolerance
  std::vector<std::string> notes;

  bool holds() const { return status == Status::holds; }
};

/// Thrown by angle/derived operations whose hypothesis (the base criterion)
/// fails; carries the failing verdict.
struct PreconditionError : Error {
  explicit PreconditionError(Verdict v)
      : Error("precondition violated: base criterion fails with margin " +
              std::to_string(v.margin)),
        verdict(std::move(v)) {}
  Verdict verdict;
};

/// Admissible p-range. `empty` dominates the bounds. An unbounded right end
/// is encoded as +inf with closed_hi = false.
struct PInterval {
  double p_lo = 2.0;
  double p_hi = 2.0;
  bool closed_lo = true;
  bool closed_hi = true;
  bool empty = false;

  bool contains(double p) const {
    if (empty) return false;
    if (p < p_lo || (p == p_lo && !closed_lo)) return false;
    if (p > p_hi || (p == p_hi && !closed_hi)) return false;
    return true;
  }
};

/// Result of a shift comparison against k times the componentwise Laplacian.
struct ShiftReport {
  bool exists = false;
  double k_sup = std::numeric_limits<double>::quiet_NaN();  // NaN: not meaningful
  double criterion_value = 0.0;  // the ess inf / ess sup being tested
  double value_at_truncation = 0.0;  // raw extremum at the full truncation radius
  bool divergent = false;        // extremum kept moving under truncation refinement
  std::vector<std::string> notes;
};

inline constexpr double kBoundaryTol = 1e-9;

}  // namespace lpdiss
