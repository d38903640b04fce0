#pragma once

#include <cstdint>
#include <optional>

#include "lpdiss/criteria.hpp"
#include "lpdiss/operator_spec.hpp"

namespace lpdiss {

/// Uniform tensor grid over a finite box; nodes include the boundary.
struct GridSpec {
  DomainBox box;            // finite
  std::vector<int> nodes;   // per axis, >= 6

  int dim() const { return box.n; }
  double spacing(int axis) const {
    return (box.hi[axis] - box.lo[axis]) / (nodes[axis] - 1);
  }
  std::size_t node_count() const {
    std::size_t c = 1;
    for (int nk : nodes) c *= std::size_t(nk);
    return c;
  }
  double coord(int axis, int i) const { return box.lo[axis] + spacing(axis) * i; }
  void validate() const;
};

/// Grid-sampled compactly supported complex vector field. Values are stored
/// node-major (node index slowest axis first), m components per node, and
/// must vanish on the box boundary nodes.
struct TestField {
  GridSpec grid;
  int m = 1;
  std::vector<Complex> values;

  Complex& at(std::size_t node, int j) { return values[node * m + j]; }
  const Complex& at(std::size_t node, int j) const { return values[node * m + j]; }
  double max_abs() const;
  bool is_real(double tol = 1e-12) const;
  void validate() const;  // sizes and boundary-vanishing
};

std::string testfield_to_json_text(const TestField& v);
TestField testfield_from_json_text(const std::string& text);

/// Value of the dissipativity form on a test field: central-difference
/// gradients at cell centers, composite midpoint quadrature, the |v|^-2 and
/// |v|^-4 terms extended by zero where |v| < 1e-12 max|v|. For the
/// elasticity operator the general assembly and the specialized form are
/// both computed and must agree within 1e-6 relative (real fields only).
double form_value(const OperatorSpec& op, const PExponent& p, const TestField& v);

/// Parameters of the necessity-proof witness constructions.
struct WitnessParams {
  enum class Construction {
    automatic,        // per-axis ramp for one-direction systems, else planar
    per_axis_ramp,    // cubic ramp along the witness axis, bump elsewhere
    planar_modulated  // logarithmic cutoff plus modulated bump
  };

  double mu_amp = 100.0;    // constant-part amplitude, > 0
  double cutoff_R = 32.0;   // cutoff scale, > 2
  double ramp_center = 0.0; // placement of the 1d ramp interval
  double ramp_width = 1.0;  // length of the 1d ramp interval
  double modulation = 0.0;  // 2d oscillation frequency; 0 = finest the grid resolves
  double bump_radius = 0.0; // 2d envelope radius; 0 = auto from cutoff_R
  Construction construction = Construction::automatic;

  void validate() const {
    if (!(mu_amp > 0.0)) throw Error("WitnessParams: mu_amp must be > 0");
    if (!(cutoff_R > 2.0)) throw Error("WitnessParams: cutoff_R must be > 2");
  }
};

/// Test field built from a failing witness: a cubic ramp from mu*omega to
/// mu*omega + lambda along the witness direction under a plateau cutoff
/// (one-dimensional systems), or a logarithmic cutoff around mu*omega plus
/// a modulated bump lambda phi(x) cos(mu~ <xi, x>) (planar systems).
TestField witness_testfield(const CheckWitness& witness, const OperatorSpec& op,
                            const WitnessParams& wp, const GridSpec& grid);

struct Violation {
  TestField field;
  double value;
};

/// Searches for a test field with form_value < -1e-8: first the witness
/// construction over the (mu, R) ladder (with grid-feasible ramp widths and
/// modulation frequencies), then random smooth bump superpositions.
/// `budget` caps the number of form_value evaluations.
std::optional<Violation> violation_search(const OperatorSpec& op, const PExponent& p,
                                          long budget = 64);

struct XYResiduals {
  double relxy = 0.0;  // nodewise max relative defect of the gradient split
  double magic = 0.0;  // relative defect of the cross-term integral identity
  std::size_t nodes_used = 0;
};

/// Residuals of the planar gradient-decomposition identities on a real
/// two-component field: fourth-order differenced scalar fields
///   X1 = |v|^-1 (v1 d1|v| + v2 d2|v|), X2 = |v|^-1 (v2 d1|v| - v1 d2|v|),
///   Y1 = div v - X1,                  Y2 = (d1 v2 - d2 v1) - X2,
/// checked against sum_j |grad v_j|^2 = X1^2+X2^2+Y1^2+Y2^2 and
/// int X1 Y1 = -int X2 Y2.
XYResiduals elasticity_xy_identities(const TestField& v);

struct SimResult {
  std::vector<double> norms;  // ||u(t_k)||_p trajectory, k = 0..steps
  bool monotone = false;      // no step increased the norm beyond 1e-8 relative
  int first_increase_step = -1;
  bool inconclusive = false;  // non-dissipative setup but no increase observed
};

/// Explicit RK4 method-of-lines run of u_t = (A(x) u')' with zero Dirichlet
/// data for a one-dimensional system with real coefficients; records the
/// vector p-norm after every step. dt must satisfy dt <= 0.4 h^2 / max||A||.
SimResult contraction_sim(const OperatorSpec& op, const PExponent& p,
                          const TestField& u0, double t_final, double dt);

/// Deterministic smooth compactly supported random field on a grid
/// (low-order trigonometric modes under a flat envelope), normalized to
/// max |v| = 1.
TestField random_test_field(const GridSpec& grid, int m, std::uint64_t seed,
                            bool real_valued = false);

}  // namespace lpdiss
