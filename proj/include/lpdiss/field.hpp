#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpdiss/expr.hpp"
#include "lpdiss/linalg.hpp"

namespace lpdiss {

/// Box domain in R^n. Unbounded ends carry an explicit flag; sampling and
/// refinement then use the truncation radius (an absolute coordinate bound)
/// and verdicts report the truncation used.
struct DomainBox {
  int n = 1;
  std::vector<double> lo, hi;
  std::vector<bool> lo_unbounded, hi_unbounded;
  double truncation = 1e3;

  static DomainBox unit(int n);
  static DomainBox interval(double a, double b);
  /// (a, +inf) with the given truncation bound.
  static DomainBox half_line(double a, double truncation);

  bool unbounded() const;
  /// Finite box actually sampled: unbounded ends replaced by +-truncation.
  /// A positive override replaces the stored truncation.
  DomainBox effective(double truncation_override = -1.0) const;
  bool contains(std::span<const double> x) const;
  std::vector<double> center() const;
  void validate() const;
};

struct SamplingPlan {
  std::uint64_t seed = 1;
  int n_points = 64;
  int n_directions = 2048;
  int refine_iters = 40;

  void validate() const {
    if (n_points < 1 || n_directions < 1 || refine_iters < 1)
      throw Error("SamplingPlan: all counts must be >= 1");
  }
};

/// Deterministic spatial samples: splitmix64-driven uniform coordinates in
/// each axis of the effective box, identical across platforms for a seed.
std::vector<std::vector<double>> sample_points(const DomainBox& box,
                                               const SamplingPlan& plan);

/// Matrix coefficient field x -> A(x): a constant matrix, an m x m grid of
/// entry expressions, or nearest-neighbor grid samples over a box.
class CoefficientField {
 public:
  enum class Kind { constant, expression, grid };

  static CoefficientField constant(ComplexMatrix a,
                                   std::optional<DomainBox> box = std::nullopt);
  static CoefficientField expression(std::vector<std::vector<ExprAst>> entries,
                                     DomainBox box,
                                     std::map<std::string, double> params = {});
  static CoefficientField grid(std::vector<std::vector<double>> points,
                               std::vector<ComplexMatrix> values, DomainBox box);

  Kind kind() const { return kind_; }
  int m() const { return m_; }
  const DomainBox& box() const { return box_; }
  bool is_constant() const { return kind_ == Kind::constant; }

  /// eval_field: x must lie in the (effective) box; non-finite entry values
  /// are an error. Grid fields use the nearest sample, ties to lowest index.
  ComplexMatrix eval(std::span<const double> x) const;

  /// Real scaling (used by homogeneity tests); expression entries are wrapped.
  CoefficientField scaled(double c) const;

  const std::map<std::string, double>& params() const { return params_; }
  const std::vector<std::vector<ExprAst>>& expr_entries() const { return exprs_; }
  const std::vector<std::vector<double>>& grid_points() const { return grid_points_; }
  const std::vector<ComplexMatrix>& grid_values() const { return grid_values_; }

 private:
  CoefficientField() = default;
  Kind kind_ = Kind::constant;
  int m_ = 1;
  DomainBox box_;
  ComplexMatrix const_value_;
  std::vector<std::vector<ExprAst>> exprs_;
  std::map<std::string, double> params_;
  std::vector<std::vector<double>> grid_points_;
  std::vector<ComplexMatrix> grid_values_;
  double scale_ = 1.0;
};

/// JSON (de)serialization per the field file schema:
/// {"m":int,"n":int,"kind":"constant"|"expression"|"grid", ...}.
CoefficientField field_from_json_text(const std::string& text);
CoefficientField field_from_json_file(const std::string& path);
std::string field_to_json_text(const CoefficientField& f);

}  // namespace lpdiss
