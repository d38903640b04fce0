#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lpdiss {

using Complex = std::complex<double>;

/// Library-wide error type. Thrown on contract violations (dimension
/// mismatches, non-finite inputs, violated hypotheses).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense m x m complex matrix, row-major. Entries must be finite.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int m) : m_(check_dim(m)), e_(std::size_t(m) * m) {}
  ComplexMatrix(int m, std::vector<Complex> entries);

  static ComplexMatrix identity(int m);

  int dim() const { return m_; }
  Complex& at(int i, int j) { return e_[std::size_t(i) * m_ + j]; }
  const Complex& at(int i, int j) const { return e_[std::size_t(i) * m_ + j]; }
  const std::vector<Complex>& entries() const { return e_; }

  double max_abs_entry() const;
  void check_finite() const;

  friend ComplexMatrix operator*(Complex c, const ComplexMatrix& a);
  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);

 private:
  static int check_dim(int m) {
    if (m < 1) throw Error("ComplexMatrix: dimension must be >= 1");
    return m;
  }
  int m_ = 0;
  std::vector<Complex> e_;
};

/// Dense m x m real matrix, row-major.
struct RealMatrix {
  int m = 0;
  std::vector<double> a;

  RealMatrix() = default;
  explicit RealMatrix(int mm) : m(mm), a(std::size_t(mm) * mm, 0.0) {}

  double& at(int i, int j) { return a[std::size_t(i) * m + j]; }
  const double& at(int i, int j) const { return a[std::size_t(i) * m + j]; }
  double frob_norm() const;
  double max_abs_entry() const;
};

/// Entrywise real/imaginary split: M = Re + i*Im exactly.
std::pair<RealMatrix, RealMatrix> re_im_split(const ComplexMatrix& mat);

/// Sesquilinear form <M u, v> = sum_j (M u)_j * conj(v_j).
/// Real whenever M is Hermitian and u == v.
Complex herm_form(const ComplexMatrix& mat, std::span<const Complex> u,
                  std::span<const Complex> v);

/// <M u, u> for real symmetric M and real u.
double sym_form(const RealMatrix& mat, std::span<const double> u);

/// Ascending eigenvalues of a real symmetric matrix plus the Frobenius
/// reconstruction residual ||V D V^t - S||_F of the accumulated rotations.
struct EigenSpectrum {
  std::vector<double> values;  // ascending
  double residual = 0.0;
};

/// Cyclic Jacobi rotations, sweep cap 50, off-diagonal mass driven below
/// 1e-14 * ||S||_F. Input must be symmetric within 1e-12 relative tolerance.
EigenSpectrum sym_eigs(const RealMatrix& s);

/// arccot on the branch (0, pi), extended by arccot(+inf) = 0 and
/// arccot(-inf) = pi. NaN input is an error.
double arccot(double y);

/// Closed angle interval [theta_minus, theta_plus] in [-pi, pi].
struct AngleInterval {
  double theta_minus = 0.0;
  double theta_plus = 0.0;
  bool empty = false;

  double width() const { return theta_plus - theta_minus; }
  bool contains(double theta) const {
    return !empty && theta_minus <= theta && theta <= theta_plus;
  }
};

/// Interval [arccot(qp_inf) - pi, arccot(qp_sup)] of admissible rotation
/// angles for a quotient ranging over [qp_inf, qp_sup] (extended reals).
/// The empty index set is encoded as (+inf, -inf) and yields [-pi, pi].
/// qp_inf > qp_sup with both finite is an error; NaN anywhere is an error.
AngleInterval arccot_interval(double qp_inf, double qp_sup);

/// Intersection, empty-flagged when the bounds cross.
AngleInterval intersect(const AngleInterval& a, const AngleInterval& b);

}  // namespace lpdiss
