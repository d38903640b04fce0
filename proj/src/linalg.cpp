#include "lpdiss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lpdiss {

ComplexMatrix::ComplexMatrix(int m, std::vector<Complex> entries)
    : m_(check_dim(m)), e_(std::move(entries)) {
  if (e_.size() != std::size_t(m_) * m_)
    throw Error("ComplexMatrix: entry count does not match dimension");
  check_finite();
}

ComplexMatrix ComplexMatrix::identity(int m) {
  ComplexMatrix out(m);
  for (int i = 0; i < m; ++i) out.at(i, i) = 1.0;
  return out;
}

double ComplexMatrix::max_abs_entry() const {
  double mx = 0.0;
  for (const Complex& z : e_)
    mx = std::max(mx, std::max(std::abs(z.real()), std::abs(z.imag())));
  return mx;
}

void ComplexMatrix::check_finite() const {
  for (const Complex& z : e_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error("ComplexMatrix: non-finite entry");
}

ComplexMatrix operator*(Complex c, const ComplexMatrix& a) {
  ComplexMatrix out(a.m_);
  for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = c * a.e_[k];
  return out;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.m_ != b.m_) throw Error("ComplexMatrix: dimension mismatch in +");
  ComplexMatrix out(a.m_);
  for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = a.e_[k] + b.e_[k];
  return out;
}

double RealMatrix::frob_norm() const {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double RealMatrix::max_abs_entry() const {
  double mx = 0.0;
  for (double v : a) mx = std::max(mx, std::abs(v));
  return mx;
}

std::pair<RealMatrix, RealMatrix> re_im_split(const ComplexMatrix& mat) {
  const int m = mat.dim();
  RealMatrix re(m), im(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      re.at(i, j) = mat.at(i, j).real();
      im.at(i, j) = mat.at(i, j).imag();
    }
  return {std::move(re), std::move(im)};
}

Complex herm_form(const ComplexMatrix& mat, std::span<const Complex> u,
                  std::span<const Complex> v) {
  const int m = mat.dim();
  if (int(u.size()) != m || int(v.size()) != m)
    throw Error("herm_form: vector length does not match matrix dimension");
  Complex acc = 0.0;
  for (int i = 0; i < m; ++i) {
    Complex mu = 0.0;
    for (int j = 0; j < m; ++j) mu += mat.at(i, j) * u[j];
    acc += mu * std::conj(v[i]);
  }
  return acc;
}

double sym_form(const RealMatrix& mat, std::span<const double> u) {
  const int m = mat.m;
  if (int(u.size()) != m)
    throw Error("sym_form: vector length does not match matrix dimension");
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < m; ++j) mu += mat.at(i, j) * u[j];
    acc += mu * u[i];
  }
  return acc;
}

namespace {

double off_diag_norm(const RealMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.m; ++i)
    for (int j = i + 1; j < a.m; ++j) s += 2.0 * a.at(i, j) * a.at(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenSpectrum sym_eigs(const RealMatrix& s) {
  const int m = s.m;
  if (m < 1) throw Error("sym_eigs: empty matrix");
  const double scale = std::max(1.0, s.max_abs_entry());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (std::abs(s.at(i, j) - s.at(j, i)) > 1e-12 * scale)
        throw Error("sym_eigs: matrix is not symmetric");

  RealMatrix a = s;
  RealMatrix v(m);
  for (int i = 0; i < m; ++i) v.at(i, i) = 1.0;

  const double target = 1e-14 * std::max(s.frob_norm(), 1e-300);
  constexpr int kMaxSweeps = 50;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    if (off_diag_norm(a) <= target) {
      converged = true;
      break;
    }
    for (int p = 0; p < m - 1; ++p)
      for (int q = p + 1; q < m; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double tau = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (int k = 0; k < m; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - sn * akq;
          a.at(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < m; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - sn * aqk;
          a.at(q, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < m; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - sn * vkq;
          v.at(k, q) = sn * vkp + c * vkq;
        }
      }
  }
  if (!converged && off_diag_norm(a) > target)
    throw Error("sym_eigs: Jacobi sweeps did not converge, residual " +
                std::to_string(off_diag_norm(a)));

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a.at(i, i) < a.at(j, j); });

  EigenSpectrum out;
  out.values.resize(m);
  for (int i = 0; i < m; ++i) out.values[i] = a.at(order[i], order[i]);

  // residual ||V D V^t - S||_F with the accumulated (unpermuted) rotations
  double res = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double rec = 0.0;
      for (int k = 0; k < m; ++k) rec += v.at(i, k) * a.at(k, k) * v.at(j, k);
      const double d = rec - s.at(i, j);
      res += d * d;
    }
  out.residual = std::sqrt(res);
  return out;
}

double arccot(double y) {
  if (std::isnan(y)) throw Error("arccot: NaN input");
  return std::atan2(1.0, y);  // (0, pi); atan2(1, +inf) = 0, atan2(1, -inf) = pi
}

AngleInterval arccot_interval(double qp_inf, double qp_sup) {
  if (std::isnan(qp_inf) || std::isnan(qp_sup))
    throw Error("arccot_interval: NaN bound");
  if (qp_inf > qp_sup && std::isfinite(qp_inf) && std::isfinite(qp_sup))
    throw Error("arccot_interval: qp_inf > qp_sup");
  AngleInterval out;
  out.theta_minus = arccot(qp_inf) - std::atan2(0.0, -1.0);  // - pi
  out.theta_plus = arccot(qp_sup);
  return out;
}

AngleInterval intersect(const AngleInterval& a, const AngleInterval& b) {
  AngleInterval out;
  if (a.empty || b.empty) {
    out.empty = true;
    return out;
  }
  out.theta_minus = std::max(a.theta_minus, b.theta_minus);
  out.theta_plus = std::min(a.theta_plus, b.theta_plus);
  out.empty = out.theta_minus > out.theta_plus;
  return out;
}

}  // namespace lpdiss
