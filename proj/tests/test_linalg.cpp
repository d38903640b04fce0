#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lpdiss/linalg.hpp"
#include "lpdiss/rng.hpp"

using namespace lpdiss;

namespace {
const double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2);
  m.at(0, 0) = a;
  m.at(0, 1) = b;
  m.at(1, 0) = c;
  m.at(1, 1) = d;
  return m;
}
}  // namespace

TEST_CASE("re_im_split: entrywise parts") {
  const ComplexMatrix id = ComplexMatrix::identity(2);
  auto [re, im] = re_im_split(id);
  CHECK(re.at(0, 0) == 1.0);
  CHECK(re.at(1, 1) == 1.0);
  CHECK(im.max_abs_entry() == 0.0);

  const ComplexMatrix a = mat2(1.0, Complex(0, 1), Complex(0, 1), 1.0);
  auto [re2, im2] = re_im_split(a);
  CHECK(re2.at(0, 0) == 1.0);
  CHECK(re2.at(0, 1) == 0.0);
  CHECK(im2.at(0, 1) == 1.0);
  CHECK(im2.at(1, 0) == 1.0);
  CHECK(im2.at(0, 0) == 0.0);

  ComplexMatrix s(1);
  s.at(0, 0) = Complex(2, 3);
  auto [re3, im3] = re_im_split(s);
  CHECK(re3.at(0, 0) == 2.0);
  CHECK(im3.at(0, 0) == 3.0);
}

TEST_CASE("herm_form: worked examples") {
  const std::vector<Complex> u{1.0, Complex(0, 1)};
  CHECK(herm_form(ComplexMatrix::identity(2), u, u) == Complex(2.0, 0.0));

  const ComplexMatrix offdiag = mat2(0.0, 1.0, 1.0, 0.0);
  const std::vector<Complex> xi{0.7, -1.3};
  const Complex q = herm_form(offdiag, xi, xi);
  CHECK(q.real() == doctest::Approx(2.0 * 0.7 * -1.3).epsilon(1e-15));
  CHECK(q.imag() == 0.0);

  // (1+i)*1 + (i+1)*1 = 2+2i
  const ComplexMatrix a = mat2(1.0, Complex(0, 1), Complex(0, 1), 1.0);
  const std::vector<Complex> ones{1.0, 1.0};
  const Complex v = herm_form(a, ones, ones);
  CHECK(v.real() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(v.imag() == doctest::Approx(2.0).epsilon(1e-15));

  const std::vector<Complex> wrong{1.0};
  CHECK_THROWS_AS((void)herm_form(a, wrong, ones), Error);
}

TEST_CASE("herm_form: Hermitian matrices give real diagonal forms") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + int(rng.next_u64() % 4);
    ComplexMatrix a(m);
    for (int i = 0; i < m; ++i) {
      a.at(i, i) = rng.next_normal();
      for (int j = i + 1; j < m; ++j) {
        a.at(i, j) = Complex(rng.next_normal(), rng.next_normal());
        a.at(j, i) = std::conj(a.at(i, j));
      }
    }
    std::vector<Complex> u(m);
    for (auto& z : u) z = Complex(rng.next_normal(), rng.next_normal());
    CHECK(std::abs(herm_form(a, u, u).imag()) < 1e-12 * (1.0 + a.max_abs_entry()));
  }
}

TEST_CASE("sym_eigs: examples and identities") {
  RealMatrix d(2);
  d.at(0, 0) = 9.0;
  d.at(1, 1) = 1.0;
  auto sp = sym_eigs(d);
  CHECK(sp.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sp.values[1] == doctest::Approx(9.0).epsilon(1e-14));

  RealMatrix t(2);  // eigenvalues of [[2,1],[1,2]] are 1 and 3
  t.at(0, 0) = t.at(1, 1) = 2.0;
  t.at(0, 1) = t.at(1, 0) = 1.0;
  sp = sym_eigs(t);
  CHECK(sp.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sp.values[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sp.residual <= 1e-10 * (1.0 + t.max_abs_entry()));

  SplitMix64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    RealMatrix s(2);
    s.at(0, 0) = rng.next_normal();
    s.at(1, 1) = rng.next_normal();
    s.at(0, 1) = s.at(1, 0) = rng.next_normal();
    sp = sym_eigs(s);
    const double det = s.at(0, 0) * s.at(1, 1) - s.at(0, 1) * s.at(1, 0);
    const double tr = s.at(0, 0) + s.at(1, 1);
    CHECK(sp.values[0] * sp.values[1] == doctest::Approx(det).epsilon(1e-10));
    CHECK(sp.values[0] + sp.values[1] == doctest::Approx(tr).epsilon(1e-10));
  }
}

TEST_CASE("sym_eigs: sorted, reconstructs, rejects asymmetry") {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + int(rng.next_u64() % 5);
    RealMatrix s(m);
    for (int i = 0; i < m; ++i) {
      s.at(i, i) = 3.0 * rng.next_normal();
      for (int j = i + 1; j < m; ++j) s.at(i, j) = s.at(j, i) = rng.next_normal();
    }
    const auto sp = sym_eigs(s);
    for (int i = 0; i + 1 < m; ++i) CHECK(sp.values[i] <= sp.values[i + 1]);
    CHECK(sp.residual <= 1e-10 * (1.0 + s.frob_norm()));
  }
  RealMatrix bad(2);
  bad.at(0, 1) = 1.0;
  bad.at(1, 0) = 2.0;
  CHECK_THROWS_AS((void)sym_eigs(bad), Error);
}

TEST_CASE("arccot: branch and extended values") {
  CHECK(arccot(0.0) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(arccot(kInf) == 0.0);
  CHECK(arccot(-kInf) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(arccot(1.0) == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK_THROWS_AS((void)arccot(std::nan("")), Error);
}

TEST_CASE("arccot_interval: examples") {
  auto iv = arccot_interval(0.0, 0.0);
  CHECK(iv.theta_minus == doctest::Approx(-kPi / 2).epsilon(1e-15));
  CHECK(iv.theta_plus == doctest::Approx(kPi / 2).epsilon(1e-15));

  iv = arccot_interval(kInf, -kInf);  // empty index set
  CHECK(iv.theta_minus == doctest::Approx(-kPi).epsilon(1e-15));
  CHECK(iv.theta_plus == doctest::Approx(kPi).epsilon(1e-15));

  const double q = 1.0 / std::sqrt(3.0);  // arccot = pi/3
  iv = arccot_interval(q, q);
  CHECK(iv.theta_plus == doctest::Approx(kPi / 3).epsilon(1e-14));
  CHECK(iv.theta_minus == doctest::Approx(kPi / 3 - kPi).epsilon(1e-14));

  CHECK_THROWS_AS((void)arccot_interval(2.0, 1.0), Error);
  CHECK_THROWS_AS((void)arccot_interval(std::nan(""), 1.0), Error);
}

TEST_CASE("arccot_interval: width pi and antitone in the bounds") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const double q = 20.0 * rng.next_normal();
    const auto iv = arccot_interval(q, q);
    CHECK(iv.width() == doctest::Approx(kPi).epsilon(1e-13));
  }
  for (int trial = 0; trial < 200; ++trial) {
    double a = 5.0 * rng.next_normal(), b = 5.0 * rng.next_normal();
    if (a > b) std::swap(a, b);
    const double grow = std::abs(rng.next_normal());
    const auto inner = arccot_interval(a, b);
    const auto outer = arccot_interval(a - grow, b + grow);
    CHECK(outer.theta_minus >= inner.theta_minus - 1e-14);
    CHECK(outer.theta_plus <= inner.theta_plus + 1e-14);
  }
}
