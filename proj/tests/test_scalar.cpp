#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lpdiss/rng.hpp"
#include "lpdiss/scalar.hpp"

using namespace lpdiss;

namespace {
const double kPi = std::numbers::pi;

CoefficientField const_field(std::vector<Complex> entries, int m) {
  return CoefficientField::constant(ComplexMatrix(m, std::move(entries)),
                                    DomainBox::unit(m));
}

// Re = I, Im = [[0,1],[1,0]]: dissipative iff p^2 - 8p + 8 <= 0
CoefficientField skew_phase_field() {
  return const_field({1.0, Complex(0, 1), Complex(0, 1), 1.0}, 2);
}

SamplingPlan quick_plan(std::uint64_t seed = 7) {
  SamplingPlan plan;
  plan.seed = seed;
  plan.n_points = 8;
  plan.n_directions = 256;
  plan.refine_iters = 30;
  return plan;
}
}  // namespace

TEST_CASE("PExponent: conjugate identity") {
  for (double p : {1.2, 2.0, 3.0, 7.5, 19.0}) {
    const PExponent pe(p);
    CHECK(std::abs(4.0 / (pe.p * pe.p_conj) - (1.0 - pe.cp)) <= 1e-15);
    CHECK(pe.cp >= 0.0);
    CHECK(pe.cp < 1.0);
  }
  CHECK_THROWS_AS(PExponent(1.0), Error);
  CHECK_THROWS_AS(PExponent(0.5), Error);
}

TEST_CASE("scalar_check: identity coefficients hold with margin 2 sqrt(p-1)") {
  const auto id = CoefficientField::constant(ComplexMatrix::identity(2),
                                             DomainBox::unit(2));
  for (double p : {1.5, 2.0, 4.0, 11.0}) {
    const auto v = scalar_check(id, PExponent(p), quick_plan());
    CHECK(v.status == Status::holds);
    CHECK(v.margin == doctest::Approx(2.0 * std::sqrt(p - 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("scalar_check: p-window of the phase-coupled field") {
  const auto f = skew_phase_field();
  CHECK(scalar_check(f, PExponent(7.0), quick_plan()).status == Status::fails);
  CHECK(scalar_check(f, PExponent(3.0), quick_plan()).status == Status::holds);
  const auto failing = scalar_check(f, PExponent(7.0), quick_plan());
  REQUIRE(failing.witness.has_value());
  CHECK(failing.witness->value < 0.0);
  CHECK(failing.witness->value == doctest::Approx(failing.margin));
}

TEST_CASE("scalar_check: asymmetric imaginary part violates the hypothesis") {
  const auto bad = const_field({1.0, Complex(0, 1), Complex(0, -1), 1.0}, 2);
  CHECK_THROWS_AS((void)scalar_check(bad, PExponent(3.0), quick_plan()), Error);
}

TEST_CASE("scalar_check: verdict invariant under positive scaling") {
  const auto f = skew_phase_field();
  for (double c : {0.25, 3.0, 17.0}) {
    CHECK(scalar_check(f.scaled(c), PExponent(7.0), quick_plan()).status ==
          Status::fails);
    CHECK(scalar_check(f.scaled(c), PExponent(3.0), quick_plan()).status ==
          Status::holds);
  }
}

TEST_CASE("scalar_lambda_bounds: examples") {
  const auto real = CoefficientField::constant(ComplexMatrix::identity(2),
                                               DomainBox::unit(2));
  auto lb = scalar_lambda_bounds(real, quick_plan());
  CHECK(!lb.xi_empty);
  CHECK(lb.lambda1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lb.lambda2 == doctest::Approx(0.0).epsilon(1e-12));

  lb = scalar_lambda_bounds(skew_phase_field(), quick_plan());
  CHECK(lb.lambda1 == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(lb.lambda2 == doctest::Approx(1.0).epsilon(1e-9));

  const auto imag_id = const_field({Complex(0, 1), 0.0, 0.0, Complex(0, 1)}, 2);
  lb = scalar_lambda_bounds(imag_id, quick_plan());
  CHECK(lb.xi_empty);
  CHECK(lb.lambda1 == std::numeric_limits<double>::infinity());
  CHECK(lb.lambda2 == -std::numeric_limits<double>::infinity());
}

TEST_CASE("scalar_angle: real coefficients") {
  const auto real = CoefficientField::constant(ComplexMatrix::identity(2),
                                               DomainBox::unit(2));
  auto rep = scalar_angle(real, PExponent(4.0), quick_plan());
  CHECK(rep.interval.theta_plus == doctest::Approx(kPi / 3).epsilon(1e-10));
  CHECK(rep.interval.theta_minus == doctest::Approx(-kPi / 3).epsilon(1e-10));
  CHECK(rep.interval.contains(0.0));

  rep = scalar_angle(real, PExponent(2.0), quick_plan());
  CHECK(rep.interval.theta_plus == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(rep.interval.theta_minus == doctest::Approx(-kPi / 2).epsilon(1e-12));
}

TEST_CASE("scalar_angle: phase-coupled field at p = 2") {
  const auto rep = scalar_angle(skew_phase_field(), PExponent(2.0), quick_plan());
  CHECK(rep.interval.theta_plus == doctest::Approx(kPi / 4).epsilon(1e-8));
  CHECK(rep.interval.theta_minus == doctest::Approx(-kPi / 4).epsilon(1e-8));
}

TEST_CASE("scalar_angle: precondition failure carries the witness") {
  CHECK_THROWS_AS((void)scalar_angle(skew_phase_field(), PExponent(7.0), quick_plan()),
                  PreconditionError);
}

TEST_CASE("scalar_angle: rotation consistency for the constant field") {
  const auto f = skew_phase_field();
  const PExponent p(2.5);
  const auto rep = scalar_angle(f, p, quick_plan());
  for (int k = 0; k < 12; ++k) {
    const double inside = rep.interval.theta_minus + 1e-3 +
                          (rep.interval.width() - 2e-3) * k / 11.0;
    const Complex z = std::exp(Complex(0.0, inside));
    const auto rotated = CoefficientField::constant(
        z * ComplexMatrix(2, {1.0, Complex(0, 1), Complex(0, 1), 1.0}),
        DomainBox::unit(2));
    CHECK(scalar_check(rotated, p, quick_plan()).status == Status::holds);
  }
  for (double outside : {rep.interval.theta_plus + 1e-2, rep.interval.theta_minus - 1e-2}) {
    const Complex z = std::exp(Complex(0.0, outside));
    const auto rotated = CoefficientField::constant(
        z * ComplexMatrix(2, {1.0, Complex(0, 1), Complex(0, 1), 1.0}),
        DomainBox::unit(2));
    CHECK(scalar_check(rotated, p, quick_plan()).status == Status::fails);
  }
}

TEST_CASE("scalar_check: unit-direction margin equals the homogeneous form") {
  // degree-2 homogeneity of both sides of the criterion
  const auto f = skew_phase_field();
  const PExponent p(3.0);
  SplitMix64 rng(31);
  const auto a = f.eval(f.box().center());
  auto [re, im] = re_im_split(a);
  const double two_sqrt = 2.0 * std::sqrt(p.p - 1.0);
  const double aq = std::abs(p.p - 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xi{rng.next_normal(), rng.next_normal()};
    const double nrm = std::hypot(xi[0], xi[1]);
    if (nrm < 1e-12) continue;
    const double graw = two_sqrt * sym_form(re, xi) - aq * std::abs(sym_form(im, xi));
    std::vector<double> u{xi[0] / nrm, xi[1] / nrm};
    const double gunit = two_sqrt * sym_form(re, u) - aq * std::abs(sym_form(im, u));
    CHECK(graw / (nrm * nrm) == doctest::Approx(gunit).epsilon(1e-12));
  }
}

TEST_CASE("real_scalar_angle: values and conjugate symmetry") {
  auto iv = real_scalar_angle(PExponent(4.0));
  CHECK(iv.theta_plus == doctest::Approx(kPi / 3).epsilon(1e-14));
  CHECK(iv.theta_minus == doctest::Approx(-kPi / 3).epsilon(1e-14));

  iv = real_scalar_angle(PExponent(2.0));
  CHECK(iv.theta_plus == doctest::Approx(kPi / 2).epsilon(1e-14));

  for (double p : {3.0, 1.5, 7.7, 1.01}) {
    const auto a = real_scalar_angle(PExponent(p));
    const auto b = real_scalar_angle(PExponent(p).conjugate());
    CHECK(a.theta_plus == doctest::Approx(b.theta_plus).epsilon(1e-12));
    CHECK(a.theta_minus == doctest::Approx(b.theta_minus).epsilon(1e-12));
  }
}

TEST_CASE("scalar_check: asymmetric real part warns but does not error") {
  const auto f = const_field({1.0, 0.4, 0.0, 1.0}, 2);  // Re asymmetric, Im = 0
  const auto v = scalar_check(f, PExponent(3.0), quick_plan());
  CHECK(v.status == Status::holds);
  bool warned = false;
  for (const auto& note : v.notes)
    warned = warned || note.find("not symmetric") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("scalar_angle: vanishing real form drives the upper angle to zero") {
  // a(x) = x^2 + i on (-1, 1): the quotient is 1/x^2, with supremum +inf
  // approached at the origin, so no positive rotation survives at p = 2
  std::vector<std::vector<ExprAst>> entries(1);
  entries[0] = {parse_expr("x1^2 + i", 1)};
  const auto f = CoefficientField::expression(std::move(entries),
                                              DomainBox::interval(-1.0, 1.0));
  SamplingPlan plan = quick_plan(19);
  plan.n_points = 64;
  const auto rep = scalar_angle(f, PExponent(2.0), plan);
  CHECK(rep.interval.theta_plus >= 0.0);
  CHECK(rep.interval.theta_plus <= 1e-3);
  CHECK(rep.interval.theta_minus ==
        doctest::Approx(std::atan2(1.0, 1.0) - kPi).epsilon(1e-6));
}

TEST_CASE("scalar_check: expression field is labelled sampled") {
  std::vector<std::vector<ExprAst>> entries(1);
  entries[0] = {parse_expr("1+x1^2", 1)};
  const auto f = CoefficientField::expression(std::move(entries),
                                              DomainBox::interval(0.0, 1.0));
  const auto v = scalar_check(f, PExponent(3.0), quick_plan());
  CHECK(v.status == Status::holds);
  bool found = false;
  for (const auto& note : v.notes) found = found || note.find("sampled") != std::string::npos;
  CHECK(found);
}
