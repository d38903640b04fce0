#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lpdiss/refine.hpp"
#include "lpdiss/rng.hpp"
#include "lpdiss/scalar.hpp"
#include "lpdiss/system.hpp"

using namespace lpdiss;

namespace {
const double kPi = std::numbers::pi;

CoefficientField diag19(double trunc = -1) {
  ComplexMatrix a(2);
  a.at(0, 0) = 1.0;
  a.at(1, 1) = 9.0;
  (void)trunc;
  return CoefficientField::constant(a, DomainBox::interval(0.0, 1.0));
}

std::vector<Complex> cvec(std::initializer_list<Complex> v) { return v; }

SamplingPlan quick_plan(std::uint64_t seed = 3) {
  SamplingPlan plan;
  plan.seed = seed;
  plan.n_points = 8;
  plan.n_directions = 2048;
  plan.refine_iters = 35;
  return plan;
}
}  // namespace

TEST_CASE("pq_values: identity coefficients") {
  const ComplexMatrix id = ComplexMatrix::identity(2);
  const PExponent p(4.0);
  const auto lam = cvec({Complex(0.3, -0.4), Complex(0.5, 0.7)});
  const auto om = cvec({Complex(1.0 / std::sqrt(2)), Complex(0.0, 1.0 / std::sqrt(2))});
  const auto pq = pq_values(id, p, lam, om);
  Complex z = 0.0;
  double lam2 = 0.0;
  for (int j = 0; j < 2; ++j) {
    z += lam[j] * std::conj(om[j]);
    lam2 += std::norm(lam[j]);
  }
  CHECK(pq.p_val == doctest::Approx(lam2 - p.cp * z.real() * z.real()).epsilon(1e-14));
  // hand expansion: <w,l> - <l,w> = -2i Im<l,w>, so the identity matrix gives
  // q = 2 (1-2/p) Im<l,w> Re<l,w>
  CHECK(pq.q_val ==
        doctest::Approx(2.0 * p.t() * z.imag() * z.real()).epsilon(1e-13));

  // lambda = omega: P = 1 - cp = 4/(p p') and Q = 0 (the product is real)
  const auto pq2 = pq_values(id, p, om, om);
  CHECK(pq2.p_val == doctest::Approx(4.0 / (p.p * p.p_conj)).epsilon(1e-14));
  CHECK(pq2.q_val == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("pq_values: real symmetric coefficients with real vectors have q = 0") {
  ComplexMatrix a(2);
  a.at(0, 0) = 2.0;
  a.at(0, 1) = a.at(1, 0) = 0.5;
  a.at(1, 1) = 1.0;
  const PExponent p(3.0);
  const auto lam = cvec({1.5, -0.25});
  const auto om = cvec({0.6, 0.8});
  const auto pq = pq_values(a, p, lam, om);
  CHECK(pq.q_val == doctest::Approx(0.0).epsilon(1e-14));
  double alam = 0.0;
  // <A l, l> - cp <A w, w> <l, w>^2 for real data
  const std::vector<double> l{1.5, -0.25}, w{0.6, 0.8};
  RealMatrix ar(2);
  ar.at(0, 0) = 2.0;
  ar.at(0, 1) = ar.at(1, 0) = 0.5;
  ar.at(1, 1) = 1.0;
  const double lw = l[0] * w[0] + l[1] * w[1];
  alam = sym_form(ar, l) - p.cp * sym_form(ar, w) * lw * lw;
  CHECK(pq.p_val == doctest::Approx(alam).epsilon(1e-14));
}

TEST_CASE("pq_values: worked diag(1,9) value at p = 10") {
  ComplexMatrix a(2);
  a.at(0, 0) = 1.0;
  a.at(1, 1) = 9.0;
  const auto pq = pq_values(a, PExponent(10.0), cvec({0.0, 1.0}), cvec({0.0, 1.0}));
  CHECK(pq.p_val == doctest::Approx(3.24).epsilon(1e-12));  // 9 - 0.64 * 9
}

TEST_CASE("pq_values: phase invariance and lambda homogeneity") {
  SplitMix64 rng(17);
  ComplexMatrix a(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a.at(i, j) = Complex(rng.next_normal(), rng.next_normal());
  const PExponent p(3.7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Complex> lam(3), om(3);
    double nw = 0.0;
    for (auto& z : lam) z = Complex(rng.next_normal(), rng.next_normal());
    for (auto& z : om) {
      z = Complex(rng.next_normal(), rng.next_normal());
      nw += std::norm(z);
    }
    for (auto& z : om) z /= std::sqrt(nw);
    const auto base = pq_values(a, p, lam, om);

    const double alpha = 2.0 * kPi * rng.next_double();
    const Complex ph = std::exp(Complex(0, alpha));
    std::vector<Complex> lam2 = lam, om2 = om;
    for (auto& z : lam2) z *= ph;
    for (auto& z : om2) z *= ph;
    const auto rot = pq_values(a, p, lam2, om2);
    CHECK(rot.p_val == doctest::Approx(base.p_val).epsilon(5e-12));
    CHECK(rot.q_val == doctest::Approx(base.q_val).epsilon(5e-12));

    const double t = rng.next_normal();
    std::vector<Complex> lam3 = lam;
    for (auto& z : lam3) z *= t;
    const auto sc = pq_values(a, p, lam3, om);
    CHECK(sc.p_val == doctest::Approx(t * t * base.p_val).epsilon(5e-12));
  }
  CHECK_THROWS_AS((void)pq_values(a, p, cvec({1.0, 0.0, 0.0}), cvec({2.0, 0.0, 0.0})),
                  Error);
}

TEST_CASE("system_check: identity blocks hold with the conjugate-product margin") {
  std::vector<CoefficientField> fields{CoefficientField::constant(
      ComplexMatrix::identity(2), DomainBox::interval(0.0, 1.0))};
  for (double p : {1.5, 2.0, 6.0}) {
    const auto sv = system_check(fields, PExponent(p), quick_plan());
    CHECK(sv.overall.status == Status::holds);
    const PExponent pe(p);
    CHECK(sv.overall.margin >= 4.0 / (pe.p * pe.p_conj) - 1e-9);
  }
}

TEST_CASE("system_check: diag(1,9) window [1.25, 5]") {
  std::vector<CoefficientField> fields{diag19()};
  CHECK(system_check(fields, PExponent(4.0), quick_plan()).overall.status ==
        Status::holds);
  const auto failing = system_check(fields, PExponent(10.0), quick_plan());
  CHECK(failing.overall.status == Status::fails);
  REQUIRE(failing.overall.witness.has_value());
  const auto& w = *failing.overall.witness;
  // recompute the form at the reported witness
  const auto pq = pq_values(fields[0].eval(w.x), PExponent(10.0), w.lambda, w.omega);
  CHECK(pq.p_val < 0.0);
  CHECK(pq.p_val == doctest::Approx(failing.overall.margin).epsilon(1e-9));
}

TEST_CASE("sym_system_check: examples and boundary") {
  std::vector<CoefficientField> id{CoefficientField::constant(
      ComplexMatrix::identity(2), DomainBox::interval(0.0, 1.0))};
  for (double p : {1.1, 2.0, 50.0})
    CHECK(sym_system_check(id, PExponent(p), quick_plan()).overall.status ==
          Status::holds);

  std::vector<CoefficientField> f{diag19()};
  const auto at5 = sym_system_check(f, PExponent(5.0), quick_plan());
  CHECK(at5.overall.status == Status::holds);
  CHECK(at5.overall.boundary);
  CHECK(sym_system_check(f, PExponent(5.0 + 1e-6), quick_plan()).overall.status ==
        Status::fails);
  CHECK(sym_system_check(f, PExponent(5.0 / 4.0), quick_plan()).overall.status ==
        Status::holds);
  CHECK(sym_system_check(f, PExponent(5.0 / 4.0 - 1e-6), quick_plan()).overall.status ==
        Status::fails);
}

TEST_CASE("sym_system_check: rejects complex and indefinite samples") {
  ComplexMatrix c(2);
  c.at(0, 0) = 1.0;
  c.at(0, 1) = Complex(0, 0.5);
  c.at(1, 0) = Complex(0, 0.5);
  c.at(1, 1) = 1.0;
  std::vector<CoefficientField> fc{
      CoefficientField::constant(c, DomainBox::interval(0.0, 1.0))};
  CHECK_THROWS_AS((void)sym_system_check(fc, PExponent(2.0), quick_plan()), Error);

  ComplexMatrix neg(2);
  neg.at(0, 0) = -1.0;
  neg.at(1, 1) = 1.0;
  std::vector<CoefficientField> fn{
      CoefficientField::constant(neg, DomainBox::interval(0.0, 1.0))};
  CHECK_THROWS_AS((void)sym_system_check(fn, PExponent(2.0), quick_plan()), Error);
}

TEST_CASE("sym_system_check: conjugate-exponent duality") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    RealMatrix s(2);
    const double d1 = 0.5 + rng.next_double(), d2 = 0.5 + 3.0 * rng.next_double();
    s.at(0, 0) = d1;
    s.at(1, 1) = d2;
    const double c = 0.3 * rng.next_normal();
    s.at(0, 1) = s.at(1, 0) = c * std::sqrt(d1 * d2) * 0.5;
    ComplexMatrix a(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a.at(i, j) = s.at(i, j);
    std::vector<CoefficientField> f{
        CoefficientField::constant(a, DomainBox::interval(0.0, 1.0))};
    const double p = 1.05 + 8.0 * rng.next_double();
    const auto v1 = sym_system_check(f, PExponent(p), quick_plan());
    const auto v2 = sym_system_check(f, PExponent(p).conjugate(), quick_plan());
    CHECK(v1.overall.status == v2.overall.status);
  }
}

TEST_CASE("sym_p_interval: examples") {
  auto iv = sym_p_interval(1.0, 1.0);
  CHECK(!iv.empty);
  CHECK(iv.p_lo == 1.0);
  CHECK(!iv.closed_lo);
  CHECK(std::isinf(iv.p_hi));

  iv = sym_p_interval(1.0, 9.0);
  CHECK(iv.p_lo == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(iv.p_hi == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(iv.closed_lo);
  CHECK(iv.contains(2.0));
  CHECK(1.0 / iv.p_lo + 1.0 / iv.p_hi == doctest::Approx(1.0).epsilon(1e-12));

  iv = sym_p_interval(0.0, 1.0);
  CHECK(iv.p_lo == 2.0);
  CHECK(iv.p_hi == 2.0);

  CHECK_THROWS_AS((void)sym_p_interval(-1.0, 1.0), Error);
}

TEST_CASE("sym_p_interval: conjugate endpoints on random inputs") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const double mu1 = 0.01 + rng.next_double();
    const double mum = mu1 + 4.0 * rng.next_double();
    const auto iv = sym_p_interval(mu1, mum);
    if (std::isinf(iv.p_hi)) continue;
    CHECK(1.0 / iv.p_lo + 1.0 / iv.p_hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iv.contains(2.0));
  }
}

TEST_CASE("positivity_necessary: examples") {
  auto make = [](std::vector<Complex> e) {
    return std::vector<CoefficientField>{CoefficientField::constant(
        ComplexMatrix(2, std::move(e)), DomainBox::interval(0.0, 1.0))};
  };
  const auto id = make({1.0, 0.0, 0.0, 1.0});
  auto v = positivity_necessary(id, quick_plan());
  CHECK(v.status == Status::holds);
  CHECK(v.margin == doctest::Approx(1.0).epsilon(1e-10));

  const auto neg = make({-1.0, 0.0, 0.0, -1.0});
  CHECK(positivity_necessary(neg, quick_plan()).status == Status::fails);

  const auto skew = make({0.0, 1.0, -1.0, 0.0});
  v = positivity_necessary(skew, quick_plan());
  CHECK(v.status == Status::holds);
  CHECK(v.margin == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(v.boundary);
}

TEST_CASE("shift_lower_bound: eigenvalue fast path") {
  std::vector<CoefficientField> f{diag19()};
  auto r = shift_lower_bound(f, PExponent(2.0), quick_plan());
  CHECK(r.exists);
  CHECK(r.criterion_value == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.k_sup == doctest::Approx(1.0).epsilon(1e-10));

  std::vector<CoefficientField> id{CoefficientField::constant(
      ComplexMatrix::identity(2), DomainBox::interval(0.0, 1.0))};
  r = shift_lower_bound(id, PExponent(2.0), quick_plan());
  CHECK(r.exists);
  CHECK(r.k_sup == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("shift_upper_bound: constant fields always admit an upper shift") {
  std::vector<CoefficientField> f{diag19()};
  const auto r = shift_upper_bound(f, PExponent(3.0), quick_plan());
  CHECK(r.exists);
  bool has_supmu = false;
  for (const auto& note : r.notes)
    has_supmu = has_supmu || note.find("9.0") != std::string::npos;
  CHECK(has_supmu);
}

TEST_CASE("sphere_product_max: closed form against brute maximization") {
  CHECK(sphere_product_max(std::vector<double>{1.0, 1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(sphere_product_max(std::vector<double>{1.0, 9.0}) ==
        doctest::Approx(100.0 / 36.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)sphere_product_max(std::vector<double>{0.0, 1.0}), Error);
  CHECK_THROWS_AS((void)sphere_product_max(std::vector<double>{2.0, 1.0}), Error);

  // brute-force oracle: sample + coordinate refinement of the product form
  auto brute = [](const std::vector<double>& mu) {
    SplitMix64 rng(4242);
    const int m = int(mu.size());
    auto value = [&](const std::vector<double>& w) {
      double n2 = 0.0;
      for (double c : w) n2 += c * c;
      if (n2 < 1e-24) return -1.0;
      double s1 = 0.0, s2 = 0.0;
      for (int j = 0; j < m; ++j) {
        s1 += mu[j] * w[j] * w[j] / n2;
        s2 += w[j] * w[j] / (mu[j] * n2);
      }
      return s1 * s2;
    };
    std::vector<double> best(m);
    double best_val = -1.0;
    for (int trial = 0; trial < 4000; ++trial) {
      std::vector<double> w(m);
      for (auto& c : w) c = rng.next_normal();
      const double v = value(w);
      if (v > best_val) {
        best_val = v;
        best = w;
      }
    }
    RefineOptions opt;
    opt.rounds = 60;
    auto obj = [&](const std::vector<double>& w) { return -value(w); };
    std::vector<double> widths(m, 0.5);
    const double refined = -coordinate_refine(obj, best, widths, opt, 99);
    return std::max(best_val, refined);
  };

  const std::vector<double> mu124{1.0, 2.0, 4.0};
  CHECK(sphere_product_max(mu124) == doctest::Approx(25.0 / 16.0).epsilon(1e-12));
  CHECK(std::abs(sphere_product_max(mu124) - brute(mu124)) < 1e-6);
  const std::vector<double> mu19{1.0, 9.0};
  CHECK(std::abs(sphere_product_max(mu19) - brute(mu19)) < 1e-6);
}

TEST_CASE("system_angle: real symmetric field at p = 2 spans a half turn") {
  std::vector<CoefficientField> f{diag19()};
  const auto iv = system_angle(f, PExponent(2.0), quick_plan());
  CHECK(iv.theta_plus == doctest::Approx(kPi / 2).epsilon(1e-9));
  CHECK(iv.theta_minus == doctest::Approx(-kPi / 2).epsilon(1e-9));
}

TEST_CASE("system_angle: zero field leaves every rotation admissible") {
  std::vector<CoefficientField> f{
      CoefficientField::constant(ComplexMatrix(1), DomainBox::interval(0.0, 1.0))};
  const auto iv = system_angle(f, PExponent(3.0), quick_plan());
  CHECK(iv.theta_minus == doctest::Approx(-kPi).epsilon(1e-12));
  CHECK(iv.theta_plus == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("system_angle: errors when the base criterion fails") {
  std::vector<CoefficientField> f{diag19()};
  CHECK_THROWS_AS((void)system_angle(f, PExponent(10.0), quick_plan()),
                  PreconditionError);
}

TEST_CASE("system_angle: rotations inside the interval keep the check passing") {
  std::vector<CoefficientField> f{diag19()};
  const PExponent p(3.0);
  const auto iv = system_angle(f, p, quick_plan());
  ComplexMatrix base(2);
  base.at(0, 0) = 1.0;
  base.at(1, 1) = 9.0;
  for (int k = 0; k < 6; ++k) {
    const double th =
        iv.theta_minus + 2e-3 + (iv.width() - 4e-3) * k / 5.0;
    std::vector<CoefficientField> rot{CoefficientField::constant(
        std::exp(Complex(0, th)) * base, DomainBox::interval(0.0, 1.0))};
    CHECK(system_check(rot, p, quick_plan()).overall.status == Status::holds);
  }
  for (double th : {iv.theta_plus + 1e-2, iv.theta_minus - 1e-2}) {
    std::vector<CoefficientField> rot{CoefficientField::constant(
        std::exp(Complex(0, th)) * base, DomainBox::interval(0.0, 1.0))};
    CHECK(system_check(rot, p, quick_plan()).overall.status == Status::fails);
  }
}

TEST_CASE("scalar consistency: m = 1 systems match the scalar criterion") {
  SplitMix64 rng(3535);
  for (int trial = 0; trial < 12; ++trial) {
    const double phase = 2.0 * kPi * rng.next_double();
    ComplexMatrix a(1);
    a.at(0, 0) = std::exp(Complex(0, phase));
    std::vector<CoefficientField> sys{
        CoefficientField::constant(a, DomainBox::interval(0.0, 1.0))};
    const auto scalar_f = CoefficientField::constant(a, DomainBox::interval(0.0, 1.0));
    const double p = 1.2 + 6.0 * rng.next_double();
    const auto sys_v = system_check(sys, PExponent(p), quick_plan());
    const auto sc_v = scalar_check(scalar_f, PExponent(p), quick_plan());
    if (sys_v.overall.boundary || sc_v.boundary) continue;
    CHECK(sys_v.overall.status == sc_v.status);
  }
}

TEST_CASE("system_check: two-direction diagonal system") {
  ComplexMatrix a(2), b(2);
  a.at(0, 0) = 1.0;
  a.at(1, 1) = 9.0;
  b.at(0, 0) = 2.0;
  b.at(1, 1) = 2.0;
  const DomainBox box = DomainBox::unit(2);
  std::vector<CoefficientField> fields{CoefficientField::constant(a, box),
                                       CoefficientField::constant(b, box)};
  const auto sv = sym_system_check(fields, PExponent(4.0), quick_plan());
  REQUIRE(sv.per_h.size() == 2);
  CHECK(sv.overall.status == Status::holds);
  // the wider-spectrum direction is binding at p = 10
  const auto fail10 = system_check(fields, PExponent(10.0), quick_plan());
  CHECK(fail10.overall.status == Status::fails);
  REQUIRE(fail10.overall.witness.has_value());
  CHECK(fail10.overall.witness->h == 0);
}

TEST_CASE("general2d_necessary: decoupled identity blocks pass") {
  std::vector<CoefficientField> blocks;
  DomainBox box = DomainBox::unit(2);
  for (int h = 0; h < 2; ++h)
    for (int k = 0; k < 2; ++k) {
      ComplexMatrix b(2);
      if (h == k) b = ComplexMatrix::identity(2);
      blocks.push_back(CoefficientField::constant(b, box));
    }
  for (double p : {1.5, 7.0}) {
    const auto v = general2d_necessary(blocks, PExponent(p), quick_plan());
    CHECK(v.status == Status::holds);
    bool labelled = false;
    for (const auto& note : v.notes)
      labelled = labelled || note.find("NECESSARY-ONLY") != std::string::npos;
    CHECK(labelled);
  }
  std::vector<CoefficientField> three(blocks.begin(), blocks.begin() + 3);
  CHECK_THROWS_AS((void)general2d_necessary(three, PExponent(2.0), quick_plan()),
                  Error);
}
