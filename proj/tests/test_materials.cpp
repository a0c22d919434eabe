#include "pfto/materials.hpp"

#include <doctest.h>

#include <random>

using namespace pfto;

TEST_CASE("iota endpoints and shape") {
  for (double d : {0.002, 0.02, 1.0, 500.0}) {
    CHECK(iota(d, -1.0) == 1.0);
    CHECK(iota(d, 1.0) == d);
    // printed polynomial against the factored form 0.25(1-d)(phi-1)^2 + d
    for (double p : {-0.7, -0.1, 0.0, 0.4, 0.93})
      CHECK(iota(d, p) == doctest::Approx(0.25 * (1 - d) * (p - 1) * (p - 1) + d).epsilon(1e-14));
  }
  for (double p : {-1.0, -0.3, 0.5, 1.0}) CHECK(iota(1.0, p) == 1.0);
  CHECK_THROWS_AS(iota(2.0, 1.5), InfeasiblePhase);
  CHECK_THROWS_AS(iota(2.0, -1.0 - 1e-6), InfeasiblePhase);
}

TEST_CASE("diota matches a central difference") {
  for (double d : {0.002, 3.0, 500.0})
    for (double p : {-0.9, -0.2, 0.3, 0.8}) {
      const double h = 1e-6;
      double fd = (iota(d, p + h) - iota(d, p - h)) / (2 * h);
      CHECK(diota(d, p) == doctest::Approx(fd).epsilon(1e-7));
    }
  CHECK(diota(500.0, 1.0) == 0.0);
}

TEST_CASE("apply_C") {
  MaterialModel m = MaterialModel::from_lame(5000, 5000, 10, 10);
  Sym2 s = m.apply_C(-1.0, Sym2::identity());
  CHECK(s.xx == doctest::Approx(2 * 10 + 2 * 10));
  CHECK(s.yy == doctest::Approx(40.0));
  CHECK(s.xy == 0.0);
  Sym2 t = m.apply_C(1.0, Sym2::identity());
  CHECK(t.xx == doctest::Approx(20000.0));
  CHECK(t.yy == doctest::Approx(20000.0));
  Sym2 z = m.apply_C(0.3, Sym2{});
  CHECK(z == Sym2{});
  CHECK_THROWS_AS(Sym2::from_matrix(1, 2, 3, 4), InvalidInput);

  // linear in E, and symmetric as a bilinear form: C(a):b == a:C(b)
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 20; ++k) {
    Sym2 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    double phi = u(rng);
    CHECK(ddot(m.apply_C(phi, a), b) == doctest::Approx(ddot(a, m.apply_C(phi, b))).epsilon(1e-13));
    CHECK(ddot(m.apply_C(phi, a), a) >= m.coercivity() * ddot(a, a) * (1 - 1e-12));
  }
}

TEST_CASE("mirrored interpolation") {
  MaterialModel printed = MaterialModel::from_lame(5000, 4000, 10, 8);
  MaterialModel mirrored = MaterialModel::from_lame(5000, 4000, 10, 8, eigenstrain::Zero{}, Interpolation::Mirrored);
  for (double p : {-1.0, 1.0}) {
    CHECK(mirrored.lame(p)[0] == doctest::Approx(printed.lame(p)[0]).epsilon(1e-14));
    CHECK(mirrored.lame(p)[1] == doctest::Approx(printed.lame(p)[1]).epsilon(1e-14));
  }
  // same quadratic family with the vertex moved to phi = -1: monotone and convex
  double prev = 0.0;
  for (double p = -1.0; p <= 1.0; p += 0.125) {
    auto [l, m] = mirrored.lame(p);
    CHECK(l > prev);
    CHECK(l <= 0.5 * (1 + p) * 5000 + 0.5 * (1 - p) * 10 + 1e-9);  // below the chord
    prev = l;
    const double h = 1e-6;
    if (p > -1.0 + h && p < 1.0 - h) {
      CHECK(mirrored.dlame(p)[0] == doctest::Approx((mirrored.lame(p + h)[0] - mirrored.lame(p - h)[0]) / (2 * h)).epsilon(1e-7));
      CHECK(mirrored.dlame(p)[1] == doctest::Approx((mirrored.lame(p + h)[1] - mirrored.lame(p - h)[1]) / (2 * h)).epsilon(1e-7));
    }
    (void)m;
  }
  // soft diffuse layer versus the printed stiff one
  CHECK(mirrored.lame(0.0)[0] == doctest::Approx(0.25 * 5000 + 0.75 * 10));
  CHECK(printed.lame(0.0)[0] == doctest::Approx(0.75 * 5000 + 0.25 * 10));
  CHECK(mirrored.coercivity() == printed.coercivity());
}

TEST_CASE("apply_dC") {
  MaterialModel homog = MaterialModel::from_lame(5000, 5000, 5000, 5000);
  CHECK(homog.apply_dC(0.2, Sym2{1, 0.5, -2}) == Sym2{});
  MaterialModel m = MaterialModel::from_lame(5000, 5000, 10, 10);
  CHECK(m.apply_dC(1.0, Sym2{1, 0.5, -2}) == Sym2{});
  // finite difference of apply_C in phi
  Sym2 e{0.3, -0.2, 0.7};
  const double p = 0.1, h = 1e-6;
  Sym2 fd = (1.0 / (2 * h)) * (m.apply_C(p + h, e) - m.apply_C(p - h, e));
  Sym2 an = m.apply_dC(p, e);
  CHECK(an.xx == doctest::Approx(fd.xx).epsilon(1e-7));
  CHECK(an.xy == doctest::Approx(fd.xy).epsilon(1e-7));
  CHECK(an.yy == doctest::Approx(fd.yy).epsilon(1e-7));
}

TEST_CASE("eigenstrain variants") {
  MaterialModel zero = MaterialModel::from_lame(5000, 5000, 10, 10);
  CHECK(zero.eigenstrain(0.4) == Sym2{});
  CHECK(zero.d_eigenstrain(0.4) == Sym2{});
  CHECK_FALSE(zero.has_eigenstrain());

  MaterialModel iso = MaterialModel::from_lame(5000, 5000, 5, 5, eigenstrain::IsotropicLinear{0.08});
  Sym2 e = iso.eigenstrain(0.5);
  CHECK(e.xx == doctest::Approx(0.04));
  CHECK(e.yy == doctest::Approx(0.04));
  CHECK(e.xy == 0.0);
  CHECK(iso.d_eigenstrain(-0.3).xx == doctest::Approx(0.08));

  MaterialModel diag = MaterialModel::from_lame(5000, 5000, 5000, 5000, eigenstrain::DiagonalLinear{0.01});
  Sym2 d = diag.eigenstrain(-1.0);
  CHECK(d.xx == doctest::Approx(0.01));
  CHECK(d.yy == doctest::Approx(-0.01));
  CHECK(diag.d_eigenstrain(0.0).xx == doctest::Approx(-0.01));
}

TEST_CASE("material validation") {
  CHECK_THROWS_AS(MaterialModel(10, 0, 1, 1), InvalidInput);
  CHECK_THROWS_AS(MaterialModel(10, 10, 1, -1), InvalidInput);
  MaterialModel m(10, 10, 500, 500);
  CHECK(m.lame(1.0)[0] == doctest::Approx(5000));
  CHECK(m.lame(-1.0)[1] == doctest::Approx(10));
  CHECK(m.coercivity() == doctest::Approx(20));
  CHECK(m.continuity() == doctest::Approx(2 * 10 * 500 + 2 * 10 * 500));
}
