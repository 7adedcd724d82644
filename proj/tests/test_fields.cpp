#include <doctest.h>

#include <cmath>
#include <random>

#include "nsdt/fields.hpp"
#include "test_util.hpp"

using namespace nsdt;
using testutil::mono;

TEST_CASE("polynomial evaluation") {
  ScalarField f = mono(Rational(1), 0, 0, 1, 1);  // x2 x3
  CHECK(f.evaluate({{0.0, 0.0, 2.0, 3.0}}) == doctest::Approx(6.0));

  ScalarField z = ScalarField::zero();
  CHECK(z.evaluate({{1.0, -2.0, 3.0, 4.0}}) == 0.0);

  ScalarField p = mono(Rational(-2), 0, 0, 1, 1);
  CHECK(p.evaluate({{1.0, 1.0, 1.0, 1.0}}) == doctest::Approx(-2.0));
}

TEST_CASE("evaluation rejects non-finite input and output") {
  ScalarField f = mono(Rational(1), 1, 0, 0, 0);
  ChartPoint bad{{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0}};
  CHECK_THROWS_AS(f.evaluate(bad), EvaluationError);

  ScalarField nan_cb([](const ChartPoint&) { return std::nan(""); });
  CHECK_THROWS_AS(nan_cb.evaluate({{0, 0, 0, 0}}), EvaluationError);
}

TEST_CASE("polynomial differentiation") {
  ScalarField r = mono(Rational(1), 0, 0, 2, 0) + mono(Rational(1), 0, 0, 0, 2);
  ScalarField d2r = r.derivative(2);
  CHECK((d2r - mono(Rational(2), 0, 0, 1, 0)).is_identically_zero());

  ScalarField p = mono(Rational(-2), 0, 0, 1, 1);
  ScalarField mixed = p.derivative(2).derivative(3);
  CHECK((mixed - ScalarField::constant(Rational(-2))).is_identically_zero());

  ScalarField f = mono(Rational(1), 0, 0, 1, 1);
  CHECK(f.derivative(0).is_identically_zero());
}

TEST_CASE("is_identically_zero") {
  ScalarField x2 = ScalarField::variable(2);
  CHECK((x2 - x2).is_identically_zero());
  CHECK_FALSE(ScalarField::variable(0).is_identically_zero());

  ScalarField tiny([](const ChartPoint&) { return 1e-14; });
  CHECK(tiny.is_identically_zero(1e-10, 32));
  CHECK_FALSE(tiny.is_identically_zero(1e-16, 32));
}

TEST_CASE("mixed partials commute exactly on random polynomials") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coeff(-5, 5), expo(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial poly;
    for (int t = 0; t < 6; ++t)
      poly.add_term(Rational(coeff(rng)),
                    {static_cast<unsigned>(expo(rng)), static_cast<unsigned>(expo(rng)),
                     static_cast<unsigned>(expo(rng)), static_cast<unsigned>(expo(rng))});
    ScalarField f(poly);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        CHECK((f.derivative(i).derivative(j) - f.derivative(j).derivative(i))
                  .is_identically_zero());
  }
}

TEST_CASE("polynomial derivative matches analytic values at points") {
  // f = 3 x0 (x2)^2 - 2 x1 x3; df/dx2 = 6 x0 x2.
  ScalarField f = mono(Rational(3), 1, 0, 2, 0) + mono(Rational(-2), 0, 1, 0, 1);
  ChartPoint pt{{1.5, -0.5, 2.0, 0.25}};
  CHECK(f.derivative(2).evaluate(pt) == doctest::Approx(6.0 * 1.5 * 2.0));
  CHECK(f.derivative(1).evaluate(pt) == doctest::Approx(-2.0 * 0.25));
}

TEST_CASE("callback differentiation agrees with polynomial to O(h^2)") {
  ScalarField poly = mono(Rational(1), 0, 0, 3, 1) + mono(Rational(2), 1, 0, 0, 2);
  ScalarField cb([poly](const ChartPoint& p) { return poly.evaluate(p); }, 1e-5);
  ChartPoint pt{{0.3, -0.7, 1.1, 0.9}};
  for (int axis = 0; axis < 4; ++axis) {
    double exact = poly.derivative(axis).evaluate(pt);
    double numeric = cb.derivative(axis).evaluate(pt);
    CHECK(std::abs(exact - numeric) < 1e-7);
  }
}

TEST_CASE("field arithmetic mixes backends") {
  ScalarField poly = mono(Rational(2), 0, 0, 1, 0);
  ScalarField cb([](const ChartPoint& p) { return p[3]; });
  ScalarField sum = poly + cb;
  CHECK_FALSE(sum.is_polynomial());
  CHECK(sum.evaluate({{0, 0, 1.5, 2.5}}) == doctest::Approx(5.5));

  ScalarField prod = poly * poly;
  CHECK(prod.is_polynomial());
  CHECK((prod - mono(Rational(4), 0, 0, 2, 0)).is_identically_zero());
}
