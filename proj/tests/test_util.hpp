#pragma once

#include "nsdt/fields.hpp"

namespace nsdt::testutil {

inline ScalarField mono(const Rational& c, unsigned e0, unsigned e1, unsigned e2, unsigned e3) {
  Polynomial p;
  p.add_term(c, {e0, e1, e2, e3});
  return ScalarField(p);
}

// The worked self-dual, non-basic triple: p = q = -2 x2 x3, r = (x2)^2 + (x3)^2.
struct WorkedExample {
  ScalarField p = mono(Rational(-2), 0, 0, 1, 1);
  ScalarField q = mono(Rational(-2), 0, 0, 1, 1);
  ScalarField r = mono(Rational(1), 0, 0, 2, 0) + mono(Rational(1), 0, 0, 0, 2);
};

}  // namespace nsdt::testutil
