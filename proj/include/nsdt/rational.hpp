#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "nsdt/errors.hpp"

namespace nsdt {

// Exact rational coefficient type. All polynomial identities in the
// library are decided over this ring, never over floating point.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Parses "num", "-num" or "num/den" with arbitrary-precision parts.
inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(s));
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw SpecParseError("rational with zero denominator: " + s);
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw SpecParseError("malformed rational: " + s);
  }
}

inline std::string rational_to_string(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

}  // namespace nsdt
