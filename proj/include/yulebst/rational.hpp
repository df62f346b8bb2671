#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace yulebst {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rational(long long num, long long den = 1) { return Rational(BigInt(num), BigInt(den)); }

inline Rational rational_pow(const Rational& base, unsigned exponent) {
  Rational result = 1;
  Rational b = base;
  while (exponent != 0) {
    if (exponent & 1u) result *= b;
    b *= b;
    exponent >>= 1;
  }
  return result;
}

}  // namespace yulebst
