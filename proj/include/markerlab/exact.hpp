#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace markerlab {

using Integer = mpz_class;
using Rational = mpq_class;

/// Canonical rational from a numerator/denominator pair.
inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "p/q", an integer, or a finite decimal literal such as "0.25".
Rational parse_rational(const std::string& text);

/// "p/q" (or "p" when the denominator is 1).
inline std::string to_string(const Rational& q) { return q.get_str(); }

inline Integer pow2(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace markerlab
