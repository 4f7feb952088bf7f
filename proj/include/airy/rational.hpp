#pragma once

#include <gmpxx.h>

#include <string>

namespace airy {

// Exact scalar. mpq_class keeps values canonical (gcd 1, positive denominator)
// after every arithmetic operation.
using Rational = mpq_class;
using BigInt = mpz_class;

// Accepts "p", "p/q", or a terminating decimal such as "1.5" or "-0.25".
Rational parse_rational(const std::string& text);

// "num/den" (always with the slash, even for integers).
std::string to_fraction_string(const Rational& q);

double to_double(const Rational& q);

Rational pow(const Rational& base, long exponent);

// True when the value is an integer.
bool is_integer(const Rational& q);

}  // namespace airy
