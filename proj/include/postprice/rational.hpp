#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace postprice {

// Exact arithmetic for prices and probabilities. Expression templates are
// disabled so `auto` and lambdas capture values, not pending expressions.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

// Accepts "12", "-3", "0.125", "1.5e-3" and "7/40". Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// Terminating decimals are printed as decimals, everything else as "p/q".
std::string format_rational(const Rational& q);

double to_double(const Rational& q);

// The exact binary value of `x`; throws on NaN or infinity.
Rational from_double(double x);

// Shortest decimal that round-trips `x`, parsed exactly ("0.1" -> 1/10).
Rational from_decimal_double(double x);

Rational floor_rational(const Rational& q);
Rational ceil_rational(const Rational& q);

// True if q is an integer multiple of 1/m.
bool is_multiple_of_inverse(const Rational& q, long long m);

}  // namespace postprice
