#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace regldp {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", an integer, or a plain decimal such as "0.125" or "1e-3"
/// into an exact rational. Throws UsageError on anything else.
Rational parse_rational(std::string_view text);

/// Exact value of a finite double (every double is a dyadic rational).
Rational exact_rational(double value);

/// "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& r);

/// Natural log of a positive rational, accurate far beyond double range.
double log_rational(const Rational& r);

BigInt factorial(unsigned long m);

/// m!! for odd m >= 1; (-1)!! = 1.
BigInt double_factorial(long m);

}  // namespace regldp
