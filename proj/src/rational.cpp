#include "regldp/rational.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "regldp/errors.hpp"

namespace regldp {

namespace {

BigInt parse_integer_digits(std::string_view digits) {
  BigInt value = 0;
  for (char c : digits) value = value * 10 + (c - '0');
  return value;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

BigInt pow10(long e) {
  BigInt r = 1;
  for (long i = 0; i < e; ++i) r *= 10;
  return r;
}

Rational parse_decimal(std::string_view text) {
  const std::string original(text);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6)
      throw UsageError("not a number: '" + original + "'");
    exponent = std::stol(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }
  std::string_view int_part = text, frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part)))
    throw UsageError("not a number: '" + original + "'");
  BigInt digits = parse_integer_digits(std::string(int_part) + std::string(frac_part));
  exponent -= static_cast<long>(frac_part.size());
  Rational r = exponent >= 0 ? Rational(digits * pow10(exponent))
                             : Rational(digits, pow10(-exponent));
  return negative ? Rational(-r) : r;
}

double log_bigint(const BigInt& x) {
  const unsigned bits = boost::multiprecision::msb(x);
  if (bits < 900) return std::log(x.convert_to<double>());
  const unsigned shift = bits - 60;
  const BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const Rational num = parse_decimal(text.substr(0, slash));
    const Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw UsageError("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text);
}

Rational exact_rational(double value) {
  if (!std::isfinite(value)) throw UsageError("exact_rational: non-finite value");
  if (value == 0.0) return Rational(0);
  int exp = 0;
  const double mantissa = std::frexp(value, &exp);
  // mantissa * 2^53 is an exact integer
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exp -= 53;
  BigInt num = scaled;
  if (exp >= 0) return Rational(num << exp);
  return Rational(num, BigInt(1) << -exp);
}

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double log_rational(const Rational& r) {
  if (r <= 0) {
    if (r == 0) return -std::numeric_limits<double>::infinity();
    throw UsageError("log_rational: negative argument");
  }
  return log_bigint(boost::multiprecision::numerator(r)) -
         log_bigint(boost::multiprecision::denominator(r));
}

BigInt factorial(unsigned long m) {
  BigInt r = 1;
  for (unsigned long k = 2; k <= m; ++k) r *= k;
  return r;
}

BigInt double_factorial(long m) {
  if (m == -1) return 1;
  if (m < -1 || m % 2 == 0) throw UsageError("double_factorial: argument must be odd and >= -1");
  BigInt r = 1;
  for (long k = 3; k <= m; k += 2) r *= k;
  return r;
}

}  // namespace regldp
