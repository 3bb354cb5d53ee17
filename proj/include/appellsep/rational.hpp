#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>

#include "appellsep/errors.hpp"

namespace appellsep {

using Integer = boost::multiprecision::cpp_int;
// Always stored in lowest terms with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw InvalidParameter("rational with zero denominator");
  return Rational(Integer(num), Integer(den));
}

// Accepts "p", "p/q", or a finite decimal such as "-0.125" or "5e-2" (converted exactly).
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw InvalidParameter("empty rational literal");
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      Integer num(text.substr(0, slash));
      Integer den(text.substr(slash + 1));
      if (den == 0) throw InvalidParameter("rational with zero denominator: " + text);
      return Rational(num, den);
    }
    if (const auto ex = text.find_first_of("eE"); ex != std::string::npos) {
      const long p = std::stol(text.substr(ex + 1));
      Integer scale = 1;
      for (long i = 0; i < std::abs(p); ++i) scale *= 10;
      const Rational m = parse_rational(text.substr(0, ex));
      return p >= 0 ? Rational(m * scale) : Rational(m / scale);
    }
    std::string s = text;
    bool negative = false;
    if (s[0] == '-' || s[0] == '+') {
      negative = s[0] == '-';
      s = s.substr(1);
    }
    const auto dot = s.find('.');
    if (dot == std::string::npos) {
      Rational r{Integer(s)};
      return negative ? Rational(-r) : r;
    }
    const std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    Integer den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    Rational r(Integer(digits.empty() ? "0" : digits), den);
    return negative ? Rational(-r) : r;
  } catch (const InvalidParameter&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidParameter("not a rational literal: " + text);
  }
}

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

template <class T>
T rational_cast(const Rational& r) {
  return static_cast<T>(numerator(r)) / static_cast<T>(denominator(r));
}

// Integer power, negative exponents allowed for nonzero base.
inline Rational pow_int(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base == 0) throw InvalidParameter("zero raised to a negative power");
    return Rational(1) / pow_int(base, -exponent);
  }
  Rational result = 1;
  Rational b = base;
  unsigned long e = static_cast<unsigned long>(exponent);
  while (e != 0) {
    if (e & 1u) result *= b;
    b *= b;
    e >>= 1u;
  }
  return result;
}

inline Rational factorial(long n) {
  if (n < 0) throw InvalidParameter("factorial of a negative integer");
  Integer f = 1;
  for (long i = 2; i <= n; ++i) f *= i;
  return Rational(f);
}

// binom(p, q) over integers: binom(p, 0) = 1 for every p (including p < 0),
// zero for q < 0, zero for q > 0 with p < 0 or q > p.
inline Rational binom(long p, long q) {
  if (q == 0) return 1;
  if (q < 0 || p < 0 || q > p) return 0;
  Integer r = 1;
  for (long i = 1; i <= q; ++i) {
    r *= (p - q + i);
    r /= i;
  }
  return Rational(r);
}

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

inline long to_long(const Rational& r) {
  if (!is_integer(r)) throw InvalidParameter("expected an integer, got " + to_string(r));
  return static_cast<long>(numerator(r));
}

// Exact rational value of a finite double.
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw InvalidParameter("non-finite value");
  int exponent = 0;
  double mant = std::frexp(v, &exponent);
  // mant * 2^53 is an exact integer
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exponent -= 53;
  Rational r{Integer(scaled)};
  if (exponent >= 0) {
    r *= Rational(Integer(1) << exponent);
  } else {
    r /= Rational(Integer(1) << (-exponent));
  }
  return r;
}

}  // namespace appellsep
