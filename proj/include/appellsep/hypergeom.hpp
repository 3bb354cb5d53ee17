#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

#include "appellsep/errors.hpp"
#include "appellsep/fd.hpp"
#include "appellsep/rational.hpp"

namespace appellsep {

// Rising factorial (a)_n = a (a+1) ... (a+n-1), (a)_0 = 1. Exact for Rational.
template <class T>
T pochhammer(const T& a, int n) {
  if (n < 0) throw InvalidParameter("pochhammer: negative length");
  T r(1);
  for (int i = 0; i < n; ++i) r *= a + T(i);
  return r;
}

// Closed absolute-convergence region of F4: sqrt|x| + sqrt|y| <= 1.
inline bool f4_in_domain(double x, double y) { return std::sqrt(std::abs(x)) + std::sqrt(std::abs(y)) <= 1.0; }

template <class T>
struct BasicF4Params {
  T a{}, b{}, c{}, d{};
};
using F4Params = BasicF4Params<double>;
using F4ParamsExact = BasicF4Params<Rational>;

template <class T>
struct F4Value {
  T value{};
  int terms_used = 0;
  double tail_estimate = 0.0;
  bool in_domain = false;
  bool terminated = false;
};

namespace detail {

template <class T>
std::optional<long> nonpositive_integer(const T& v) {
  if constexpr (std::is_same_v<T, Rational>) {
    if (is_integer(v) && v <= 0) return to_long(v);
    return std::nullopt;
  } else {
    using std::floor;
    if (v <= 0 && floor(v) == v) return static_cast<long>(v);
    return std::nullopt;
  }
}

template <class T>
double to_double(const T& v) {
  if constexpr (std::is_same_v<T, Rational>)
    return rational_cast<double>(v);
  else
    return static_cast<double>(v);
}

template <class T>
T abs_value(const T& v) {
  if constexpr (std::is_same_v<T, Rational>)
    return v < 0 ? T(-v) : v;
  else {
    using std::abs;
    return abs(v);
  }
}

// Neumaier compensated accumulator; plain summation for exact types.
template <class T>
struct Accumulator {
  T sum{0};
  T comp{0};
  void add(const T& v) {
    if constexpr (std::is_same_v<T, Rational>) {
      sum += v;
    } else {
      using std::abs;
      const T t = sum + v;
      if (abs(sum) >= abs(v))
        comp += (sum - t) + v;
      else
        comp += (v - t) + sum;
      sum = t;
    }
  }
  T total() const { return sum + comp; }
};

// Diagonal index at which the numerator (a)_t (b)_t first vanishes, if any.
template <class P>
std::optional<long> termination_diagonal(const P& a, const P& b) {
  std::optional<long> cut;
  for (const auto& v : {a, b}) {
    if (auto k = nonpositive_integer(v)) {
      const long t = -*k + 1;  // (v)_t = 0 for t >= -v + 1
      if (!cut || t < *cut) cut = t;
    }
  }
  return cut;
}

inline double geometric_tail(double last, double previous) {
  if (last == 0.0) return 0.0;
  if (previous <= 0.0) return std::numeric_limits<double>::infinity();
  const double r = last / previous;
  if (r >= 1.0) return std::numeric_limits<double>::infinity();
  return last * r / (1.0 - r);
}

}  // namespace detail

// Coefficients (a)_{m+n} (b)_{m+n} / ((c)_m (d)_n m! n!) for m + n <= order,
// stopping early when the series terminates. Indexed by diagonal then m.
template <class T>
std::vector<std::vector<T>> f4_coefficients(const BasicF4Params<T>& p, int order, bool use_x = true,
                                            bool use_y = true, bool* terminated = nullptr) {
  if (order < 0) throw InvalidParameter("f4: negative order");
  long last = order;
  bool term = false;
  if (auto cut = detail::termination_diagonal(p.a, p.b); cut && *cut - 1 <= order) {
    last = *cut - 1;
    term = true;
  }
  if (terminated != nullptr) *terminated = term;
  std::vector<std::vector<T>> diag;
  diag.reserve(static_cast<std::size_t>(last + 1));
  diag.push_back({T(1)});
  for (long t = 1; t <= last; ++t) {
    std::vector<T> row(static_cast<std::size_t>(t + 1), T(0));
    const T num = (p.a + T(t - 1)) * (p.b + T(t - 1));
    const auto& prev = diag.back();
    for (long m = 0; m <= t; ++m) {
      const long n = t - m;
      if (m > 0 && use_x) {
        const T den = (p.c + T(m - 1)) * T(m);
        if (den == T(0)) {
          if (prev[static_cast<std::size_t>(m - 1)] != T(0) && num != T(0))
            throw InvalidParameter("f4: (c)_m vanishes for a retained term");
          continue;
        }
        row[static_cast<std::size_t>(m)] = prev[static_cast<std::size_t>(m - 1)] * num / den;
      } else if (m == 0 && use_y) {
        const T den = (p.d + T(n - 1)) * T(n);
        if (den == T(0)) {
          if (prev[0] != T(0) && num != T(0)) throw InvalidParameter("f4: (d)_n vanishes for a retained term");
          continue;
        }
        row[0] = prev[0] * num / den;
      }
    }
    diag.push_back(std::move(row));
  }
  return diag;
}

// Truncated F4(a, b; c, d; x, y) summed by diagonals m + n = 0..order.
template <class T>
F4Value<T> f4_eval(const BasicF4Params<T>& p, const T& x, const T& y, int order) {
  const bool use_x = x != T(0);
  const bool use_y = y != T(0);
  bool terminated = false;
  const auto coeffs = f4_coefficients(p, order, use_x, use_y, &terminated);
  F4Value<T> out;
  out.in_domain = f4_in_domain(detail::to_double(x), detail::to_double(y));
  out.terminated = terminated;
  detail::Accumulator<T> acc;
  double last_abs = 0.0, prev_abs = 0.0;
  std::vector<T> xpow{T(1)}, ypow{T(1)};
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    if (t > 0) {
      xpow.push_back(xpow.back() * x);
      ypow.push_back(ypow.back() * y);
    }
    double diag_abs = 0.0;
    for (std::size_t m = 0; m <= t; ++m) {
      const T& c = coeffs[t][m];
      if (c == T(0)) continue;
      const T term = c * xpow[m] * ypow[t - m];
      acc.add(term);
      ++out.terms_used;
      diag_abs += detail::to_double(detail::abs_value(term));
    }
    prev_abs = last_abs;
    last_abs = diag_abs;
  }
  if (out.terms_used == 0) out.terms_used = 1;
  out.value = acc.total();
  out.tail_estimate = terminated ? 0.0 : (coeffs.size() > 1 ? detail::geometric_tail(last_abs, prev_abs) : 0.0);
  if (!terminated && coeffs.size() == 1 && (use_x || use_y)) out.tail_estimate = std::numeric_limits<double>::infinity();
  return out;
}

// Truncated Gauss 2F1(a, b; c; x), m <= order.
template <class T>
T gauss_2f1(const T& a, const T& b, const T& c, const T& x, int order) {
  if (order < 0) throw InvalidParameter("2f1: negative order");
  detail::Accumulator<T> acc;
  T term(1);
  acc.add(term);
  for (int m = 1; m <= order; ++m) {
    const T num = (a + T(m - 1)) * (b + T(m - 1));
    if (num == T(0)) break;
    const T den = (c + T(m - 1)) * T(m);
    if (den == T(0)) throw InvalidParameter("2f1: (c)_m vanishes for a retained term");
    term = term * num / den * x;
    acc.add(term);
  }
  return acc.total();
}

// Left-hand sides of the two PDEs satisfied by F4, evaluated on the truncated
// series with central differences of step h (Richardson-refined):
//   x(1-x)F_xx - y^2 F_yy - 2xy F_xy + [c-(a+b+1)x] F_x - (a+b+1) y F_y - ab F
//   y(1-y)F_yy - x^2 F_xx - 2xy F_xy + [d-(a+b+1)y] F_y - (a+b+1) x F_x - ab F
inline std::pair<double, double> f4_pde_residual(const F4Params& p, double x, double y, int order, double h) {
  if (h <= 0) throw InvalidParameter("f4 residual: step must be positive");
  const double margin = 2 * h;
  if (std::sqrt(std::abs(x) + margin) + std::sqrt(std::abs(y) + margin) >= 1.0)
    throw OutOfDomain("f4 residual: point not inside the convergence domain with margin 2h");
  const BasicF4Params<long double> lp{p.a, p.b, p.c, p.d};
  auto f = [&](std::span<const long double> q) { return f4_eval(lp, q[0], q[1], order).value; };
  const long double q[2] = {x, y};
  const long double steps[2] = {h, h};
  const auto j = fd_jet<long double>(f, std::span<const long double>(q), std::span<const long double>(steps));
  const long double a = p.a, b = p.b, s = a + b + 1;
  const long double X = x, Y = y;
  const long double fxx = j.hess[0][0], fyy = j.hess[1][1], fxy = j.hess[0][1];
  const long double r1 = X * (1 - X) * fxx - Y * Y * fyy - 2 * X * Y * fxy + (p.c - s * X) * j.grad[0] -
                         s * Y * j.grad[1] - a * b * j.value;
  const long double r2 = Y * (1 - Y) * fyy - X * X * fxx - 2 * X * Y * fxy + (p.d - s * Y) * j.grad[1] -
                         s * X * j.grad[0] - a * b * j.value;
  return {static_cast<double>(r1), static_cast<double>(r2)};
}

}  // namespace appellsep
