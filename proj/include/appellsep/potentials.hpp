#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "appellsep/calibration_table.hpp"
#include "appellsep/errors.hpp"
#include "appellsep/hypergeom.hpp"
#include "appellsep/laurent.hpp"
#include "appellsep/rational.hpp"

namespace appellsep {

enum class Branch { v, w };

// Billiard in x^2/A + y^2/B = 1 with lambda = A - B.
struct EllipseFamilySpec {
  Rational gamma_exp;
  Rational lambda = 1;
  Rational alpha = 1;
  Branch variant = Branch::v;
};

// Geodesics on x^2/a + y^2/b + z^2/c = 1.
struct JacobiFamilySpec {
  Rational gamma_exp;
  Rational a, b, c;
};

// Billiard on a surface of curvature `curvature_sign` bounded by the quadric diag(1/A, 1/B, 1/C).
struct CurvedFamilySpec {
  Rational gamma_exp;
  Rational A, B, C;
  int curvature_sign = 1;
};

// Billiard inside x^2/A + y^2/B + z^2/C = 1.
struct EllipsoidFamilySpec {
  Rational l0;
  Rational A, B, C;

  Rational beta_ax() const { return B - C; }
  Rational gamma_ax() const { return C - A; }
  bool symmetric() const { return beta_ax() + gamma_ax() == 0; }
};

// Ellipsoid in R^n with a_1 = ... = a_{n-1} = A and a_n = C.
struct SymmetricNFamilySpec {
  Rational k_exp;
  int n = 3;
  Rational A, C;
};

namespace detail {

inline long positive_integer_exponent(const Rational& g, const char* what) {
  if (!is_integer(g) || g < 1) throw InvalidParameter(std::string(what) + ": exact Laurent form needs a positive integer exponent");
  return to_long(g);
}

inline void require_distinct(const Rational& p, const Rational& q, const Rational& r, const char* what) {
  if (p == q || q == r || p == r) throw DegenerateGeometry(std::string(what) + ": axes must be pairwise distinct");
}

inline void require_positive(std::initializer_list<Rational> axes, const char* what) {
  for (const auto& v : axes)
    if (v <= 0) throw InvalidParameter(std::string(what) + ": axes must be positive");
}

inline LaurentPoly mono(std::size_t n, MultiExponent e, const Rational& c = 1) {
  return LaurentPoly::monomial(n, std::move(e), c);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ellipse billiard: Laurent family V_k / W_k.

// U_{kis} = binom(s+i-1, i) [1-(k-i)]...[s-(k-i)] / (lambda^{s+i} s!) alpha X^{2s} Y^{2i-2k},
// with (X, Y) = (x, y) for the V branch and (y, x) for the W branch.
inline LaurentPoly ellipse_vk_laurent(const EllipseFamilySpec& spec) {
  const long k = detail::positive_integer_exponent(spec.gamma_exp, "ellipse_vk_laurent");
  if (spec.lambda == 0) throw InvalidParameter("ellipse_vk_laurent: lambda must be nonzero");
  const bool v_branch = spec.variant == Branch::v;
  const std::size_t xi = v_branch ? 0 : 1;
  const std::size_t yi = v_branch ? 1 : 0;
  LaurentPoly out(2);
  for (long i = 0; i <= k - 2; ++i) {
    for (long s = 1; s <= k - i - 1; ++s) {
      Rational prod = 1;
      for (long j = 1; j <= s; ++j) prod *= Rational(j - (k - i));
      Rational u = binom(s + i - 1, i) * prod / (pow_int(spec.lambda, s + i) * factorial(s)) * spec.alpha;
      const long sign = v_branch ? (i % 2 == 0 ? 1 : -1) : (s % 2 == 0 ? 1 : -1);
      MultiExponent e(2, 0);
      e[xi] = static_cast<int>(2 * s);
      e[yi] = static_cast<int>(2 * i - 2 * k);
      out.add_term(std::move(e), u * sign);
    }
  }
  MultiExponent seed(2, 0);
  seed[yi] = static_cast<int>(-2 * k);
  out.add_term(std::move(seed), spec.alpha);
  return out;
}

// Coefficients of V = sum a_{n,m} x^n y^m solving
//   n m a_{n,m} = (n+m)(m a_{n-2,m} - n a_{n,m-2})
// from the seed a_{0,-2g} = 1 (the lambda = 1 normalization). Entry (s, i)
// holds a_{2s+2, 2i-2g}. Positive integer g truncates to s + i <= g - 2.
struct RecurrenceTable {
  Rational gamma;
  int max_order = 0;
  Rational seed = 1;
  std::map<std::pair<int, int>, Rational> entries;

  Rational at(int s, int i) const {
    auto it = entries.find({s, i});
    return it == entries.end() ? Rational(0) : it->second;
  }

  // a_{n, 2i - 2g} with n even; zero outside the table.
  Rational coefficient(int n, int i) const {
    if (n == 0) return i == 0 ? seed : Rational(0);
    if (n < 0 || n % 2 != 0 || i < 0) return 0;
    return at(n / 2 - 1, i);
  }

  LaurentPoly to_laurent() const {
    if (!is_integer(gamma)) throw InvalidParameter("recurrence table: Laurent form needs an integer exponent");
    const long g = to_long(gamma);
    LaurentPoly p(2);
    p.add_term({0, static_cast<int>(-2 * g)}, seed);
    for (const auto& [key, c] : entries)
      p.add_term({2 * key.first + 2, static_cast<int>(2 * key.second - 2 * g)}, c);
    return p;
  }
};

inline RecurrenceTable ellipse_recurrence_coeffs(const Rational& gamma, int max_order) {
  if (max_order < 0) throw InvalidParameter("recurrence: negative order");
  RecurrenceTable table;
  table.gamma = gamma;
  int last = max_order;
  if (is_integer(gamma) && gamma >= 1) last = std::min<int>(max_order, static_cast<int>(to_long(gamma)) - 2);
  table.max_order = last;
  for (int t = 0; t <= last; ++t) {
    for (int s = 0; s <= t; ++s) {
      const int i = t - s;
      const Rational n = 2 * s + 2;
      const Rational m = Rational(2 * i) - 2 * gamma;
      if (m == 0) throw InvalidParameter("recurrence: pivot n*m vanishes at i = g");
      const Rational left = table.coefficient(2 * s, i);       // a_{n-2, m}
      const Rational down = table.coefficient(2 * s + 2, i - 1);  // a_{n, m-2}
      const Rational value = (n + m) * (m * left - n * down) / (n * m);
      if (value != 0) table.entries[{s, i}] = value;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Closed forms V = M |P|^{-g} (seed + w(g) S F4(1, 2-g; 2, 1-g; X, Y)).

struct SeriesForm {
  std::size_t nvars = 2;
  LaurentPoly multiplier{2};
  LaurentPoly prefactor{2};
  LaurentPoly series_factor{2};
  LaurentPoly x_arg{2};
  LaurentPoly y_arg{2};
  bool seed = true;
  SeriesWeight weight = SeriesWeight::one_minus_gamma;
  int kappa_sign = 1;  // kappa(g) carries kappa_sign^(g-1)

  Rational prefactor_coefficient() const { return prefactor.terms().begin()->second; }

  // Coordinates that appear with a negative power anywhere in the form.
  std::vector<bool> pole_variables() const {
    std::vector<bool> poles(nvars, false);
    for (const auto* p : {&multiplier, &prefactor, &series_factor, &x_arg, &y_arg}) {
      const auto pv = p->pole_variables();
      for (std::size_t i = 0; i < nvars; ++i) poles[i] = poles[i] || pv[i];
    }
    // |P|^{-g} with g > 0 puts the prefactor's positive-power coordinates in the denominator.
    for (const auto& [e, c] : prefactor.terms())
      for (std::size_t i = 0; i < nvars; ++i)
        if (e[i] != 0) poles[i] = true;
    return poles;
  }
};

inline Rational series_weight(SeriesWeight w, const Rational& gamma) {
  return w == SeriesWeight::one ? Rational(1) : Rational(1 - gamma);
}

inline double series_weight(SeriesWeight w, double gamma) { return w == SeriesWeight::one ? 1.0 : 1.0 - gamma; }

namespace detail {

inline void check_form(const SeriesForm& f) {
  if (!f.multiplier.is_monomial()) throw InvalidParameter("closed form: multiplier must be a monomial");
  if (!f.prefactor.is_monomial()) throw DegenerateGeometry("closed form: prefactor vanishes (degenerate geometry)");
}

inline LaurentPoly abs_monomial_power(const LaurentPoly& p, long g) {
  const auto& [e, c] = *p.terms().begin();
  for (int v : e)
    if (v % 2 != 0) throw InvalidParameter("closed form: prefactor monomial must be a square");
  const Rational ac = c < 0 ? Rational(-c) : c;
  return LaurentPoly::monomial(p.nvars(), e, 1).pow(static_cast<int>(-g)) * pow_int(ac, -g);
}

}  // namespace detail

// Exact Laurent expansion of a closed form at a positive integer exponent
// where the series terminates (or carries zero weight).
inline LaurentPoly expand_exact(const SeriesForm& f, const Rational& gamma) {
  detail::check_form(f);
  const long g = detail::positive_integer_exponent(gamma, "expand_exact");
  const Rational w = series_weight(f.weight, gamma);
  LaurentPoly inner(f.nvars);
  if (f.seed) inner += LaurentPoly::constant(f.nvars, 1);
  if (w != 0) {
    if (g < 2) throw InvalidParameter("expand_exact: series does not terminate at this exponent");
    const F4ParamsExact p{Rational(1), Rational(2 - g), Rational(2), Rational(1 - g)};
    bool terminated = false;
    const auto coeffs = f4_coefficients(p, static_cast<int>(g), true, true, &terminated);
    if (!terminated) throw InvalidParameter("expand_exact: series does not terminate");
    std::vector<LaurentPoly> xp{LaurentPoly::constant(f.nvars, 1)}, yp{LaurentPoly::constant(f.nvars, 1)};
    LaurentPoly series(f.nvars);
    for (std::size_t t = 0; t < coeffs.size(); ++t) {
      if (t > 0) {
        xp.push_back(xp.back() * f.x_arg);
        yp.push_back(yp.back() * f.y_arg);
      }
      for (std::size_t m = 0; m <= t; ++m)
        if (coeffs[t][m] != 0) series += xp[m] * yp[t - m] * coeffs[t][m];
    }
    inner += f.series_factor * series * w;
  }
  return f.multiplier * detail::abs_monomial_power(f.prefactor, g) * inner;
}

// Exact point value at a positive integer exponent (terminating series).
inline Rational eval_exact(const SeriesForm& f, const Rational& gamma, std::span<const Rational> q) {
  detail::check_form(f);
  const long g = detail::positive_integer_exponent(gamma, "eval_exact");
  if (q.size() != f.nvars) throw ArityMismatch("closed form: point has wrong length");
  const auto poles = f.pole_variables();
  for (std::size_t i = 0; i < f.nvars; ++i)
    if (poles[i] && q[i] == 0) throw PoleError("closed form: point on a singular coordinate plane");
  const Rational w = series_weight(f.weight, gamma);
  Rational inner = f.seed ? Rational(1) : Rational(0);
  if (w != 0) {
    const F4ParamsExact p{Rational(1), Rational(2 - g), Rational(2), Rational(1 - g)};
    const auto v = f4_eval(p, eval(f.x_arg, q), eval(f.y_arg, q), static_cast<int>(g));
    if (!v.terminated) throw InvalidParameter("eval_exact: series does not terminate");
    inner += w * eval(f.series_factor, q) * v.value;
  }
  Rational pre = eval(f.prefactor, q);
  if (pre < 0) pre = -pre;
  return eval(f.multiplier, q) * pow_int(pre, -g) * inner;
}

template <class T>
struct SeriesEvaluation {
  T value{};
  F4Value<T> series;
  bool series_used = false;
};

// Floating evaluation of a closed form; precompiles its polynomials once.
template <class T>
class SeriesEvaluator {
 public:
  SeriesEvaluator(const SeriesForm& f, double gamma, int order)
      : nvars_(f.nvars), gamma_(gamma), order_(order), seed_(f.seed), weight_(series_weight(f.weight, gamma)),
        multiplier_(f.multiplier), prefactor_(f.prefactor), series_factor_(f.series_factor), x_(f.x_arg),
        y_(f.y_arg), poles_(f.pole_variables()) {
    detail::check_form(f);
  }

  SeriesEvaluation<T> evaluate(std::span<const T> q) const {
    if (q.size() != nvars_) throw ArityMismatch("closed form: point has wrong length");
    for (std::size_t i = 0; i < nvars_; ++i)
      if (poles_[i] && q[i] == T(0)) throw PoleError("closed form: point on a singular coordinate plane");
    using std::abs;
    using std::pow;
    SeriesEvaluation<T> out;
    const T pre = abs(prefactor_(q));
    if (pre == T(0)) throw PoleError("closed form: prefactor vanishes at point");
    T inner = seed_ ? T(1) : T(0);
    if (weight_ != 0.0) {
      const BasicF4Params<T> p{T(1), T(2) - T(gamma_), T(2), T(1) - T(gamma_)};
      const T X = x_(q);
      const T Y = y_(q);
      out.series = f4_eval(p, X, Y, order_);
      out.series_used = true;
      if (!out.series.terminated && !out.series.in_domain)
        throw OutOfDomain("closed form: series arguments outside the F4 convergence domain");
      inner += T(weight_) * series_factor_(q) * out.series.value;
    }
    out.value = multiplier_(q) * pow(pre, -T(gamma_)) * inner;
    return out;
  }

  T operator()(std::span<const T> q) const { return evaluate(q).value; }

  // Series arguments at a point (for admissibility checks).
  std::pair<T, T> arguments(std::span<const T> q) const { return {x_(q), y_(q)}; }

  const std::vector<bool>& pole_variables() const { return poles_; }
  std::size_t nvars() const { return nvars_; }

 private:
  std::size_t nvars_;
  double gamma_;
  int order_;
  bool seed_;
  double weight_;
  CompiledPoly<T> multiplier_, prefactor_, series_factor_, x_, y_;
  std::vector<bool> poles_;
};

// Swap two coordinates of every polynomial in a form.
inline SeriesForm swap_coordinates(const SeriesForm& f, std::size_t i, std::size_t j) {
  std::vector<std::size_t> perm(f.nvars);
  for (std::size_t k = 0; k < f.nvars; ++k) perm[k] = k;
  std::swap(perm[i], perm[j]);
  SeriesForm g = f;
  for (auto* p : {&g.multiplier, &g.prefactor, &g.series_factor, &g.x_arg, &g.y_arg})
    *p = embed(*p, f.nvars, std::span<const std::size_t>(perm));
  return g;
}

// x~ = x^2/lambda, y~ = -y^2/lambda; W branch is V(y, x; -lambda).
inline SeriesForm ellipse_form(const EllipseFamilySpec& spec, const Convention& conv) {
  if (spec.lambda == 0) throw InvalidParameter("ellipse: lambda must be nonzero");
  if (spec.variant == Branch::w) {
    EllipseFamilySpec v = spec;
    v.variant = Branch::v;
    v.lambda = -spec.lambda;
    return swap_coordinates(ellipse_form(v, conv), 0, 1);
  }
  using detail::mono;
  SeriesForm f;
  f.nvars = 2;
  const LaurentPoly xt = mono(2, {2, 0}, Rational(1) / spec.lambda);
  const LaurentPoly yt = mono(2, {0, 2}, Rational(-1) / spec.lambda);
  f.multiplier = mono(2, {0, 0}, spec.alpha);
  f.prefactor = yt;
  f.x_arg = xt * Rational(conv.eps_x);
  f.y_arg = yt * Rational(conv.eps_y);
  f.series_factor = f.x_arg;
  f.seed = true;
  f.weight = conv.weight;
  return f;
}

inline SeriesForm jacobi_form(const JacobiFamilySpec& spec, const Convention& conv) {
  detail::require_positive({spec.a, spec.b, spec.c}, "jacobi");
  detail::require_distinct(spec.a, spec.b, spec.c, "jacobi");
  using detail::mono;
  const Rational &a = spec.a, &b = spec.b, &c = spec.c;
  SeriesForm f;
  f.nvars = 3;
  f.weight = conv.weight;
  if (conv.variant == FormVariant::printed) {
    // (1-g) (z^2/x^2)^g F4(x^, y^), x^ = x^2 c(a-c)/(z^2 (b-a) a), y^ = y^2 c(c-b)/(z^2 (b-a) b)
    f.multiplier = mono(3, {0, 0, 0});
    f.prefactor = mono(3, {2, 0, -2});
    f.x_arg = mono(3, {2, 0, -2}, c * (a - c) / ((b - a) * a)) * Rational(conv.eps_x);
    f.y_arg = mono(3, {0, 2, -2}, c * (c - b) / ((b - a) * b)) * Rational(conv.eps_y);
    f.series_factor = mono(3, {0, 0, 0});
    f.seed = false;
  } else {
    // z^{-2} |Y|^{-g} (1 + w X F4(X, Y)), the hat constants attached to the other coordinate.
    const LaurentPoly X = mono(3, {0, 2, -2}, c * (a - c) / (b * (b - a)));
    const LaurentPoly Y = mono(3, {2, 0, -2}, c * (c - b) / (a * (b - a)));
    f.multiplier = mono(3, {0, 0, -2});
    f.prefactor = Y;
    f.x_arg = X * Rational(conv.eps_x);
    f.y_arg = Y * Rational(conv.eps_y);
    f.series_factor = f.x_arg;
    f.seed = true;
  }
  return f;
}

inline SeriesForm curved_form(const CurvedFamilySpec& spec, const Convention& conv) {
  detail::require_positive({spec.A, spec.B, spec.C}, "curved");
  if (spec.curvature_sign != 1 && spec.curvature_sign != -1)
    throw InvalidParameter("curved: curvature sign must be +1 or -1");
  if (spec.C == spec.A) throw DegenerateGeometry("curved: C = A makes the hat variables undefined");
  if (spec.A == spec.B) throw DegenerateGeometry("curved: A = B makes y^ vanish identically");
  using detail::mono;
  const Rational K = spec.curvature_sign;
  // x^ = x^2 (B-C) / (y^2 (C-A)), y^ = K z^2 (A-B) / (y^2 (C-A))
  const LaurentPoly xh = mono(3, {2, -2, 0}, (spec.B - spec.C) / (spec.C - spec.A));
  const LaurentPoly yh = mono(3, {0, -2, 2}, K * (spec.A - spec.B) / (spec.C - spec.A));
  SeriesForm f;
  f.nvars = 3;
  f.weight = conv.weight;
  f.prefactor = yh;
  f.kappa_sign = spec.curvature_sign;
  f.x_arg = xh * Rational(conv.eps_x);
  f.y_arg = yh * Rational(conv.eps_y);
  f.seed = true;
  if (conv.variant == FormVariant::printed) {
    f.multiplier = mono(3, {0, 0, 0});
    f.series_factor = mono(3, {2, 0, 0});
  } else {
    f.multiplier = mono(3, {0, -2, 0});
    f.series_factor = f.x_arg;
  }
  return f;
}

// Symmetric ellipsoid A = B in R^3: x^ = x^2/g, y^ = y^2/b, z^ = z^2/g with
// b = B - C, g = C - A; series arguments (-x^ + y^, z^).
inline SeriesForm symmetric3d_form(const EllipsoidFamilySpec& spec, const Convention& conv) {
  detail::require_positive({spec.A, spec.B, spec.C}, "symmetric3d");
  if (!spec.symmetric()) throw DegenerateGeometry("symmetric3d: closed form needs A = B");
  if (spec.A == spec.C) throw DegenerateGeometry("symmetric3d: A = C makes the hat variables undefined");
  using detail::mono;
  const Rational beta = spec.beta_ax(), gam = spec.gamma_ax();
  const LaurentPoly s = mono(3, {2, 0, 0}, Rational(-1) / gam) + mono(3, {0, 2, 0}, Rational(1) / beta);
  const LaurentPoly zh = mono(3, {0, 0, 2}, Rational(1) / gam);
  SeriesForm f;
  f.nvars = 3;
  f.weight = conv.weight;
  f.multiplier = mono(3, {0, 0, 0});
  f.prefactor = zh;
  f.x_arg = s * Rational(conv.eps_x);
  f.y_arg = zh * Rational(conv.eps_y);
  f.series_factor = f.x_arg;
  f.seed = true;
  return f;
}

// x^_i = x_i^2/(A - C) for i < n, x^_n = x_n^2/(C - A); reduces to the
// three-dimensional symmetric form at n = 3.
inline SeriesForm symmetric_n_form(const SymmetricNFamilySpec& spec, const Convention& conv) {
  if (spec.n < 3) throw InvalidParameter("symmetric-n: n must be at least 3");
  detail::require_positive({spec.A, spec.C}, "symmetric-n");
  if (spec.A == spec.C) throw DegenerateGeometry("symmetric-n: A = C makes the hat variables undefined");
  const auto n = static_cast<std::size_t>(spec.n);
  LaurentPoly s(n);
  for (std::size_t i = 0; i + 1 < n; ++i) s += LaurentPoly::variable(n, i, 2) * (Rational(1) / (spec.A - spec.C));
  const LaurentPoly xn = LaurentPoly::variable(n, n - 1, 2) * (Rational(1) / (spec.C - spec.A));
  SeriesForm f;
  f.nvars = n;
  f.weight = conv.weight;
  f.multiplier = LaurentPoly::constant(n, 1);
  f.prefactor = xn;
  f.x_arg = s * Rational(conv.eps_x);
  f.y_arg = xn * Rational(conv.eps_y);
  f.series_factor = f.x_arg;
  f.seed = true;
  return f;
}

// Relation closed form = kappa(g) * Laurent family, kappa(g) = s^(g-1) |p0|^{-g}
// with s = kappa_sign (the curvature sign for curved billiards, else 1).
inline Rational kappa(const SeriesForm& f, long g) {
  const Rational p0 = f.prefactor_coefficient();
  const Rational mag = pow_int(p0 < 0 ? Rational(-p0) : p0, -g);
  return (f.kappa_sign < 0 && (g - 1) % 2 != 0) ? Rational(-mag) : mag;
}

// ---------------------------------------------------------------------------
// Calibrated point evaluators.

namespace detail {

template <std::size_t N>
double eval_form(const SeriesForm& f, const Rational& gamma, const std::array<double, N>& pt, int order) {
  SeriesEvaluator<double> ev(f, rational_cast<double>(gamma), order);
  return ev(std::span<const double>(pt));
}

}  // namespace detail

inline double ellipse_v_gamma_f4(const EllipseFamilySpec& spec, double x, double y, int order) {
  if (y == 0.0) throw PoleError("ellipse closed form: point on the singular axis y = 0");
  return detail::eval_form<2>(ellipse_form(spec, calibrated_convention(Family::ellipse)), spec.gamma_exp, {x, y}, order);
}

inline double jacobi_v_gamma(const JacobiFamilySpec& spec, double x, double y, double z, int order) {
  if (x == 0.0 || z == 0.0) throw PoleError("jacobi closed form: point on a singular plane");
  return detail::eval_form<3>(jacobi_form(spec, calibrated_convention(Family::jacobi)), spec.gamma_exp, {x, y, z}, order);
}

inline double curved_v_gamma_f4(const CurvedFamilySpec& spec, double x, double y, double z, int order) {
  if (y == 0.0 || z == 0.0) throw PoleError("curved closed form: point on a singular plane");
  return detail::eval_form<3>(curved_form(spec, calibrated_convention(Family::curved)), spec.gamma_exp, {x, y, z}, order);
}

inline double symmetric3d_w_f4(const EllipsoidFamilySpec& spec, double x, double y, double z, int order) {
  if (z == 0.0) throw PoleError("symmetric3d closed form: point on the plane z = 0");
  return detail::eval_form<3>(symmetric3d_form(spec, calibrated_convention(Family::symmetric3d)), spec.l0, {x, y, z}, order);
}

inline double symmetric_n_v_f4(const SymmetricNFamilySpec& spec, std::span<const double> q, int order) {
  if (q.size() != static_cast<std::size_t>(spec.n)) throw ArityMismatch("symmetric-n: point has wrong length");
  if (q.back() == 0.0) throw PoleError("symmetric-n closed form: point on the plane x_n = 0");
  SeriesEvaluator<double> ev(symmetric_n_form(spec, calibrated_convention(Family::symmetric_n)),
                             rational_cast<double>(spec.k_exp), order);
  return ev(q);
}

// ---------------------------------------------------------------------------
// Three-dimensional Laurent families.

// V = z^{-2 l0} sum a_{m,k} x^{2m} y^{2 l0 - 2 - 2k - 2m} z^{2k},
// a_{m,k} = K^{l0-k-1} ((C-B)/(C-A))^m binom(l0-k-1, m) binom(k+m-1, k) ((A-B)/(C-A))^k.
inline LaurentPoly curved_v_l0_laurent(const CurvedFamilySpec& spec) {
  const long l0 = detail::positive_integer_exponent(spec.gamma_exp, "curved_v_l0_laurent");
  detail::require_positive({spec.A, spec.B, spec.C}, "curved");
  if (spec.C == spec.A) throw DegenerateGeometry("curved: C = A");
  if (spec.curvature_sign != 1 && spec.curvature_sign != -1)
    throw InvalidParameter("curved: curvature sign must be +1 or -1");
  const Rational K = spec.curvature_sign;
  const Rational rm = (spec.C - spec.B) / (spec.C - spec.A);
  const Rational rk = (spec.A - spec.B) / (spec.C - spec.A);
  LaurentPoly out(3);
  for (long k = 0; k <= l0 - 1; ++k) {
    for (long m = 0; m <= l0 - k - 1; ++m) {
      const Rational a = pow_int(K, l0 - k - 1) * pow_int(rm, m) * binom(l0 - k - 1, m) * binom(k + m - 1, k) *
                         pow_int(rk, k);
      out.add_term({static_cast<int>(2 * m), static_cast<int>(2 * l0 - 2 - 2 * k - 2 * m),
                    static_cast<int>(2 * k - 2 * l0)},
                   a);
    }
  }
  return out;
}

// P^k_{m,n}(b, g) = sum_i binom(m+k-1-i, k-i) binom(n+i-1, i) (-1)^i b^{k-i} g^i
inline Rational pmn_poly(long m, long n, long k, const Rational& beta, const Rational& gam) {
  if (m < 0 || n < 0 || k < 0) throw InvalidParameter("pmn_poly: negative index");
  Rational sum = 0;
  for (long i = 0; i <= k; ++i) {
    const Rational t = binom(m + k - 1 - i, k - i) * binom(n + i - 1, i) * pow_int(beta, k - i) * pow_int(gam, i);
    sum += (i % 2 == 0) ? t : Rational(-t);
  }
  return sum;
}

// P^k_{m,n}(b, -b) = binom(k+m+n-1, k) b^k
inline Rational pmn_symmetric(long m, long n, long k, const Rational& beta) {
  if (m < 0 || n < 0 || k < 0) throw InvalidParameter("pmn_symmetric: negative index");
  return binom(k + m + n - 1, k) * pow_int(beta, k);
}

// W = z^{-2 l0} sum_{m+n+k<l0} (l0-k-1)! (-1)^n / (m! n! (l0-1-k-m-n)!)
//       P^k_{m,n}(b, g) / (g^{m+k} b^{n+k}) x^{2m} y^{2n} z^{2k}
inline LaurentPoly ellipsoid3d_w_l0_laurent(const EllipsoidFamilySpec& spec) {
  const long l0 = detail::positive_integer_exponent(spec.l0, "ellipsoid3d_w_l0_laurent");
  detail::require_positive({spec.A, spec.B, spec.C}, "ellipsoid3d");
  const Rational beta = spec.beta_ax(), gam = spec.gamma_ax();
  if (beta == 0 || gam == 0) throw DegenerateGeometry("ellipsoid3d: B = C or C = A");
  LaurentPoly out(3);
  for (long m = 0; m < l0; ++m) {
    for (long n = 0; m + n < l0; ++n) {
      for (long k = 0; m + n + k < l0; ++k) {
        Rational c = factorial(l0 - k - 1) / (factorial(m) * factorial(n) * factorial(l0 - 1 - k - m - n));
        c *= pmn_poly(m, n, k, beta, gam) / (pow_int(gam, m + k) * pow_int(beta, n + k));
        if (n % 2 != 0) c = -c;
        out.add_term({static_cast<int>(2 * m), static_cast<int>(2 * n), static_cast<int>(2 * k - 2 * l0)}, c);
      }
    }
  }
  return out;
}

// Laurent solutions of the geodesic-on-ellipsoid system, normalized to a unit
// coefficient on x^{-2 l0} z^{2 l0 - 2}:
//   sum_{k,s} (-1)^s binom(s+k-1, k) c^{s+k} (c-a)^s (c-b)^k (1-l0+k)_s
//             / (a^k b^s (b-a)^{k+s} s!)  x^{2k-2 l0} y^{2s} z^{2(l0-k-s-1)}
inline LaurentPoly jacobi_v_l0_laurent(const JacobiFamilySpec& spec) {
  const long l0 = detail::positive_integer_exponent(spec.gamma_exp, "jacobi_v_l0_laurent");
  detail::require_positive({spec.a, spec.b, spec.c}, "jacobi");
  detail::require_distinct(spec.a, spec.b, spec.c, "jacobi");
  const Rational &a = spec.a, &b = spec.b, &c = spec.c;
  LaurentPoly out(3);
  for (long k = 0; k < l0; ++k) {
    for (long s = 0; k + s < l0; ++s) {
      Rational coef = binom(s + k - 1, k) * pow_int(c, s + k) * pow_int(c - a, s) * pow_int(c - b, k) *
                      pochhammer(Rational(1 - l0 + k), static_cast<int>(s)) /
                      (pow_int(a, k) * pow_int(b, s) * pow_int(b - a, k + s) * factorial(s));
      if (s % 2 != 0) coef = -coef;
      out.add_term({static_cast<int>(2 * k - 2 * l0), static_cast<int>(2 * s), static_cast<int>(2 * (l0 - k - s - 1))},
                   coef);
    }
  }
  return out;
}

}  // namespace appellsep
