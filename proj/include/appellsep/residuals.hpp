#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "appellsep/errors.hpp"
#include "appellsep/fd.hpp"
#include "appellsep/laurent.hpp"
#include "appellsep/potentials.hpp"
#include "appellsep/rational.hpp"
#include "appellsep/wide.hpp"

namespace appellsep {

// A floating value carried together with the sum of absolute values of
// everything that went into it; the ratio is the relative residual.
template <class R>
struct Tracked {
  R value{};
  R magnitude{};

  static Tracked leaf(R v) { return {v, std::abs(v)}; }

  friend Tracked operator+(const Tracked& a, const Tracked& b) { return {a.value + b.value, a.magnitude + b.magnitude}; }
  friend Tracked operator-(const Tracked& a, const Tracked& b) { return {a.value - b.value, a.magnitude + b.magnitude}; }
  friend Tracked operator-(const Tracked& a) { return {-a.value, a.magnitude}; }
  friend Tracked operator*(const Tracked& a, const Tracked& b) { return {a.value * b.value, a.magnitude * b.magnitude}; }
  friend Tracked operator*(const Tracked& a, const Rational& c) {
    const R s = rational_cast<R>(c);
    return {a.value * s, a.magnitude * std::abs(s)};
  }
  friend Tracked operator*(const Rational& c, const Tracked& a) { return a * c; }
  Tracked& operator+=(const Tracked& b) { return *this = *this + b; }
  Tracked& operator-=(const Tracked& b) { return *this = *this - b; }

  R relative() const { return magnitude == R(0) ? R(0) : std::abs(value) / magnitude; }
};

// Coordinates, value and derivatives up to second order, in whatever scalar
// the operators are evaluated over.
template <class T>
struct Fields {
  std::vector<T> x;
  T v;
  std::vector<T> d;
  std::vector<std::vector<T>> dd;

  std::size_t nvars() const { return x.size(); }
};

inline Fields<LaurentPoly> exact_fields(const LaurentPoly& V) {
  const std::size_t n = V.nvars();
  Fields<LaurentPoly> f;
  f.v = V;
  f.x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) f.x.push_back(LaurentPoly::variable(n, i));
  for (std::size_t i = 0; i < n; ++i) f.d.push_back(diff(V, i));
  f.dd.assign(n, std::vector<LaurentPoly>(n, LaurentPoly(n)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) f.dd[i][j] = f.dd[j][i] = diff(f.d[i], j);
  return f;
}

inline Fields<Tracked<long double>> tracked_fields(const Jet<long double>& jet) {
  using TL = Tracked<long double>;
  const std::size_t n = jet.q.size();
  Fields<TL> f;
  f.v = TL::leaf(jet.value);
  for (std::size_t i = 0; i < n; ++i) {
    f.x.push_back(TL::leaf(jet.q[i]));
    f.d.push_back(TL::leaf(jet.grad[i]));
  }
  f.dd.assign(n, std::vector<TL>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) f.dd[i][j] = TL::leaf(jet.hess[i][j]);
  return f;
}

inline LaurentPoly unit_like(const LaurentPoly& p) { return LaurentPoly::constant(p.nvars(), 1); }

template <class R>
Tracked<R> unit_like(const Tracked<R>&) {
  return {R(1), R(1)};
}

// Coefficients of the general two-variable separability operator.
struct BDParams {
  Rational a, b, b_prime, c, c_prime, c1;
};

// The choice that turns the general operator into the ellipse-billiard equation.
inline BDParams bd_ellipse_params(const Rational& lambda) {
  return BDParams{Rational(-1) / 2, 0, 0, -lambda / 2, 0, 0};
}

enum class System { eq1, bd, sys8, sys10, sys4 };

inline std::string system_name(System s) {
  switch (s) {
    case System::eq1: return "eq1";
    case System::bd: return "bd";
    case System::sys8: return "sys8";
    case System::sys10: return "sys10";
    case System::sys4: return "sys4";
  }
  return "?";
}

inline System parse_system(const std::string& s) {
  if (s == "eq1") return System::eq1;
  if (s == "bd") return System::bd;
  if (s == "sys8") return System::sys8;
  if (s == "sys10") return System::sys10;
  if (s == "sys4") return System::sys4;
  throw InvalidParameter("unknown system '" + s + "'");
}

struct SystemSpec {
  System system = System::eq1;
  Rational lambda = 1;
  BDParams bd{};
  std::vector<Rational> axes;
  int curvature_sign = 1;

  std::size_t nvars() const {
    switch (system) {
      case System::eq1:
      case System::bd: return 2;
      case System::sys8:
      case System::sys10: return 3;
      case System::sys4: return axes.size();
    }
    return 0;
  }
};

// One equation of a system. `components` has a single entry except for
// system (4) on repeated axes, where each vanishing axis difference
// contributes the coefficient of its own pole (see sys4 below).
template <class T>
struct EquationValue {
  std::string label;
  std::vector<T> components;
};

// lambda V_xy + 3 (y V_x - x V_y) + (y^2 - x^2) V_xy + x y (V_xx - V_yy)
template <class T>
T eq1_operator(const Fields<T>& f, const Rational& lambda) {
  const T &x = f.x[0], &y = f.x[1];
  return f.dd[0][1] * lambda + (y * f.d[0] - x * f.d[1]) * Rational(3) + (y * y - x * x) * f.dd[0][1] +
         x * y * (f.dd[0][0] - f.dd[1][1]);
}

// (V_yy - V_xx)(-2a x y - b' y - b x + c1) + 2 V_xy (a y^2 - a x^2 + b y - b' x + c - c')
//   + V_x (6 a y + 3 b) + V_y (-6 a x - 3 b')
template <class T>
T bd_operator(const Fields<T>& f, const BDParams& p) {
  const T &x = f.x[0], &y = f.x[1];
  const T one = unit_like(x);
  const T w1 = x * y * (Rational(-2) * p.a) - y * p.b_prime - x * p.b + one * p.c1;
  const T w2 = (y * y - x * x) * p.a + y * p.b - x * p.b_prime + one * (p.c - p.c_prime);
  return (f.dd[1][1] - f.dd[0][0]) * w1 + f.dd[0][1] * w2 * Rational(2) + f.d[0] * (y * (Rational(6) * p.a) + one * (3 * p.b)) +
         f.d[1] * (x * (Rational(-6) * p.a) - one * (3 * p.b_prime));
}

// Geodesic flow on x^2/a + y^2/b + z^2/c = 1.
template <class T>
std::vector<T> sys8_operator(const Fields<T>& f, const Rational& a, const Rational& b, const Rational& c) {
  const T &x = f.x[0], &y = f.x[1], &z = f.x[2];
  const auto& V = f.dd;
  const auto& D = f.d;
  const T S = x * x * (1 / (a * a)) + y * y * (1 / (b * b)) + z * z * (1 / (c * c));
  T e1 = S * V[0][1] * ((a - b) / (a * b)) - y * D[0] * (3 / (b * b * a)) + x * D[1] * (3 / (a * a * b)) +
         (x * x * (1 / (a * a * a)) - y * y * (1 / (b * b * b))) * V[0][1] +
         x * y * (V[1][1] * (1 / a) - V[0][0] * (1 / b)) * (1 / (a * b)) + z * x * V[2][1] * (1 / (c * a * a)) -
         z * y * V[2][0] * (1 / (c * b * b));
  T e2 = S * V[1][2] * ((b - c) / (b * c)) - z * D[1] * (3 / (c * c * b)) + y * D[2] * (3 / (b * b * c)) +
         (y * y * (1 / (b * b * b)) - z * z * (1 / (c * c * c))) * V[1][2] +
         y * z * (V[2][2] * (1 / b) - V[1][1] * (1 / c)) * (1 / (b * c)) + x * y * V[0][2] * (1 / (a * b * b)) -
         x * z * V[0][1] * (1 / (a * c * c));
  T e3 = S * V[2][0] * ((c - a) / (a * c)) - x * D[2] * (3 / (a * a * c)) + z * D[0] * (3 / (c * c * a)) +
         (z * z * (1 / (c * c * c)) - x * x * (1 / (a * a * a))) * V[2][0] +
         x * z * (V[0][0] * (1 / c) - V[2][2] * (1 / a)) * (1 / (a * c)) + z * y * V[0][1] * (1 / (b * c * c)) -
         y * x * V[1][2] * (1 / (b * a * a));
  return {e1, e2, e3};
}

// Billiards on surfaces of constant curvature K = +-1 bounded by a quadric with axes A, B, C.
template <class T>
std::vector<T> sys10_operator(const Fields<T>& f, const Rational& A, const Rational& B, const Rational& C, int K) {
  const T &x = f.x[0], &y = f.x[1], &z = f.x[2];
  const auto& V = f.dd;
  const auto& D = f.d;
  const Rational k = K;
  T e1 = y * D[0] * (3 * C) - x * D[1] * (3 * C) + V[0][1] * ((y * y - x * x) * C + z * z * (k * (B - A))) +
         x * y * V[0][0] * C - x * y * V[1][1] * C + z * y * V[2][0] * A - z * x * V[2][1] * B;
  T e2 = z * D[0] * (3 * B) - x * D[2] * (3 * k * B) + V[0][2] * ((z * z - x * x * k) * B + y * y * (k * (C - A))) +
         z * x * V[0][0] * B - z * x * V[2][2] * (k * B) + z * y * V[0][1] * A - y * x * V[1][2] * (k * C);
  T e3 = z * D[1] * (3 * A) - y * D[2] * (3 * k * A) + V[1][2] * ((z * z - y * y * k) * A + x * x * (k * (C - B))) +
         z * y * V[1][1] * A - z * y * V[2][2] * (k * A) + z * x * V[0][1] * B - x * y * V[0][2] * (k * C);
  return {e1, e2, e3};
}

namespace detail {

// A term expr / (a_i - a_j), or a bare term when `pair` is empty.
template <class T>
struct PoleTerm {
  std::optional<std::pair<std::size_t, std::size_t>> pair;
  T expr;
};

template <class T>
std::vector<T> combine_pole_terms(const std::vector<PoleTerm<T>>& terms, std::span<const Rational> a) {
  bool degenerate = false;
  for (const auto& t : terms)
    if (t.pair && a[t.pair->first] == a[t.pair->second]) degenerate = true;
  if (!degenerate) {
    T sum = terms.front().expr * Rational(0);
    for (const auto& t : terms)
      sum += t.pair ? t.expr * (1 / (a[t.pair->first] - a[t.pair->second])) : t.expr;
    return {sum};
  }
  // Repeated axes: clear each vanishing difference; what survives is the
  // coefficient of that pole, which must vanish by itself.
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, T>> poles;
  for (const auto& t : terms) {
    if (!t.pair || a[t.pair->first] != a[t.pair->second]) continue;
    auto [i, j] = *t.pair;
    const bool flip = i > j;
    const std::pair<std::size_t, std::size_t> key{std::min(i, j), std::max(i, j)};
    const T e = flip ? t.expr * Rational(-1) : t.expr;
    auto it = std::find_if(poles.begin(), poles.end(), [&](const auto& p) { return p.first == key; });
    if (it == poles.end()) poles.emplace_back(key, e);
    else it->second += e;
  }
  std::vector<T> out;
  for (auto& p : poles) out.push_back(std::move(p.second));
  return out;
}

}  // namespace detail

// The n-axis system (sys4), n >= 3. The first shape is enumerated over i and r < s,
// the second over i < r, giving (n-1) n (n-1) / 2 equations.
template <class T>
std::vector<EquationValue<T>> sys4_operator(const Fields<T>& f, std::span<const Rational> a) {
  const std::size_t n = f.nvars();
  if (n < 3) throw InvalidParameter("sys4: need at least three coordinates");
  if (a.size() != n) throw ArityMismatch("sys4: axis count differs from variable count");
  const auto& x = f.x;
  const auto& V = f.dd;
  const auto& D = f.d;
  using Term = detail::PoleTerm<T>;
  std::vector<EquationValue<T>> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t s = r + 1; s < n; ++s) {
        if (i == r || i == s) continue;
        std::vector<Term> t;
        t.push_back({std::pair{i, r}, x[i] * x[i] * V[r][s] - x[i] * x[r] * V[i][s]});
        t.push_back({std::pair{i, s}, (x[i] * x[i] * V[r][s] - x[i] * x[s] * V[i][r]) * Rational(-1)});
        out.push_back({"sys4.A[" + std::to_string(i + 1) + ";" + std::to_string(r + 1) + "," + std::to_string(s + 1) + "]",
                       detail::combine_pole_terms(t, a)});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = i + 1; r < n; ++r) {
      std::vector<Term> t;
      t.push_back({std::pair{i, r}, x[i] * x[r] * (V[i][i] - V[r][r])});
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == r) continue;
        t.push_back({std::pair{i, j}, x[i] * x[j] * V[j][r] * Rational(-1)});
        t.push_back({std::pair{i, j}, V[i][r] * x[j] * x[j]});
      }
      t.push_back({std::pair{r, i}, V[i][r] * (x[i] * x[i] - x[r] * x[r])});
      t.push_back({std::nullopt, V[i][r]});
      t.push_back({std::pair{i, r}, (x[r] * D[i] - x[i] * D[r]) * Rational(3)});
      out.push_back({"sys4.B[" + std::to_string(i + 1) + "," + std::to_string(r + 1) + "]", detail::combine_pole_terms(t, a)});
    }
  }
  return out;
}

inline std::size_t sys4_equation_count(std::size_t n) { return (n - 1) * n * (n - 1) / 2; }

template <class T>
std::vector<EquationValue<T>> apply_system(const SystemSpec& spec, const Fields<T>& f) {
  if (f.nvars() != spec.nvars()) throw ArityMismatch(system_name(spec.system) + ": potential has the wrong number of variables");
  auto single = [](std::string label, T v) {
    EquationValue<T> e{std::move(label), {}};
    e.components.push_back(std::move(v));
    return e;
  };
  switch (spec.system) {
    case System::eq1: return {single("eq1", eq1_operator(f, spec.lambda))};
    case System::bd: return {single("bd", bd_operator(f, spec.bd))};
    case System::sys8: {
      if (spec.axes.size() != 3) throw ArityMismatch("sys8: need three axes");
      const auto &a = spec.axes[0], &b = spec.axes[1], &c = spec.axes[2];
      if (a == 0 || b == 0 || c == 0) throw DegenerateGeometry("sys8: axes must be nonzero");
      if (a == b || b == c || a == c) throw DegenerateGeometry("sys8: axes must be pairwise distinct");
      auto e = sys8_operator(f, a, b, c);
      return {single("sys8.1", e[0]), single("sys8.2", e[1]), single("sys8.3", e[2])};
    }
    case System::sys10: {
      if (spec.axes.size() != 3) throw ArityMismatch("sys10: need three axes");
      const auto &A = spec.axes[0], &B = spec.axes[1], &C = spec.axes[2];
      if (A == B || B == C || A == C) throw DegenerateGeometry("sys10: axes must be pairwise distinct");
      if (spec.curvature_sign != 1 && spec.curvature_sign != -1) throw InvalidParameter("sys10: curvature sign must be +1 or -1");
      auto e = sys10_operator(f, A, B, C, spec.curvature_sign);
      return {single("sys10.1", e[0]), single("sys10.2", e[1]), single("sys10.3", e[2])};
    }
    case System::sys4: return sys4_operator(f, std::span<const Rational>(spec.axes));
  }
  return {};
}

// ---------------------------------------------------------------------------
// Reports.

enum class Backend { exact, finite_difference };

struct ResidualReport {
  std::string system;
  std::vector<std::string> equation_ids;
  Backend backend = Backend::exact;
  // exact backend: one residual polynomial per equation (first nonzero
  // component when an equation splits), and whether all components vanish
  std::vector<LaurentPoly> exact_residuals;
  std::vector<bool> exact_zero;
  // finite-difference backend: [point][equation]
  std::vector<std::vector<double>> points;
  double step = 0;
  double tolerance = 0;
  std::string arithmetic;  // precision of the difference quotients
  std::vector<std::vector<double>> relative;
  std::vector<std::vector<double>> absolute;

  bool passed() const {
    if (backend == Backend::exact) return std::all_of(exact_zero.begin(), exact_zero.end(), [](bool b) { return b; });
    for (const auto& row : relative)
      for (double r : row)
        if (!(r <= tolerance)) return false;
    return true;
  }

  double max_relative() const {
    double m = 0;
    for (const auto& row : relative)
      for (double r : row) m = std::max(m, r);
    return m;
  }
};

inline ResidualReport exact_residual(const SystemSpec& spec, const LaurentPoly& V) {
  ResidualReport rep;
  rep.system = system_name(spec.system);
  rep.backend = Backend::exact;
  for (auto& eq : apply_system(spec, exact_fields(V))) {
    rep.equation_ids.push_back(eq.label);
    bool zero = true;
    LaurentPoly shown(V.nvars());
    for (auto& c : eq.components) {
      if (!c.is_zero()) {
        if (zero) shown = c;
        zero = false;
      }
    }
    rep.exact_zero.push_back(zero);
    rep.exact_residuals.push_back(std::move(shown));
  }
  return rep;
}

inline ResidualReport eq1_residual(const LaurentPoly& V, const Rational& lambda) {
  SystemSpec s;
  s.system = System::eq1;
  s.lambda = lambda;
  return exact_residual(s, V);
}

// A potential known only through point evaluations. When `wide` is set the
// difference quotients are formed in quad precision.
struct NumericPotential {
  std::size_t nvars = 2;
  std::function<long double(std::span<const long double>)> f;
  std::vector<bool> pole_vars;
  std::function<Wide(std::span<const Wide>)> wide;
};

inline NumericPotential numeric_from_laurent(const LaurentPoly& p) {
  auto compiled = std::make_shared<CompiledPoly<long double>>(p);
  auto compiled_wide = std::make_shared<CompiledPoly<Wide>>(p);
  return NumericPotential{p.nvars(), [compiled](std::span<const long double> q) { return (*compiled)(q); },
                          p.pole_variables(), [compiled_wide](std::span<const Wide> q) { return (*compiled_wide)(q); }};
}

inline NumericPotential numeric_from_form(const SeriesForm& form, double gamma, int order) {
  auto ev = std::make_shared<SeriesEvaluator<long double>>(form, gamma, order);
  auto ev_wide = std::make_shared<SeriesEvaluator<Wide>>(form, gamma, order);
  return NumericPotential{form.nvars, [ev](std::span<const long double> q) { return (*ev)(q); }, form.pole_variables(),
                          [ev_wide](std::span<const Wide> q) { return (*ev_wide)(q); }};
}

struct FdOptions {
  double step = 1e-4;
  double tolerance = 1e-8;
  double pole_exclusion = 1e-3;
  bool richardson = true;
};

inline std::vector<long double> fd_steps(std::span<const double> q, double step) {
  std::vector<long double> h;
  for (double v : q) h.push_back(static_cast<long double>(step) * std::max(1.0L, std::abs(static_cast<long double>(v))));
  return h;
}

inline Jet<long double> narrow_jet(const NumericPotential& V, const std::vector<double>& pt, const FdOptions& opt) {
  const std::vector<long double> q(pt.begin(), pt.end());
  const auto h = fd_steps(pt, opt.step);
  return fd_jet<long double>(V.f, std::span<const long double>(q), std::span<const long double>(h), opt.richardson);
}

inline Jet<long double> wide_jet(const NumericPotential& V, const std::vector<double>& pt, const FdOptions& opt) {
  std::vector<Wide> q, h;
  for (double v : pt) {
    q.emplace_back(v);
    h.push_back(Wide(opt.step) * std::max(Wide(1), Wide(std::abs(v))));
  }
  const auto w = fd_jet<Wide>(V.wide, std::span<const Wide>(q), std::span<const Wide>(h), opt.richardson);
  Jet<long double> j;
  auto narrow = [](const Wide& x) { return static_cast<long double>(x); };
  j.value = narrow(w.value);
  for (const auto& v : w.q) j.q.push_back(narrow(v));
  for (const auto& v : w.grad) j.grad.push_back(narrow(v));
  for (const auto& row : w.hess) {
    j.hess.emplace_back();
    for (const auto& v : row) j.hess.back().push_back(narrow(v));
  }
  return j;
}

inline ResidualReport fd_residual(const SystemSpec& spec, const NumericPotential& V,
                                  const std::vector<std::vector<double>>& points, const FdOptions& opt = {}) {
  if (V.nvars != spec.nvars()) throw ArityMismatch(system_name(spec.system) + ": potential has the wrong number of variables");
  ResidualReport rep;
  rep.system = system_name(spec.system);
  rep.backend = Backend::finite_difference;
  rep.step = opt.step;
  rep.tolerance = opt.tolerance;
  rep.points = points;
  rep.arithmetic = V.wide ? "float128" : "long double";
  for (const auto& pt : points) {
    if (pt.size() != V.nvars) throw ArityMismatch("evaluation point has wrong length");
    for (std::size_t i = 0; i < pt.size(); ++i)
      if (i < V.pole_vars.size() && V.pole_vars[i] && std::abs(pt[i]) < opt.pole_exclusion)
        throw PoleError("evaluation point within the pole exclusion zone of coordinate " + std::to_string(i));
    const auto jet = V.wide ? wide_jet(V, pt, opt) : narrow_jet(V, pt, opt);
    const auto eqs = apply_system(spec, tracked_fields(jet));
    std::vector<double> rel, abs;
    if (rep.equation_ids.empty())
      for (const auto& e : eqs) rep.equation_ids.push_back(e.label);
    for (const auto& e : eqs) {
      double r = 0, a = 0;
      for (const auto& c : e.components) {
        r = std::max(r, static_cast<double>(c.relative()));
        a = std::max(a, static_cast<double>(std::abs(c.value)));
      }
      rel.push_back(r);
      abs.push_back(a);
    }
    rep.relative.push_back(std::move(rel));
    rep.absolute.push_back(std::move(abs));
  }
  return rep;
}

}  // namespace appellsep
