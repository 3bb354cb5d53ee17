#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "appellsep/errors.hpp"
#include "appellsep/laurent.hpp"
#include "appellsep/rational.hpp"
#include "appellsep/residuals.hpp"

namespace appellsep {

// Unit mass: momentum equals velocity. Phase polynomials use variables
// q_0..q_{n-1}, p_0..p_{n-1} in that order.
struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;

  std::vector<double> flat() const {
    if (q.size() != p.size()) throw ArityMismatch("phase point: q and p lengths differ");
    std::vector<double> out(q);
    out.insert(out.end(), p.begin(), p.end());
    return out;
  }
};

enum class IntegralKind { ellipse_k1, jacobi_k1, curved_k, elliptic_family_ki, hamiltonian };

inline std::string integral_kind_name(IntegralKind k) {
  switch (k) {
    case IntegralKind::ellipse_k1: return "ellipse-K1";
    case IntegralKind::jacobi_k1: return "jacobi-K1";
    case IntegralKind::curved_k: return "curved-K";
    case IntegralKind::elliptic_family_ki: return "elliptic-family-Ki";
    case IntegralKind::hamiltonian: return "hamiltonian";
  }
  return "?";
}

// `axes` holds A, B (ellipse), a, b, c (Jacobi), A, B, C (curved) or
// a_1..a_n (Ki family). For the hamiltonian only the dimension matters.
// The curvature sign of the curved case is kept apart from the integral's
// name, which the source reuses for both.
struct IntegralSpec {
  IntegralKind kind = IntegralKind::ellipse_k1;
  std::vector<Rational> axes;
  int curvature_sign = 1;
  std::size_t index = 0;  // i for K_i (0-based, i < n-1)
  std::size_t dim = 2;    // hamiltonian only

  std::size_t dimension() const {
    switch (kind) {
      case IntegralKind::ellipse_k1: return 2;
      case IntegralKind::jacobi_k1:
      case IntegralKind::curved_k: return 3;
      case IntegralKind::elliptic_family_ki: return axes.size();
      case IntegralKind::hamiltonian: return dim;
    }
    return 0;
  }
};

namespace detail {

inline LaurentPoly qv(std::size_t n, std::size_t i) { return LaurentPoly::variable(2 * n, i); }
inline LaurentPoly pv(std::size_t n, std::size_t i) { return LaurentPoly::variable(2 * n, n + i); }

// q_i p_j - q_j p_i, the (i, j) angular momentum.
inline LaurentPoly ang(std::size_t n, std::size_t i, std::size_t j) { return qv(n, j) * pv(n, i) - qv(n, i) * pv(n, j); }

inline void require_axes(const IntegralSpec& s, std::size_t count) {
  if (s.axes.size() != count) throw ArityMismatch(integral_kind_name(s.kind) + ": wrong number of axes");
  for (const auto& a : s.axes)
    if (a == 0) throw DegenerateGeometry(integral_kind_name(s.kind) + ": zero axis");
}

}  // namespace detail

// Lift a configuration-space polynomial into phase space.
inline LaurentPoly lift_to_phase(const LaurentPoly& V) {
  const std::size_t n = V.nvars();
  std::vector<std::size_t> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = i;
  return embed(V, 2 * n, std::span<const std::size_t>(target));
}

// Exact phase-space polynomial of an integral; `V` (configuration space) is
// added for the hamiltonian.
inline LaurentPoly integral_poly(const IntegralSpec& s, const std::optional<LaurentPoly>& V = std::nullopt) {
  using namespace detail;
  const std::size_t n = s.dimension();
  if (V && V->nvars() != n) throw ArityMismatch("integral: potential dimension mismatch");
  LaurentPoly out(2 * n);
  switch (s.kind) {
    case IntegralKind::ellipse_k1: {
      require_axes(s, 2);
      const auto &A = s.axes[0], &B = s.axes[1];
      const LaurentPoly L = ang(n, 0, 1);
      out = pv(n, 0) * pv(n, 0) * (1 / A) + pv(n, 1) * pv(n, 1) * (1 / B) - L * L * (1 / (A * B));
      break;
    }
    case IntegralKind::jacobi_k1: {
      require_axes(s, 3);
      LaurentPoly g(2 * n), t(2 * n);
      for (std::size_t i = 0; i < 3; ++i) {
        g += qv(n, i) * qv(n, i) * (1 / (s.axes[i] * s.axes[i]));
        t += pv(n, i) * pv(n, i) * (1 / s.axes[i]);
      }
      out = g * t;
      break;
    }
    case IntegralKind::curved_k: {
      require_axes(s, 3);
      const auto &A = s.axes[0], &B = s.axes[1], &C = s.axes[2];
      const Rational S = s.curvature_sign;
      const LaurentPoly lxy = ang(n, 0, 1), lxz = ang(n, 0, 2), lzy = ang(n, 2, 1);
      out = lxy * lxy * (1 / (A * B)) + lxz * lxz * (S / (A * C)) + lzy * lzy * (S / (B * C));
      break;
    }
    case IntegralKind::elliptic_family_ki: {
      if (n < 2) throw ArityMismatch("Ki: need at least two axes");
      if (s.index >= n) throw ArityMismatch("Ki: index out of range");
      const std::size_t i = s.index;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        if (s.axes[i] == s.axes[j]) throw DegenerateGeometry("Ki: repeated axes");
        const LaurentPoly L = ang(n, i, j);
        out += L * L * (1 / (s.axes[i] - s.axes[j]));
      }
      break;
    }
    case IntegralKind::hamiltonian:
      for (std::size_t i = 0; i < n; ++i) out += pv(n, i) * pv(n, i) * Rational(1, 2);
      break;
  }
  if (V) out += lift_to_phase(*V);
  return out;
}

inline double integral_value(const IntegralSpec& s, const PhasePoint& pt, const std::optional<LaurentPoly>& V = std::nullopt) {
  if (pt.q.size() != s.dimension() || pt.p.size() != s.dimension()) throw ArityMismatch("integral: phase point dimension mismatch");
  const auto flat = pt.flat();
  return eval<double>(integral_poly(s, V), std::span<const double>(flat));
}

// {F, G} = sum_j dF/dq_j dG/dp_j - dF/dp_j dG/dq_j, exactly.
inline LaurentPoly poisson_bracket(const LaurentPoly& F, const LaurentPoly& G) {
  if (F.nvars() != G.nvars() || F.nvars() % 2 != 0) throw ArityMismatch("bracket: phase dimensions differ");
  const std::size_t n = F.nvars() / 2;
  LaurentPoly out(F.nvars());
  for (std::size_t j = 0; j < n; ++j) out += diff(F, j) * diff(G, n + j) - diff(F, n + j) * diff(G, j);
  return out;
}

struct BracketValue {
  double value = 0;
  double magnitude = 0;  // sum of |products| entering the bracket
  double relative() const { return magnitude == 0 ? 0 : std::abs(value) / magnitude; }
};

// Numeric bracket from analytic gradients at a phase point.
inline BracketValue poisson_bracket_at(const LaurentPoly& F, const LaurentPoly& G, const PhasePoint& pt) {
  if (F.nvars() != G.nvars() || F.nvars() != 2 * pt.q.size()) throw ArityMismatch("bracket: phase dimensions differ");
  const std::size_t n = pt.q.size();
  const auto flat = pt.flat();
  const std::span<const double> z(flat);
  BracketValue b;
  for (std::size_t j = 0; j < n; ++j) {
    const double t1 = eval<double>(diff(F, j), z) * eval<double>(diff(G, n + j), z);
    const double t2 = eval<double>(diff(F, n + j), z) * eval<double>(diff(G, j), z);
    b.value += t1 - t2;
    b.magnitude += std::abs(t1) + std::abs(t2);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Coordinate correction k1 for the ellipse billiard, K1~ = K1 + k1.

// dk1/dx = 2 [(1/A - y^2/(AB)) V_x + (xy/(AB)) V_y]
// dk1/dy = 2 [(xy/(AB)) V_x + (1/B - x^2/(AB)) V_y]
inline std::array<LaurentPoly, 2> grad_k1_correction(const LaurentPoly& V, const Rational& A, const Rational& B) {
  if (V.nvars() != 2) throw ArityMismatch("k1: potential must have two variables");
  if (A == 0 || B == 0) throw DegenerateGeometry("k1: zero axis");
  const LaurentPoly x = LaurentPoly::variable(2, 0), y = LaurentPoly::variable(2, 1);
  const LaurentPoly one = LaurentPoly::constant(2, 1);
  const LaurentPoly Vx = diff(V, 0), Vy = diff(V, 1);
  const Rational ab = 1 / (A * B);
  return {(one * (1 / A) - y * y * ab) * Vx * Rational(2) + x * y * Vy * (2 * ab),
          x * y * Vx * (2 * ab) + (one * (1 / B) - x * x * ab) * Vy * Rational(2)};
}

inline std::array<double, 2> grad_k1_correction_at(const LaurentPoly& V, const Rational& A, const Rational& B,
                                                   std::array<double, 2> at) {
  const auto g = grad_k1_correction(V, A, B);
  return {eval<double>(g[0], std::span<const double>(at)), eval<double>(g[1], std::span<const double>(at))};
}

// d/dy (dk1/dx) - d/dx (dk1/dy); equals -2/(AB) times the eq1
// operator at lambda = A - B.
inline LaurentPoly k1_curl(const LaurentPoly& V, const Rational& A, const Rational& B) {
  const auto g = grad_k1_correction(V, A, B);
  return diff(g[0], 1) - diff(g[1], 0);
}

inline Rational k1_curl_factor(const Rational& A, const Rational& B) { return Rational(-2) / (A * B); }

// A Laurent antiderivative of the gradient, when one exists (closed
// gradient, no logarithmic terms). Normalized to have no constant term.
inline std::optional<LaurentPoly> k1_laurent(const LaurentPoly& V, const Rational& A, const Rational& B) {
  const auto g = grad_k1_correction(V, A, B);
  if (!(diff(g[0], 1) == diff(g[1], 0))) return std::nullopt;
  LaurentPoly k(2);
  for (const auto& [e, c] : g[0].terms()) {
    if (e[0] == -1) return std::nullopt;
    k.add_term({e[0] + 1, e[1]}, c / (e[0] + 1));
  }
  const LaurentPoly rest = g[1] - diff(k, 1);
  for (const auto& [e, c] : rest.terms()) {
    if (e[0] != 0 || e[1] == -1) return std::nullopt;
    k.add_term({0, e[1] + 1}, c / (e[1] + 1));
  }
  return k;
}

enum class PathOrder { x_then_y, y_then_x };
enum class K1Backend { exact, quadrature };

struct K1Result {
  double value = 0;
  PathOrder path = PathOrder::x_then_y;
};

namespace detail {

// Integral of c x^e y^f along one axis-parallel segment; `along` is the
// moving coordinate, `fixed` the value of the other one.
inline std::optional<long double> monomial_segment(const MultiExponent& e, const Rational& c, std::size_t along,
                                                   long double from, long double to, long double fixed) {
  const int ea = e[along];
  const int ef = e[1 - along];
  if (ef < 0 && fixed == 0) return std::nullopt;
  if (ea < 0 && (from == 0 || to == 0 || (from < 0) != (to < 0))) return std::nullopt;
  const long double coef = rational_cast<long double>(c) * std::pow(fixed, static_cast<long double>(ef));
  if (ea == -1) return coef * std::log(to / from);
  return coef * (std::pow(to, ea + 1.0L) - std::pow(from, ea + 1.0L)) / (ea + 1);
}

inline std::optional<long double> exact_segment(const LaurentPoly& g, std::size_t along, long double from, long double to,
                                                long double fixed) {
  long double sum = 0;
  for (const auto& [e, c] : g.terms()) {
    auto v = monomial_segment(e, c, along, from, to, fixed);
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum;
}

inline bool segment_admissible(const LaurentPoly& g, std::size_t along, long double from, long double to, long double fixed) {
  const auto poles = g.pole_variables();
  if (poles[1 - along] && fixed == 0) return false;
  if (poles[along] && (from == 0 || to == 0 || (from < 0) != (to < 0))) return false;
  return true;
}

inline long double quadrature_segment(const LaurentPoly& g, std::size_t along, long double from, long double to,
                                      long double fixed) {
  const CompiledPoly<long double> f(g);
  auto integrand = [&](long double t) {
    std::array<long double, 2> pt{};
    pt[along] = t;
    pt[1 - along] = fixed;
    return f(std::span<const long double>(pt));
  };
  // composite 20-point Gauss-Legendre on 16 panels
  constexpr int panels = 16;
  long double sum = 0;
  const long double w = (to - from) / panels;
  for (int i = 0; i < panels; ++i)
    sum += boost::math::quadrature::gauss<long double, 20>::integrate(integrand, from + i * w, from + (i + 1) * w);
  return sum;
}

}  // namespace detail

// Line integral of the k1 gradient from `ref` to `at` along an axis-parallel
// two-segment path; x_then_y is tried first, then y_then_x.
inline K1Result k1_correction(const LaurentPoly& V, const Rational& A, const Rational& B, std::array<double, 2> at,
                              std::array<double, 2> ref, K1Backend backend = K1Backend::exact,
                              std::optional<PathOrder> only = std::nullopt) {
  const auto g = grad_k1_correction(V, A, B);
  for (PathOrder order : {PathOrder::x_then_y, PathOrder::y_then_x}) {
    if (only && *only != order) continue;
    const std::size_t first = order == PathOrder::x_then_y ? 0 : 1;
    const std::size_t second = 1 - first;
    const long double a0 = ref[first], a1 = at[first];
    const long double b0 = ref[second], b1 = at[second];
    if (!detail::segment_admissible(g[first], first, a0, a1, b0) ||
        !detail::segment_admissible(g[second], second, b0, b1, a1))
      continue;
    long double total = 0;
    if (backend == K1Backend::exact) {
      auto s1 = detail::exact_segment(g[first], first, a0, a1, b0);
      auto s2 = detail::exact_segment(g[second], second, b0, b1, a1);
      if (!s1 || !s2) continue;
      total = *s1 + *s2;
    } else {
      total = detail::quadrature_segment(g[first], first, a0, a1, b0) + detail::quadrature_segment(g[second], second, b0, b1, a1);
    }
    return K1Result{static_cast<double>(total), order};
  }
  throw InvalidParameter("k1: no admissible path from the reference point");
}

// Default gauge point: (1, 1) scaled into the ellipse, on the pole-free quadrant.
inline std::array<double, 2> default_k1_refpoint(const Rational& A, const Rational& B) {
  const double a = rational_cast<double>(A), b = rational_cast<double>(B);
  const double s = 0.5 / std::sqrt(1 / a + 1 / b);
  return {s, s};
}

}  // namespace appellsep
