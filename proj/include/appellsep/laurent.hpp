#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "appellsep/errors.hpp"
#include "appellsep/rational.hpp"

namespace appellsep {

// Signed exponents, one per variable of the owning polynomial.
using MultiExponent = std::vector<int>;

// Multivariate Laurent polynomial over Q. Terms are kept in a map ordered
// lexicographically by exponent vector; zero coefficients are never stored.
class LaurentPoly {
 public:
  using TermMap = std::map<MultiExponent, Rational>;

  explicit LaurentPoly(std::size_t nvars = 1) : nvars_(nvars) {
    if (nvars == 0) throw InvalidParameter("LaurentPoly needs at least one variable");
  }

  static LaurentPoly constant(std::size_t nvars, const Rational& c) {
    LaurentPoly p(nvars);
    p.add_term(MultiExponent(nvars, 0), c);
    return p;
  }

  static LaurentPoly monomial(std::size_t nvars, MultiExponent exps, const Rational& c = 1) {
    LaurentPoly p(nvars);
    p.add_term(std::move(exps), c);
    return p;
  }

  static LaurentPoly variable(std::size_t nvars, std::size_t var, int power = 1) {
    if (var >= nvars) throw ArityMismatch("variable index out of range");
    MultiExponent e(nvars, 0);
    e[var] = power;
    return monomial(nvars, std::move(e));
  }

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Rational coeff(const MultiExponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(MultiExponent e, const Rational& c) {
    if (e.size() != nvars_) throw ArityMismatch("exponent length does not match nvars");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  bool is_monomial() const { return terms_.size() == 1; }

  LaurentPoly& operator+=(const LaurentPoly& q) {
    check_arity(q);
    for (const auto& [e, c] : q.terms_) add_term(e, c);
    return *this;
  }
  LaurentPoly& operator-=(const LaurentPoly& q) {
    check_arity(q);
    for (const auto& [e, c] : q.terms_) add_term(e, -c);
    return *this;
  }
  LaurentPoly& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend LaurentPoly operator+(LaurentPoly p, const LaurentPoly& q) { return p += q; }
  friend LaurentPoly operator-(LaurentPoly p, const LaurentPoly& q) { return p -= q; }
  friend LaurentPoly operator-(LaurentPoly p) { return p *= Rational(-1); }
  friend LaurentPoly operator*(LaurentPoly p, const Rational& s) { return p *= s; }
  friend LaurentPoly operator*(const Rational& s, LaurentPoly p) { return p *= s; }

  friend LaurentPoly operator*(const LaurentPoly& p, const LaurentPoly& q) {
    p.check_arity(q);
    LaurentPoly r(p.nvars_);
    MultiExponent e(p.nvars_);
    for (const auto& [ep, cp] : p.terms_) {
      for (const auto& [eq, cq] : q.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ep[i] + eq[i];
        r.add_term(e, cp * cq);
      }
    }
    return r;
  }
  LaurentPoly& operator*=(const LaurentPoly& q) { return *this = *this * q; }

  friend bool operator==(const LaurentPoly& p, const LaurentPoly& q) {
    return p.nvars_ == q.nvars_ && p.terms_ == q.terms_;
  }

  // Nonnegative powers for any polynomial; negative powers only for monomials.
  LaurentPoly pow(int n) const {
    if (n < 0) {
      if (!is_monomial()) throw InvalidParameter("negative power of a non-monomial");
      const auto& [e, c] = *terms_.begin();
      MultiExponent ne(e);
      for (auto& v : ne) v *= n;
      return monomial(nvars_, std::move(ne), pow_int(c, n));
    }
    LaurentPoly result = constant(nvars_, 1);
    LaurentPoly base = *this;
    unsigned u = static_cast<unsigned>(n);
    while (u != 0) {
      if (u & 1u) result *= base;
      u >>= 1u;
      if (u != 0) base *= base;
    }
    return result;
  }

  // Highest absolute exponent of a variable with a negative power, per variable.
  std::vector<bool> pole_variables() const {
    std::vector<bool> poles(nvars_, false);
    for (const auto& [e, c] : terms_)
      for (std::size_t i = 0; i < nvars_; ++i)
        if (e[i] < 0) poles[i] = true;
    return poles;
  }

 private:
  void check_arity(const LaurentPoly& q) const {
    if (q.nvars_ != nvars_) throw ArityMismatch("polynomial arity mismatch");
  }

  std::size_t nvars_;
  TermMap terms_;
};

// Formal partial derivative; e -> e-1 with coefficient times e (negative e included).
inline LaurentPoly diff(const LaurentPoly& p, std::size_t var) {
  if (var >= p.nvars()) throw ArityMismatch("derivative variable out of range");
  LaurentPoly r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    if (e[var] == 0) continue;
    MultiExponent ne(e);
    ne[var] -= 1;
    r.add_term(std::move(ne), c * e[var]);
  }
  return r;
}

inline LaurentPoly diff(const LaurentPoly& p, std::size_t var1, std::size_t var2) {
  return diff(diff(p, var1), var2);
}

namespace detail {

inline void check_poles(const LaurentPoly& p, auto is_zero_at) {
  const auto poles = p.pole_variables();
  for (std::size_t i = 0; i < poles.size(); ++i)
    if (poles[i] && is_zero_at(i))
      throw PoleError("pole at zero: variable x" + std::to_string(i) + " has a negative exponent");
}

template <class T>
T int_power(T base, int e) {
  if (e < 0) return T(1) / int_power(base, -e);
  T r(1);
  while (e != 0) {
    if (e & 1) r *= base;
    e >>= 1;
    if (e != 0) base *= base;
  }
  return r;
}

}  // namespace detail

// Exact value at a rational point.
inline Rational eval(const LaurentPoly& p, std::span<const Rational> point) {
  if (point.size() != p.nvars()) throw ArityMismatch("evaluation point has wrong length");
  detail::check_poles(p, [&](std::size_t i) { return point[i] == 0; });
  Rational sum = 0;
  for (const auto& [e, c] : p.terms()) {
    Rational t = c;
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0) t *= pow_int(point[i], e[i]);
    sum += t;
  }
  return sum;
}

// Floating value at a floating point; coefficients are rounded once.
template <class T>
T eval(const LaurentPoly& p, std::span<const T> point) {
  if (point.size() != p.nvars()) throw ArityMismatch("evaluation point has wrong length");
  detail::check_poles(p, [&](std::size_t i) { return point[i] == T(0); });
  T sum(0);
  for (const auto& [e, c] : p.terms()) {
    T t = rational_cast<T>(c);
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0) t *= detail::int_power(point[i], e[i]);
    sum += t;
  }
  return sum;
}

template <class T>
T eval(const LaurentPoly& p, std::initializer_list<T> point) {
  return eval<T>(p, std::span<const T>(point.begin(), point.size()));
}

// Substitution x_i -> c_i x_i.
inline LaurentPoly scale_vars(const LaurentPoly& p, std::span<const Rational> factors) {
  if (factors.size() != p.nvars()) throw ArityMismatch("scale factor count mismatch");
  for (const auto& f : factors)
    if (f == 0) throw InvalidParameter("zero scale factor");
  LaurentPoly r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    Rational t = c;
    for (std::size_t i = 0; i < e.size(); ++i) t *= pow_int(factors[i], e[i]);
    r.add_term(e, t);
  }
  return r;
}

// Embed into a polynomial ring with more variables: variable i maps to target[i].
inline LaurentPoly embed(const LaurentPoly& p, std::size_t nvars, std::span<const std::size_t> target) {
  if (target.size() != p.nvars()) throw ArityMismatch("embedding map length mismatch");
  LaurentPoly r(nvars);
  for (const auto& [e, c] : p.terms()) {
    MultiExponent ne(nvars, 0);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (target[i] >= nvars) throw ArityMismatch("embedding target out of range");
      ne[target[i]] += e[i];
    }
    r.add_term(std::move(ne), c);
  }
  return r;
}

// Floating copy of a polynomial for repeated evaluation in inner loops.
template <class T>
class CompiledPoly {
 public:
  CompiledPoly() = default;
  explicit CompiledPoly(const LaurentPoly& p) : nvars_(p.nvars()), poles_(p.pole_variables()) {
    for (const auto& [e, c] : p.terms()) terms_.push_back({rational_cast<T>(c), e});
  }

  std::size_t nvars() const { return nvars_; }
  bool empty() const { return terms_.empty(); }

  T operator()(std::span<const T> point) const {
    T sum(0);
    for (const auto& t : terms_) {
      T v = t.coeff;
      for (std::size_t i = 0; i < nvars_; ++i)
        if (t.exps[i] != 0) v *= detail::int_power(point[i], t.exps[i]);
      sum += v;
    }
    return sum;
  }

  bool has_pole(std::size_t var) const { return var < poles_.size() && poles_[var]; }

 private:
  struct Term {
    T coeff;
    MultiExponent exps;
  };
  std::size_t nvars_ = 0;
  std::vector<bool> poles_;
  std::vector<Term> terms_;
};

// Canonical text: one term per line, "coeff * x0^e0 x1^e1 ...", lexicographic
// exponent order. The zero polynomial is the single line "0".
inline std::string to_text(const LaurentPoly& p) {
  if (p.is_zero()) return "0\n";
  std::ostringstream os;
  for (const auto& [e, c] : p.terms()) {
    os << to_string(c) << " *";
    for (std::size_t i = 0; i < e.size(); ++i) os << " x" << i << '^' << e[i];
    os << '\n';
  }
  return os.str();
}

// Parses the canonical text form. Terms may be separated by newlines or " + ".
// Variables not mentioned in a term get exponent 0; nvars defaults to one more
// than the largest variable index seen.
inline LaurentPoly parse_laurent(const std::string& text, std::size_t nvars = 0) {
  std::vector<std::pair<Rational, std::vector<std::pair<std::size_t, int>>>> parsed;
  std::size_t max_var = 0;
  bool any_var = false;
  std::string normalized = text;
  for (std::size_t pos = normalized.find(" + "); pos != std::string::npos; pos = normalized.find(" + "))
    normalized.replace(pos, 3, "\n");
  std::istringstream lines(normalized);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;
    Rational c = parse_rational(tok);
    std::vector<std::pair<std::size_t, int>> factors;
    while (tokens >> tok) {
      if (tok == "*") continue;
      if (tok.size() < 2 || tok[0] != 'x') throw InvalidParameter("bad monomial factor: " + tok);
      const auto caret = tok.find('^');
      try {
        const std::size_t var = std::stoul(tok.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
        const int ex = caret == std::string::npos ? 1 : std::stoi(tok.substr(caret + 1));
        factors.emplace_back(var, ex);
        max_var = std::max(max_var, var);
        any_var = true;
      } catch (const std::logic_error&) {
        throw InvalidParameter("bad monomial factor: " + tok);
      }
    }
    parsed.emplace_back(std::move(c), std::move(factors));
  }
  const std::size_t n = nvars != 0 ? nvars : (any_var ? max_var + 1 : 1);
  if (any_var && max_var >= n) throw ArityMismatch("variable index exceeds declared nvars");
  LaurentPoly p(n);
  for (auto& [c, factors] : parsed) {
    MultiExponent e(n, 0);
    for (const auto& [var, ex] : factors) e[var] += ex;
    p.add_term(std::move(e), c);
  }
  return p;
}

}  // namespace appellsep
