#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "appellsep/errors.hpp"
#include "appellsep/laurent.hpp"
#include "appellsep/mechanics.hpp"
#include "appellsep/rational.hpp"

namespace appellsep {

struct State2 {
  double t = 0;
  std::array<double, 2> q{};
  std::array<double, 2> p{};
};

struct BounceEvent {
  double t = 0;
  std::array<double, 2> point{};
  std::array<double, 2> p_in{};
  std::array<double, 2> p_out{};
};

struct SimConfig {
  Rational A = 3, B = 2;
  std::optional<LaurentPoly> potential;  // configuration-space V(x, y)
  PhasePoint initial;
  double dt = 1e-3;
  double t_max = 1e9;
  int bounce_max = 50;
  double tol = 1e-12;
  std::optional<std::array<double, 2>> refpoint;  // k1 gauge; defaults to default_k1_refpoint
  int sample_every = 1;
  double pole_exclusion = 1e-3;
  bool keep_samples = true;
};

struct Sample {
  double t, x, y, px, py, H, K1tilde;
};

struct ConservationReport {
  std::vector<Sample> samples;
  std::vector<BounceEvent> bounces;
  double H0 = 0, K0 = 0;
  double max_drift_H = 0;
  double max_drift_K = 0;
  double max_bounce_jump_K = 0;  // |K~1 after - before| at reflections
  double max_impact_residual = 0;
  long steps = 0;
  long bisection_iterations = 0;
  bool aborted = false;
  std::string abort_reason;
  std::array<double, 2> refpoint{};
  std::string k1_backend;
  double t_end = 0;
};

inline double boundary_g(const Rational& A, const Rational& B, std::array<double, 2> q) {
  return q[0] * q[0] / rational_cast<double>(A) + q[1] * q[1] / rational_cast<double>(B) - 1.0;
}

// Time at which free motion from q (inside) with velocity p reaches the boundary.
inline double free_flight_hit_time(const Rational& A, const Rational& B, std::array<double, 2> q, std::array<double, 2> p) {
  const double a_ = rational_cast<double>(A), b_ = rational_cast<double>(B);
  const double a = p[0] * p[0] / a_ + p[1] * p[1] / b_;
  if (a == 0) throw InvalidParameter("free flight: zero velocity never reaches the boundary");
  const double b = 2 * (q[0] * p[0] / a_ + q[1] * p[1] / b_);
  const double c = boundary_g(A, B, q);
  const double disc = std::sqrt(b * b - 4 * a * c);
  // positive root, written to avoid cancellation
  return b >= 0 ? (-2 * c) / (b + disc) : (disc - b) / (2 * a);
}

// p_out = p_in - 2 (p_in . n) n with n the unit outward normal at `point`.
inline std::array<double, 2> reflect(std::array<double, 2> point, std::array<double, 2> p_in, const Rational& A,
                                     const Rational& B, double tol = 1e-9) {
  if (std::abs(boundary_g(A, B, point)) > tol) throw InvalidParameter("reflect: impact point is off the boundary");
  double nx = point[0] / rational_cast<double>(A), ny = point[1] / rational_cast<double>(B);
  const double len = std::hypot(nx, ny);
  nx /= len;
  ny /= len;
  const double dot = p_in[0] * nx + p_in[1] * ny;
  return {p_in[0] - 2 * dot * nx, p_in[1] - 2 * dot * ny};
}

// Flow of H = p^2/2 + V between reflections.
class SegmentIntegrator {
 public:
  SegmentIntegrator(const Rational& A, const Rational& B, const std::optional<LaurentPoly>& V, double tol,
                    double pole_exclusion)
      : A_(A), B_(B), tol_(tol), pole_exclusion_(pole_exclusion) {
    if (V) {
      if (V->nvars() != 2) throw ArityMismatch("billiard: potential must have two variables");
      gx_.emplace(diff(*V, 0));
      gy_.emplace(diff(*V, 1));
      poles_ = V->pole_variables();
    }
  }

  struct Result {
    State2 state;
    std::optional<State2> hit;  // state at the boundary, before reflection
    long bisection_iterations = 0;
  };

  bool free() const { return !gx_.has_value(); }

  void check_poles(const std::array<double, 2>& q) const {
    for (std::size_t i = 0; i < poles_.size(); ++i)
      if (poles_[i] && std::abs(q[i]) < pole_exclusion_)
        throw SingularityApproach("trajectory entered the pole exclusion zone of coordinate " + std::to_string(i));
  }

  // a fast step can jump straight over the exclusion zone
  void check_crossing(const std::array<double, 2>& from, const std::array<double, 2>& to) const {
    for (std::size_t i = 0; i < poles_.size(); ++i)
      if (poles_[i] && (from[i] < 0) != (to[i] < 0))
        throw SingularityApproach("trajectory crossed the pole of coordinate " + std::to_string(i));
  }

  // One step of size h (Yoshida composition, or a straight line without V).
  State2 step(const State2& s, double h) const {
    State2 r = s;
    r.t += h;
    if (free()) {
      r.q = {s.q[0] + h * s.p[0], s.q[1] + h * s.p[1]};
      return r;
    }
    static const double cbrt2 = std::cbrt(2.0);
    static const double w1 = 1.0 / (2.0 - cbrt2);
    static const double w0 = -cbrt2 / (2.0 - cbrt2);
    const double c[4] = {w1 / 2, (w0 + w1) / 2, (w0 + w1) / 2, w1 / 2};
    const double d[3] = {w1, w0, w1};
    for (int k = 0; k < 4; ++k) {
      r.q[0] += c[k] * h * r.p[0];
      r.q[1] += c[k] * h * r.p[1];
      if (k == 3) break;
      const std::span<const double> q(r.q);
      r.p[0] -= d[k] * h * (*gx_)(q);
      r.p[1] -= d[k] * h * (*gy_)(q);
    }
    if (!std::isfinite(r.q[0]) || !std::isfinite(r.q[1]) || !std::isfinite(r.p[0]) || !std::isfinite(r.p[1]))
      throw StepFailure("integrator produced a non-finite state");
    return r;
  }

  // Advance by at most h; if the boundary is crossed, localize the crossing
  // by bisection on the step length and project the impact onto the boundary.
  Result advance(const State2& s, double h) const {
    Result res;
    State2 next = step(s, h);
    if (boundary_g(A_, B_, next.q) <= 0) {
      res.state = next;
      return res;
    }
    double lo = 0, hi = h;
    State2 at = next;
    for (int it = 0; it < 200; ++it) {
      ++res.bisection_iterations;
      const double mid = 0.5 * (lo + hi);
      State2 m = step(s, mid);
      const double g = boundary_g(A_, B_, m.q);
      if (g > 0) {
        hi = mid;
        at = m;
      } else {
        lo = mid;
        at = m;
      }
      if (std::abs(g) <= tol_ || hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s.t))) break;
    }
    // project onto the boundary along the ray from the centre
    const double scale = 1.0 / std::sqrt(1.0 + boundary_g(A_, B_, at.q));
    at.q = {at.q[0] * scale, at.q[1] * scale};
    res.state = at;
    res.hit = at;
    return res;
  }

 private:
  Rational A_, B_;
  double tol_;
  double pole_exclusion_;
  std::optional<CompiledPoly<double>> gx_, gy_;
  std::vector<bool> poles_;
};

// Evaluates H and K~1 = K1 + k1 along a trajectory.
class IntegralMonitor {
 public:
  IntegralMonitor(const Rational& A, const Rational& B, const std::optional<LaurentPoly>& V, std::array<double, 2> ref)
      : A_(A), B_(B), ref_(ref) {
    IntegralSpec k1spec{IntegralKind::ellipse_k1, {A, B}};
    k1_.emplace(integral_poly(k1spec));
    if (V) {
      v_.emplace(*V);
      vpoly_ = *V;
      if (auto k = k1_laurent(*V, A, B)) {
        const std::array<double, 2> r = ref;
        k_.emplace(*k);
        kref_ = (*k_)(std::span<const double>(r));
        backend_ = "exact-antiderivative";
      } else {
        backend_ = "exact-path-integral";
      }
    } else {
      backend_ = "none";
    }
  }

  double H(const State2& s) const {
    double h = 0.5 * (s.p[0] * s.p[0] + s.p[1] * s.p[1]);
    if (v_) h += (*v_)(std::span<const double>(s.q));
    return h;
  }

  double k1(const std::array<double, 2>& q) const {
    if (!v_) return 0;
    if (k_) return (*k_)(std::span<const double>(q)) - kref_;
    return k1_correction(vpoly_, A_, B_, q, ref_).value;
  }

  double K(const State2& s) const {
    const std::array<double, 4> z{s.q[0], s.q[1], s.p[0], s.p[1]};
    return (*k1_)(std::span<const double>(z)) + k1(s.q);
  }

  const std::string& backend() const { return backend_; }

 private:
  Rational A_, B_;
  std::array<double, 2> ref_;
  std::optional<CompiledPoly<double>> k1_, v_, k_;
  LaurentPoly vpoly_{2};
  double kref_ = 0;
  std::string backend_;
};

inline double relative_drift(double value, double reference) {
  const double scale = std::max(std::abs(reference), std::numeric_limits<double>::min());
  return std::abs(value - reference) / scale;
}

inline ConservationReport run(const SimConfig& cfg) {
  if (cfg.initial.q.size() != 2 || cfg.initial.p.size() != 2) throw ArityMismatch("billiard: initial state must be planar");
  if (!(cfg.dt > 0)) throw InvalidParameter("billiard: dt must be positive");
  if (cfg.A <= 0 || cfg.B <= 0) throw InvalidParameter("billiard: axes must be positive");
  State2 s;
  s.q = {cfg.initial.q[0], cfg.initial.q[1]};
  s.p = {cfg.initial.p[0], cfg.initial.p[1]};
  if (boundary_g(cfg.A, cfg.B, s.q) >= 0) throw InvalidParameter("billiard: initial point must lie strictly inside");

  SegmentIntegrator flow(cfg.A, cfg.B, cfg.potential, cfg.tol, cfg.pole_exclusion);
  ConservationReport rep;
  rep.refpoint = cfg.refpoint.value_or(default_k1_refpoint(cfg.A, cfg.B));
  flow.check_poles(s.q);
  IntegralMonitor mon(cfg.A, cfg.B, cfg.potential, rep.refpoint);
  rep.k1_backend = mon.backend();
  rep.H0 = mon.H(s);
  rep.K0 = mon.K(s);

  auto record = [&](const State2& st) {
    const double h = mon.H(st), k = mon.K(st);
    rep.max_drift_H = std::max(rep.max_drift_H, relative_drift(h, rep.H0));
    rep.max_drift_K = std::max(rep.max_drift_K, relative_drift(k, rep.K0));
    if (cfg.keep_samples) rep.samples.push_back({st.t, st.q[0], st.q[1], st.p[0], st.p[1], h, k});
  };
  record(s);

  long since_sample = 0;
  try {
    while (s.t < cfg.t_max && static_cast<int>(rep.bounces.size()) < cfg.bounce_max) {
      const double h = std::min(cfg.dt, cfg.t_max - s.t);
      auto res = flow.advance(s, h);
      ++rep.steps;
      rep.bisection_iterations += res.bisection_iterations;
      flow.check_crossing(s.q, res.state.q);
      s = res.state;
      flow.check_poles(s.q);
      if (res.hit) {
        rep.max_impact_residual = std::max(rep.max_impact_residual, std::abs(boundary_g(cfg.A, cfg.B, s.q)));
        BounceEvent ev{s.t, s.q, s.p, reflect(s.q, s.p, cfg.A, cfg.B, std::max(cfg.tol * 10, 1e-12))};
        const double before = mon.K(s);
        s.p = ev.p_out;
        const double after = mon.K(s);
        rep.max_bounce_jump_K = std::max(rep.max_bounce_jump_K, std::abs(after - before));
        rep.bounces.push_back(ev);
        record(s);
        since_sample = 0;
      } else if (++since_sample >= cfg.sample_every) {
        record(s);
        since_sample = 0;
      }
    }
    if (since_sample > 0) record(s);  // final state always sampled
  } catch (const SingularityApproach& e) {
    rep.aborted = true;
    rep.abort_reason = e.what();
  }
  rep.t_end = s.t;
  return rep;
}

}  // namespace appellsep
