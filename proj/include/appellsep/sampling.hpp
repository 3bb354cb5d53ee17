#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "appellsep/errors.hpp"
#include "appellsep/potentials.hpp"

namespace appellsep {

// Uniform double in [lo, hi) from the raw 64-bit stream, so a seed gives the
// same points on every standard library.
inline double uniform_from(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

struct SamplingOptions {
  double box = 1.5;           // coordinates drawn from [-box, box]
  double pole_margin = 0.1;   // |q_i| >= pole_margin on singular coordinates
  double coordinate_margin = 0.05;  // |q_i| >= coordinate_margin on every coordinate
  double domain_margin = 0.6; // sqrt|X| + sqrt|Y| <= domain_margin for non-terminating series
  long max_tries = 2000000;
};

// Random points at which a closed form is admissible: off its singular
// planes and, unless `terminating`, well inside the F4 convergence region.
// Every coordinate also keeps clear of zero: the residual terms carry
// factors q_i, so the relative residual loses its scale on those planes.
inline std::vector<std::vector<double>> admissible_points(const SeriesForm& f, bool terminating, std::size_t count,
                                                         std::uint64_t seed, const SamplingOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  const auto poles = f.pole_variables();
  const CompiledPoly<double> X(f.x_arg), Y(f.y_arg);
  std::vector<std::vector<double>> out;
  std::vector<double> q(f.nvars);
  for (long tries = 0; out.size() < count; ++tries) {
    if (tries >= opt.max_tries) throw OutOfDomain("could not find enough admissible sample points");
    for (auto& v : q) v = uniform_from(rng, -opt.box, opt.box);
    bool ok = true;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (poles[i] && std::abs(q[i]) < opt.pole_margin) ok = false;
      if (std::abs(q[i]) < opt.coordinate_margin) ok = false;
    }
    if (!ok) continue;
    if (!terminating) {
      const std::span<const double> s(q);
      if (std::sqrt(std::abs(X(s))) + std::sqrt(std::abs(Y(s))) > opt.domain_margin) continue;
    }
    out.push_back(q);
  }
  return out;
}

// Random rational points with small numerators and denominators, none zero.
inline std::vector<std::vector<Rational>> random_rational_points(std::size_t nvars, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Rational>> out;
  while (out.size() < count) {
    std::vector<Rational> q;
    for (std::size_t i = 0; i < nvars; ++i) {
      long num = 0;
      while (num == 0) num = static_cast<long>(rng() % 19) - 9;
      const long den = static_cast<long>(rng() % 7) + 1;
      q.push_back(make_rational(num, den));
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace appellsep
