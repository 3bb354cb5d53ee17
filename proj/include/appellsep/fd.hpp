#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace appellsep {

// Value, gradient and Hessian of a scalar function at a point.
template <class T>
struct Jet {
  std::vector<T> q;
  T value{};
  std::vector<T> grad;
  std::vector<std::vector<T>> hess;
};

// Central second-order differences with per-coordinate steps. With
// `richardson` the h and h/2 estimates are combined as (4 D(h/2) - D(h)) / 3.
template <class S, class F>
Jet<S> fd_jet(F&& f, std::span<const S> q, std::span<const S> steps, bool richardson = true) {
  const std::size_t n = q.size();
  auto estimate = [&](S scale) {
    Jet<S> j;
    j.q.assign(q.begin(), q.end());
    j.grad.assign(n, S(0));
    j.hess.assign(n, std::vector<S>(n, S(0)));
    std::vector<S> pt(q.begin(), q.end());
    const S f0 = f(std::span<const S>(pt));
    j.value = f0;
    for (std::size_t i = 0; i < n; ++i) {
      const S h = steps[i] * scale;
      pt[i] = q[i] + h;
      const S fp = f(std::span<const S>(pt));
      pt[i] = q[i] - h;
      const S fm = f(std::span<const S>(pt));
      pt[i] = q[i];
      j.grad[i] = (fp - fm) / (S(2) * h);
      j.hess[i][i] = (fp - S(2) * f0 + fm) / (h * h);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        const S hi = steps[i] * scale;
        const S hk = steps[k] * scale;
        S acc = 0;
        for (int si : {1, -1}) {
          for (int sk : {1, -1}) {
            pt[i] = q[i] + S(si) * hi;
            pt[k] = q[k] + S(sk) * hk;
            acc += S(si * sk) * f(std::span<const S>(pt));
          }
        }
        pt[i] = q[i];
        pt[k] = q[k];
        j.hess[i][k] = j.hess[k][i] = acc / (S(4) * hi * hk);
      }
    }
    return j;
  };

  Jet<S> coarse = estimate(S(1));
  if (!richardson) return coarse;
  Jet<S> fine = estimate(S(0.5));
  for (std::size_t i = 0; i < n; ++i) {
    fine.grad[i] = (S(4) * fine.grad[i] - coarse.grad[i]) / S(3);
    for (std::size_t k = 0; k < n; ++k) fine.hess[i][k] = (S(4) * fine.hess[i][k] - coarse.hess[i][k]) / S(3);
  }
  return fine;
}

}  // namespace appellsep
