#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksfm/lovasz.hpp"
#include "ksfm/rng.hpp"

namespace ksfm {

// Entropy geometry over the capped simplex
//   S_k^V = { x in [0,1]^V : sum_i x_i <= k },
// with regularizer r(x) = sum_i x_i log x_i and Bregman divergence
//   V_x(y) = <y, log(y/x)> + <x - y, 1>.
// The proximal step argmin_{z in S_k^V} h^T z + V_x(z) reduces to an
// entropic projection of y_j = x_j exp(-h_j): saturate the i largest
// coordinates at 1 and scale the rest by exp(-lambda). All arithmetic
// runs on log y so arbitrarily large cumulative h cannot overflow.

struct CappedSimplexPoint {
  std::vector<double> x;
  int cap = 1;

  void check(double tol_box = 1e-12, double tol_sum = 1e-9) const {
    double total = 0;
    for (double v : x) {
      if (v < -tol_box || v > 1 + tol_box)
        throw std::logic_error("capped simplex point leaves the unit box");
      total += v;
    }
    if (total > cap + tol_sum)
      throw std::logic_error("capped simplex point exceeds its l1 cap");
  }
};

inline double entropy(const std::vector<double>& x) {
  double r = 0;
  for (double v : x) {
    if (v < 0) throw std::domain_error("entropy: negative coordinate");
    if (v > 0) r += v * std::log(v);
  }
  return r;
}

inline double bregman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("bregman: dimension mismatch");
  double r = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0) throw std::domain_error("bregman: center must be positive");
    if (y[i] < 0) throw std::domain_error("bregman: negative coordinate");
    if (y[i] > 0) r += y[i] * std::log(y[i] / x[i]);
    r += x[i] - y[i];
  }
  return r;
}

// Entropy strong-convexity modulus on S_cap^V w.r.t. the l1 norm.
inline double strong_convexity_modulus(int cap) { return 1.0 / double(cap); }

namespace detail {

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Core projection given log y. Scans the saturation count i = 0..k-1:
// lambda = max{0, log(sum of remaining y / (k-i))}; accept once the
// largest remaining coordinate stays <= 1 and the smallest saturated one
// stays >= 1 (the latter is what makes the multipliers mu_j = log y_j -
// lambda nonnegative). i = 0 covers the fully unsaturated case, which
// the KKT conditions demand whenever y_max e^{-lambda} <= 1.
inline CappedSimplexPoint prox_from_log(const std::vector<double>& log_y, int k) {
  const int n = int(log_y.size());
  if (k < 1) throw std::invalid_argument("proximal step: cap must be >= 1");
  if (n == 0) return CappedSimplexPoint{{}, k};
  Permutation pi = permutation_of(log_y);

  std::vector<double> suffix_lse(n + 1, -std::numeric_limits<double>::infinity());
  for (int i = n - 1; i >= 0; --i)
    suffix_lse[i] = log_add(log_y[pi.order[i]], suffix_lse[i + 1]);

  const double tie_tol = 1e-12;  // absorbs round-off at saturation boundaries
  const int max_saturated = std::min(k, n);
  for (int i = 0; i < max_saturated; ++i) {
    double lambda = std::max(0.0, suffix_lse[i] - std::log(double(k - i)));
    bool top_ok = log_y[pi.order[i]] - lambda <= tie_tol;
    bool bottom_ok = i == 0 || log_y[pi.order[i - 1]] - lambda >= -tie_tol;
    if (top_ok && bottom_ok) {
      CappedSimplexPoint z;
      z.cap = k;
      z.x.assign(n, 0.0);
      for (int j = 0; j < i; ++j) z.x[pi.order[j]] = 1.0;
      for (int j = i; j < n; ++j)
        z.x[pi.order[j]] = std::min(1.0, std::exp(log_y[pi.order[j]] - lambda));
      return z;
    }
  }
  // Everything saturates: only reachable when n <= k and all y >= 1.
  if (n <= k) {
    double lambda = std::max(0.0, suffix_lse[n - 1]);
    if (log_y[pi.order[n - 1]] - lambda >= 0.0 || n < k) {
      CappedSimplexPoint z;
      z.cap = k;
      z.x.assign(n, 1.0);
      return z;
    }
  }
  throw std::logic_error("proximal step: saturation scan found no consistent level");
}

inline double prox_kkt_residual(const std::vector<double>& log_y, int k,
                                const CappedSimplexPoint& z) {
  const int n = int(log_y.size());
  double total = 0;
  for (double v : z.x) total += v;
  // Recover lambda from an unsaturated coordinate that did not underflow.
  double lambda = 0.0;
  bool found = false;
  for (int i = 0; i < n && !found; ++i)
    if (z.x[i] < 1.0 - 1e-12 && z.x[i] > 1e-250) {
      lambda = log_y[i] - std::log(z.x[i]);
      found = true;
    }
  double residual = std::max(0.0, -lambda);
  residual = std::max(residual, total - k);
  if (lambda > 1e-10) residual = std::max(residual, std::abs(total - k));
  for (int i = 0; i < n; ++i) {
    const double shifted = log_y[i] - lambda;
    if (z.x[i] >= 1.0 - 1e-12) {
      residual = std::max(residual, -shifted);  // box multiplier mu_i = shifted
    } else if (z.x[i] > 1e-250) {
      residual = std::max(residual, std::abs(shifted - std::log(z.x[i])));
    } else {
      // Underflowed coordinate: stationarity holds iff it truly is tiny.
      if (shifted > -700) residual = std::max(residual, 1.0);
    }
  }
  return residual;
}

inline void debug_check_prox(const std::vector<double>& log_y, int k,
                             const CappedSimplexPoint& z) {
  z.check();
  double residual = prox_kkt_residual(log_y, k, z);
  if (residual > 1e-8)
    throw std::logic_error("proximal step: KKT residual " + std::to_string(residual));
  // Appendix-style ordering: larger y never maps below smaller y.
  Permutation pi = permutation_of(log_y);
  for (int i = 0; i + 1 < int(log_y.size()); ++i)
    if (z.x[pi.order[i]] < z.x[pi.order[i + 1]] - 1e-12)
      throw std::logic_error("proximal step: output violates the ordering property");
}

}  // namespace detail

// argmin_{z in S_k^V} h^T z + V_{x0}(z); x0 must be strictly positive.
inline CappedSimplexPoint proximal_step(const std::vector<double>& x0,
                                        const std::vector<double>& h, int k) {
  if (x0.size() != h.size()) throw std::invalid_argument("proximal step: dimension mismatch");
  std::vector<double> log_y(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (x0[i] <= 0) throw std::domain_error("proximal step: center must be positive");
    log_y[i] = std::log(x0[i]) - h[i];
  }
  CappedSimplexPoint z = detail::prox_from_log(log_y, k);
#ifndef NDEBUG
  detail::debug_check_prox(log_y, k, z);
#endif
  return z;
}

// argmin_{z in S_k^V} h^T z + r(z), i.e. the FTRL update at cumulative
// linearization h. Equals proximal_step from the uniform center with h
// shifted by grad r; in log space that is simply log y = -h - 1.
inline CappedSimplexPoint ftrl_update(const std::vector<double>& h_cumulative, int k) {
  std::vector<double> log_y(h_cumulative.size());
  for (std::size_t i = 0; i < h_cumulative.size(); ++i) log_y[i] = -h_cumulative[i] - 1.0;
  CappedSimplexPoint z = detail::prox_from_log(log_y, k);
#ifndef NDEBUG
  detail::debug_check_prox(log_y, k, z);
#endif
  return z;
}

// Sorted order of the FTRL iterate without materializing it: the update
// orders coordinates by -h (ties by ascending index) for every cap k.
inline Permutation implied_permutation(const std::vector<double>& h_cumulative) {
  std::vector<double> neg(h_cumulative.size());
  for (std::size_t i = 0; i < h_cumulative.size(); ++i) neg[i] = -h_cumulative[i];
  return permutation_of(neg);
}

// ---- Iterative schemes -----------------------------------------------------

struct IterateTrace {
  std::vector<std::vector<double>> points;          // x_0 .. x_m
  std::vector<std::vector<double>> gradients_used;  // h_0 .. h_{m-1}
};

// Mirror descent over S_cap^V: x_{t+1} = argmin eta h_t^T x + V_{x_t}(x).
// grad(x_t, t) may truncate, sample, or be exact. The observer sees every
// (t, x_t, h_t) so callers can stream averages instead of storing traces.
template <typename GradFn, typename Observer>
void mirror_descent_run(GradFn&& grad, int cap, std::vector<double> x0, double eta, int m,
                        Observer&& observe) {
  if (eta <= 0) throw std::invalid_argument("mirror descent: step size must be positive");
  if (m < 1) throw std::invalid_argument("mirror descent: need at least one iteration");
  std::vector<double> x = std::move(x0);
  std::vector<double> scaled(x.size());
  for (int t = 0; t < m; ++t) {
    std::vector<double> h = grad(x, t);
    observe(t, x, h);
    for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = eta * h[i];
    CappedSimplexPoint next = proximal_step(x, scaled, cap);
    // Keep iterates strictly positive so they remain valid prox centers.
    for (auto& v : next.x) v = std::max(v, 1e-300);
    x = std::move(next.x);
  }
}

template <typename GradFn>
IterateTrace mirror_descent(GradFn&& grad, int cap, std::vector<double> x0, double eta, int m) {
  IterateTrace trace;
  std::vector<double> last = x0;
  mirror_descent_run(
      grad, cap, std::move(x0), eta, m,
      [&](int, const std::vector<double>& x, const std::vector<double>& h) {
        trace.points.push_back(x);
        trace.gradients_used.push_back(h);
      });
  // Recompute the final point for the trace tail.
  std::vector<double> scaled(trace.points.back().size());
  for (std::size_t i = 0; i < scaled.size(); ++i)
    scaled[i] = eta * trace.gradients_used.back()[i];
  trace.points.push_back(proximal_step(trace.points.back(), scaled, cap).x);
  return trace;
}

// Stochastic FTRL over S_k^V: x_0 = argmin r (the FTRL update of the
// zero vector), x_{t+1} from the cumulative eta-scaled h. Enforces the
// step-size guard eta * ||h_t||_inf < 1/2 that the high-probability
// analysis needs.
template <typename Sampler>
IterateTrace stochastic_ftrl(int n, Sampler&& sampler, int k, double eta, int m,
                             RngStream& rng) {
  if (eta <= 0) throw std::invalid_argument("stochastic ftrl: step size must be positive");
  IterateTrace trace;
  std::vector<double> cumulative(n, 0.0);
  for (int t = 0; t < m; ++t) {
    CappedSimplexPoint x = ftrl_update(cumulative, k);
    trace.points.push_back(x.x);
    std::vector<double> h = sampler(x.x, t, rng);
    double hmax = 0;
    for (double v : h) hmax = std::max(hmax, std::abs(v));
    if (eta * hmax >= 0.5)
      throw std::runtime_error("stochastic ftrl: step-size guard eta*||h||_inf < 1/2 failed at t=" +
                               std::to_string(t));
    for (int i = 0; i < n; ++i) cumulative[i] += eta * h[i];
    trace.gradients_used.push_back(std::move(h));
  }
  trace.points.push_back(ftrl_update(cumulative, k).x);
  return trace;
}

// Stochastic multiplicative weights test utility: w^(0) = 1,
// w^(t+1)_i = w^(t)_i exp(g^(t)_i), exposing the normalized p^(t).
struct WeightTrace {
  std::vector<std::vector<double>> p;  // p^(0) .. p^(m)
};

inline WeightTrace multiplicative_weights(const std::vector<std::vector<double>>& g_sequence,
                                          int n) {
  WeightTrace trace;
  std::vector<double> log_w(n, 0.0);
  auto push_normalized = [&]() {
    double lse = -std::numeric_limits<double>::infinity();
    for (double lw : log_w) lse = detail::log_add(lse, lw);
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = std::exp(log_w[i] - lse);
    trace.p.push_back(std::move(p));
  };
  push_normalized();
  for (const auto& g : g_sequence) {
    if (int(g.size()) != n) throw std::invalid_argument("multiplicative weights: bad g size");
    for (double v : g)
      if (std::abs(v) > 0.5 + 1e-12)
        throw std::runtime_error("multiplicative weights: ||g||_inf <= 1/2 violated");
    for (int i = 0; i < n; ++i) log_w[i] += g[i];
    push_normalized();
  }
  return trace;
}

}  // namespace ksfm
