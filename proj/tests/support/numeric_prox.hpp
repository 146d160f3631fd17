#pragma once

// Independent numeric oracle for the capped-simplex proximal step:
// projected gradient descent with Armijo backtracking on
//   F(z) = h^T z + V_{x0}(z),  grad F = h + log z - log x0,
// over {0 <= z <= 1, sum z <= k}. Deliberately shares no code with the
// production implementation (Euclidean projection instead of the
// entropic saturation scan).

#include <algorithm>
#include <cmath>
#include <vector>

namespace ksfm::testing {

// Euclidean projection onto {0 <= z <= 1, sum z <= k} by bisection on
// the shift tau in clip(v - tau, 0, 1).
inline std::vector<double> project_box_capped(std::vector<double> v, int k) {
  auto clipped_sum = [&](double tau) {
    double s = 0;
    for (double x : v) s += std::clamp(x - tau, 0.0, 1.0);
    return s;
  };
  if (clipped_sum(0.0) <= double(k)) {
    for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
    return v;
  }
  double lo = 0.0, hi = 0.0;
  for (double x : v) hi = std::max(hi, x);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (clipped_sum(mid) > double(k))
      lo = mid;
    else
      hi = mid;
  }
  for (auto& x : v) x = std::clamp(x - hi, 0.0, 1.0);
  return v;
}

inline std::vector<double> numeric_prox(const std::vector<double>& x0,
                                        const std::vector<double>& h, int k,
                                        int max_iters = 200000) {
  const int n = int(x0.size());
  const double floor = 1e-18;
  auto objective = [&](const std::vector<double>& z) {
    double f = 0;
    for (int i = 0; i < n; ++i) {
      f += h[i] * z[i];
      if (z[i] > 0) f += z[i] * std::log(z[i] / x0[i]);
      f += x0[i] - z[i];
    }
    return f;
  };
  auto gradient = [&](const std::vector<double>& z, std::vector<double>& g) {
    for (int i = 0; i < n; ++i) g[i] = h[i] + std::log(std::max(z[i], floor) / x0[i]);
  };

  std::vector<double> z = project_box_capped(x0, k);
  for (auto& v : z) v = std::max(v, 1e-6);  // strictly feasible start
  z = project_box_capped(z, k);
  double fz = objective(z);

  std::vector<double> grad(n), prev_grad(n), trial(n), prev_z(n);
  gradient(z, grad);
  double gamma = 0.1;
  int stalled = 0;
  for (int it = 0; it < max_iters; ++it) {
    // Barzilai-Borwein step with Armijo backtracking.
    if (it > 0) {
      double sy = 0, yy = 0;
      for (int i = 0; i < n; ++i) {
        double s = z[i] - prev_z[i], y = grad[i] - prev_grad[i];
        sy += s * y;
        yy += y * y;
      }
      if (sy > 0 && yy > 0) gamma = std::clamp(sy / yy, 1e-12, 1e6);
    }
    bool accepted = false;
    for (int bt = 0; bt < 80 && !accepted; ++bt) {
      for (int i = 0; i < n; ++i) trial[i] = z[i] - gamma * grad[i];
      trial = project_box_capped(trial, k);
      double ft = objective(trial);
      double decrease = 0;
      for (int i = 0; i < n; ++i) decrease += grad[i] * (z[i] - trial[i]);
      if (ft <= fz - 1e-4 * decrease + 1e-18) {
        accepted = true;
      } else {
        gamma *= 0.5;
      }
    }
    if (!accepted) {
      if (++stalled > 3) break;
      gamma = 1e-3;
      continue;
    }
    stalled = 0;
    prev_z.swap(z);
    prev_grad.swap(grad);
    z = trial;
    fz = objective(z);
    gradient(z, grad);
    // Projected-gradient stationarity: a tiny unit-step projected move
    // means the KKT system is satisfied to working precision.
    double station = 0;
    for (int i = 0; i < n; ++i) trial[i] = z[i] - grad[i];
    trial = project_box_capped(trial, k);
    for (int i = 0; i < n; ++i) station = std::max(station, std::abs(trial[i] - z[i]));
    if (station < 1e-11) break;
  }
  return z;
}

}  // namespace ksfm::testing
