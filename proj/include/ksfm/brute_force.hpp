#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ksfm/lovasz.hpp"
#include "ksfm/oracle.hpp"
#include "ksfm/subset.hpp"

namespace ksfm {

// Exact reference solvers by enumeration. Values stream one mask at a
// time so n = 24 fits without a 2^n table. On explicit tables every
// value is a single table read, so comparisons against the optimum are
// exact; elsewhere ties are resolved within the given tolerance.

inline std::pair<Subset, double> brute_force_min(const EvalOracle& f) {
  const int n = f.n();
  if (n > 24) throw std::invalid_argument("brute_force_min limited to n <= 24");
  std::uint64_t best_mask = 0;
  double best = 0.0;  // f(empty) = 0
  const std::uint64_t count = std::uint64_t(1) << n;
  for (std::uint64_t m = 1; m < count; ++m) {
    double v = f.value(Subset::from_mask(n, m));
    if (v < best) {
      best = v;
      best_mask = m;
    }
  }
  return {Subset::from_mask(n, best_mask), best};
}

// Minimum over sets of size <= k only.
inline std::pair<Subset, double> brute_force_sparse_min(const EvalOracle& f, int k) {
  const int n = f.n();
  if (n > 24) throw std::invalid_argument("brute_force_sparse_min limited to n <= 24");
  if (k < 0) throw std::invalid_argument("brute_force_sparse_min: k must be >= 0");
  Subset best_set(n);
  double best = 0.0;
  detail::for_each_sparse_set(n, k, [&](const Subset& s) {
    double v = s.empty() ? 0.0 : f.value(s);
    if (v < best) {
      best = v;
      best_set = s;
    }
  });
  return {best_set, best};
}

// Intersection of all optimal sets; a minimizer itself by submodularity.
// tol = 0 gives exact tie resolution (appropriate for explicit tables).
inline Subset minimal_minimizer(const EvalOracle& f, double tol = 0.0) {
  const int n = f.n();
  if (n > 24) throw std::invalid_argument("minimal_minimizer limited to n <= 24");
  const std::uint64_t count = std::uint64_t(1) << n;
  double best = 0.0;
  for (std::uint64_t m = 1; m < count; ++m)
    best = std::min(best, f.value(Subset::from_mask(n, m)));
  std::uint64_t inter = ~std::uint64_t(0);
  if (n < 64) inter = (std::uint64_t(1) << n) - 1;
  for (std::uint64_t m = 0; m < count; ++m) {
    double v = m == 0 ? 0.0 : f.value(Subset::from_mask(n, m));
    if (v <= best + tol) inter &= m;
  }
  return Subset::from_mask(n, inter);
}

// All k-sparse minimizers (exact optima among |S| <= k sets, within tol).
inline std::vector<Subset> k_sparse_minimizers(const EvalOracle& f, int k, double tol = 0.0) {
  auto [set, best] = brute_force_sparse_min(f, k);
  (void)set;
  std::vector<Subset> out;
  detail::for_each_sparse_set(f.n(), k, [&](const Subset& s) {
    double v = s.empty() ? 0.0 : f.value(s);
    if (v <= best + tol) out.push_back(s);
  });
  return out;
}

}  // namespace ksfm
