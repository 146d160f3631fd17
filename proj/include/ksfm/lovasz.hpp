#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ksfm/oracle.hpp"
#include "ksfm/subset.hpp"

namespace ksfm {

// Permutation pi: position i (0-based) -> element pi.order[i]. Prefix
// sets pi[i] = {order[0..i-1]} drive the Lovász extension and its
// subgradients g_pi with (g_pi)_{order[i]} = f(pi[i+1]) - f(pi[i]).

struct Permutation {
  std::vector<int> order;

  int n() const { return int(order.size()); }

  bool valid() const {
    std::vector<char> seen(order.size(), 0);
    for (int e : order) {
      if (e < 0 || e >= int(order.size()) || seen[e]) return false;
      seen[e] = 1;
    }
    return true;
  }

  static Permutation identity(int n) {
    Permutation p;
    p.order.resize(n);
    std::iota(p.order.begin(), p.order.end(), 0);
    return p;
  }

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.order == b.order;
  }
};

// Sorts coordinates nonincreasingly; ties broken by ascending element
// index. Every permutation this library derives from a vector goes
// through here, so runs are reproducible bit for bit.
inline Permutation permutation_of(const std::vector<double>& x) {
  Permutation p = Permutation::identity(int(x.size()));
  std::stable_sort(p.order.begin(), p.order.end(),
                   [&](int a, int b) { return x[a] > x[b]; });
  return p;
}

struct Subgradient {
  std::vector<double> g;
  Permutation source;

  double sum() const {
    double s = 0;
    for (double v : g) s += v;
    return s;
  }
  double on(const Subset& set) const {
    double s = 0;
    set.for_each([&](int i) { s += g[i]; });
    return s;
  }
};

// Full subgradient from one batch of n prefix queries.
inline Subgradient subgradient(const EvalOracle& f, const Permutation& pi, QueryLedger& ledger) {
  const int n = f.n();
  std::vector<double> prefixes = evaluate_prefixes(f, Subset(n), pi.order, ledger);
  Subgradient out;
  out.source = pi;
  out.g.resize(n);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    out.g[pi.order[i]] = prefixes[i] - prev;
    prev = prefixes[i];
  }
  return out;
}

// Single coordinate (g_pi)_i from the two bracketing prefixes.
inline double partial_subgradient(const EvalOracle& f, const Permutation& pi, int element,
                                  QueryLedger& ledger) {
  const int n = f.n();
  if (element < 0 || element >= n) throw std::out_of_range("partial_subgradient: bad element");
  Subset prefix(n);
  int pos = -1;
  for (int i = 0; i < n; ++i) {
    prefix.add(pi.order[i]);
    if (pi.order[i] == element) {
      pos = i;
      break;
    }
  }
  (void)pos;
  double with = evaluate(f, prefix, ledger);
  prefix.remove(element);
  double without = prefix.empty() ? 0.0 : evaluate(f, prefix, ledger);
  return with - without;
}

// Lovász extension via the prefix formula along permutation_of(x).
inline double lovasz_eval(const EvalOracle& f, const std::vector<double>& x, QueryLedger& ledger) {
  if (int(x.size()) != f.n()) throw std::invalid_argument("lovasz_eval: dimension mismatch");
  for (double v : x)
    if (v < -1e-12 || v > 1 + 1e-12)
      throw std::domain_error("lovasz_eval: point outside the unit cube");
  Subgradient g = subgradient(f, permutation_of(x), ledger);
  double total = 0;
  for (int i = 0; i < f.n(); ++i) total += g.g[i] * std::clamp(x[i], 0.0, 1.0);
  return total;
}

// Elements of P first (relative order kept), then the rest.
inline Permutation move_to_front(const Permutation& pi, const Subset& p) {
  Permutation out;
  out.order.reserve(pi.order.size());
  for (int e : pi.order)
    if (p.contains(e)) out.order.push_back(e);
  for (int e : pi.order)
    if (!p.contains(e)) out.order.push_back(e);
  return out;
}

// Decrease vector Delta_{pi,P}: zero on P, g_pi - g_{pi<-P} off P.
// Submodularity forces it nonnegative; anything below -1e-9 indicates a
// broken oracle and throws.
inline std::vector<double> delta_move(const EvalOracle& f, const Permutation& pi, const Subset& p,
                                      QueryLedger& ledger) {
  Subgradient before = subgradient(f, pi, ledger);
  Subgradient after = subgradient(f, move_to_front(pi, p), ledger);
  std::vector<double> delta(f.n(), 0.0);
  for (int q = 0; q < f.n(); ++q) {
    if (p.contains(q)) continue;
    double d = before.g[q] - after.g[q];
    if (d < -1e-9)
      throw std::logic_error("delta_move: negative decrease " + std::to_string(d) +
                             " falsifies submodularity");
    delta[q] = std::max(0.0, d);
  }
  return delta;
}

// y_-^l(P): sum of the min(l, count) most negative coordinates of
// min(y, 0) restricted to P.
inline double neg_sum(const std::vector<double>& y, int l, const Subset& p) {
  if (l < 1) throw std::invalid_argument("neg_sum: l must be >= 1");
  std::vector<double> neg;
  p.for_each([&](int i) {
    if (y[i] < 0) neg.push_back(y[i]);
  });
  const int take = std::min<int>(l, int(neg.size()));
  std::partial_sort(neg.begin(), neg.begin() + take, neg.end());
  double s = 0;
  for (int i = 0; i < take; ++i) s += neg[i];
  return s;
}

inline double neg_sum(const std::vector<double>& y, int l) {
  return neg_sum(y, l, Subset::full(int(y.size())));
}

// ---- Certificates ----------------------------------------------------------

// Implicit dual vector y = sum_t weights[t] * g_{perms[t]}. Uniform
// weights unless stated.
struct CertificateBundle {
  std::vector<Permutation> permutations;
  std::vector<double> weights;  // empty = uniform

  std::size_t size() const { return permutations.size(); }
  bool empty() const { return permutations.empty(); }

  double weight(std::size_t t) const {
    return weights.empty() ? 1.0 / double(permutations.size()) : weights[t];
  }

  void append(Permutation pi) { permutations.push_back(std::move(pi)); }

  void check() const {
    if (!weights.empty()) {
      if (weights.size() != permutations.size())
        throw std::invalid_argument("certificate bundle: weight count mismatch");
      double total = 0;
      for (double w : weights) {
        if (w < 0) throw std::invalid_argument("certificate bundle: negative weight");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("certificate bundle: weights must sum to 1");
    }
  }
};

// Materialize the bundle's dual vector; costs |bundle| * n queries, so
// meant for verification at small scale.
inline std::vector<double> certificate_vector(const CertificateBundle& bundle,
                                              const EvalOracle& f, QueryLedger& ledger) {
  if (bundle.empty()) throw std::invalid_argument("certificate_vector: empty bundle");
  bundle.check();
  std::vector<double> y(f.n(), 0.0);
  for (std::size_t t = 0; t < bundle.size(); ++t) {
    Subgradient g = subgradient(f, bundle.permutations[t], ledger);
    const double w = bundle.weight(t);
    for (int i = 0; i < f.n(); ++i) y[i] += w * g.g[i];
  }
  return y;
}

struct CertificateReport {
  bool cond1 = false;           // f* <= y_-^{k+1}(V) + delta
  bool cond2 = false;           // y(S) <= f(S) for every |S| <= k
  double f_star = 0.0;
  double neg_sum_k1 = 0.0;      // y_-^{k+1}(V)
  double worst_violation = 0.0; // max over k-sparse S of y(S) - f(S)

  bool valid() const { return cond1 && cond2; }
};

namespace detail {

// Visit all subsets of size <= k (combinatorial, not 2^n).
template <typename F>
void for_each_sparse_set(int n, int k, F&& visit) {
  std::vector<int> pick;
  Subset set(n);
  auto rec = [&](auto&& self, int start) -> void {
    visit(set);
    if (int(pick.size()) == k) return;
    for (int i = start; i < n; ++i) {
      pick.push_back(i);
      set.add(i);
      self(self, i + 1);
      set.remove(i);
      pick.pop_back();
    }
  };
  rec(rec, 0);
}

}  // namespace detail

// Checks Definition-style (delta, k) dual certificates by enumeration:
// cond2 over all k-sparse sets, cond1 against the brute-force optimum.
// The comparison level l = k+1 is exposed for experimentation.
inline CertificateReport verify_dual_certificate(const EvalOracle& f,
                                                 const std::vector<double>& y, double delta,
                                                 int k, int l = -1, double tol = 1e-9) {
  const int n = f.n();
  if (n > 20) throw std::invalid_argument("verify_dual_certificate limited to n <= 20");
  if (int(y.size()) != n) throw std::invalid_argument("verify_dual_certificate: bad y size");
  if (l < 1) l = k + 1;

  CertificateReport rep;
  double best = 0.0;  // f(empty) = 0
  for (std::uint64_t m = 1; m < (std::uint64_t(1) << n); ++m)
    best = std::min(best, f.value(Subset::from_mask(n, m)));
  rep.f_star = best;
  rep.neg_sum_k1 = neg_sum(y, l);
  rep.cond1 = rep.f_star <= rep.neg_sum_k1 + delta + tol;

  rep.worst_violation = -std::numeric_limits<double>::infinity();
  detail::for_each_sparse_set(n, k, [&](const Subset& s) {
    double ys = 0;
    s.for_each([&](int i) { ys += y[i]; });
    rep.worst_violation = std::max(rep.worst_violation, ys - f.value(s));
  });
  rep.cond2 = rep.worst_violation <= tol;
  return rep;
}

// Base polytope membership: y(S) <= f(S) for all S and y(V) = f(V).
inline bool in_base_polytope(const EvalOracle& f, const std::vector<double>& y,
                             double tol = 1e-9) {
  const int n = f.n();
  if (n > 20) throw std::invalid_argument("in_base_polytope limited to n <= 20");
  std::vector<double> prefix_sum(std::uint64_t(1) << n, 0.0);
  for (std::uint64_t m = 1; m < prefix_sum.size(); ++m) {
    int i = __builtin_ctzll(m);
    prefix_sum[m] = prefix_sum[m & (m - 1)] + y[i];
    if (prefix_sum[m] > f.value(Subset::from_mask(n, m)) + tol) return false;
  }
  double yv = 0;
  for (double v : y) yv += v;
  return std::abs(yv - f.value(Subset::full(n))) <= tol;
}

}  // namespace ksfm
