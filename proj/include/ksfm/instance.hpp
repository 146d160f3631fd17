#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ksfm/oracle.hpp"
#include "ksfm/rng.hpp"
#include "ksfm/subset.hpp"

namespace ksfm {

constexpr double kValueTol = 1e-9;

// ---- Declarative instance definitions --------------------------------------

// f(S) = sum of w over edges cut by S.
struct CutParams {
  struct Edge {
    int a, b;
    double w;
  };
  std::vector<Edge> edges;
};

// f(S) = sum of item weights covered by S plus a modular term:
// item u is covered iff S intersects cover_sets[u].
struct CoverageParams {
  int universe = 0;
  std::vector<std::vector<int>> cover_sets;  // per item, the covering elements
  std::vector<double> weights;               // per item, >= 0
  std::vector<double> modular;               // per element
};

// f(S) = <x, 1_S> + c(|S|), c concave with c(0) = 0.
struct ModularConcaveParams {
  std::vector<double> modular;
  std::vector<double> concave;  // c(0..n), n+1 entries
};

// Full table indexed by subset mask (bit i of the mask = element i).
struct ExplicitParams {
  std::vector<double> values;  // 2^n entries, raw (offset not yet removed)
};

struct InstanceSpec {
  GroundSet ground{1};
  std::string kind;  // "cut" | "coverage" | "modular_plus_concave" | "explicit"
  std::variant<CutParams, CoverageParams, ModularConcaveParams, ExplicitParams> params;
  double offset = 0.0;  // raw f(empty), subtracted at ingestion
  // Optional generator annotations (e.g. the planted minimizer),
  // round-tripped through the file format untouched.
  std::vector<int> planted;
  std::uint64_t gen_seed = 0;
  bool has_meta = false;
};

namespace detail {

inline void validate_params(const InstanceSpec& spec) {
  const int n = spec.ground.n;
  if (spec.kind == "cut") {
    for (const auto& e : std::get<CutParams>(spec.params).edges) {
      if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n || e.a == e.b)
        throw std::invalid_argument("cut: bad edge endpoints");
      if (e.w < 0) throw std::invalid_argument("cut: negative edge weight");
    }
  } else if (spec.kind == "coverage") {
    const auto& c = std::get<CoverageParams>(spec.params);
    if (int(c.cover_sets.size()) != c.universe || int(c.weights.size()) != c.universe)
      throw std::invalid_argument("coverage: universe size mismatch");
    if (int(c.modular.size()) != n) throw std::invalid_argument("coverage: modular size != n");
    for (double w : c.weights)
      if (w < 0) throw std::invalid_argument("coverage: negative item weight");
    for (const auto& cs : c.cover_sets)
      for (int p : cs)
        if (p < 0 || p >= n) throw std::invalid_argument("coverage: cover element out of range");
  } else if (spec.kind == "modular_plus_concave") {
    const auto& m = std::get<ModularConcaveParams>(spec.params);
    if (int(m.modular.size()) != n) throw std::invalid_argument("modular size != n");
    if (int(m.concave.size()) != n + 1) throw std::invalid_argument("concave table size != n+1");
    if (std::abs(m.concave[0]) > kValueTol)
      throw std::invalid_argument("concave table must start at c(0)=0");
    for (int i = 2; i <= n; ++i)
      if (m.concave[i] - m.concave[i - 1] > m.concave[i - 1] - m.concave[i - 2] + kValueTol)
        throw std::invalid_argument("cardinality table is not concave");
  } else if (spec.kind == "explicit") {
    const auto& e = std::get<ExplicitParams>(spec.params);
    if (n > 20) throw std::invalid_argument("explicit tables limited to n <= 20");
    if (e.values.size() != (std::size_t(1) << n))
      throw std::invalid_argument("explicit table must list 2^n values");
  } else {
    throw std::invalid_argument("unknown instance kind: " + spec.kind);
  }
}

}  // namespace detail

// ---- Evaluation kernels ----------------------------------------------------

class InstanceOracle : public EvalOracle {
 public:
  explicit InstanceOracle(InstanceSpec spec) : spec_(std::move(spec)) {
    detail::validate_params(spec_);
    const int n = spec_.ground.n;
    if (spec_.kind == "cut") {
      adjacency_.assign(n, {});
      const auto& edges = std::get<CutParams>(spec_.params).edges;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        adjacency_[edges[e].a].push_back(int(e));
        adjacency_[edges[e].b].push_back(int(e));
      }
    } else if (spec_.kind == "coverage") {
      const auto& c = std::get<CoverageParams>(spec_.params);
      covered_by_.assign(n, {});
      for (int u = 0; u < c.universe; ++u)
        for (int p : c.cover_sets[u]) covered_by_[p].push_back(u);
    }
  }

  const InstanceSpec& spec() const { return spec_; }

  int n() const override { return spec_.ground.n; }

  double value(const Subset& s) const override {
    const int n = spec_.ground.n;
    if (spec_.kind == "cut") {
      double total = 0;
      for (const auto& e : std::get<CutParams>(spec_.params).edges)
        if (s.contains(e.a) != s.contains(e.b)) total += e.w;
      return total;
    }
    if (spec_.kind == "coverage") {
      const auto& c = std::get<CoverageParams>(spec_.params);
      std::vector<std::uint64_t> covered((c.universe + 63) / 64, 0);
      double total = 0;
      s.for_each([&](int p) {
        total += c.modular[p];
        for (int u : covered_by_[p]) {
          std::uint64_t bit = std::uint64_t(1) << (u & 63);
          if (!(covered[u >> 6] & bit)) {
            covered[u >> 6] |= bit;
            total += c.weights[u];
          }
        }
      });
      return total;
    }
    if (spec_.kind == "modular_plus_concave") {
      const auto& m = std::get<ModularConcaveParams>(spec_.params);
      double total = m.concave[s.size()];
      s.for_each([&](int p) { total += m.modular[p]; });
      return total;
    }
    const auto& e = std::get<ExplicitParams>(spec_.params);
    (void)n;
    return e.values[s.mask()] - spec_.offset;
  }

  // Incremental chain evaluation: total work proportional to the data
  // touched, not (#groups x per-eval cost).
  void chain_values(const Subset& start, const std::vector<std::vector<int>>& groups,
                    std::vector<double>& out) const override {
    out.resize(groups.size());
    if (spec_.kind == "cut") {
      const auto& edges = std::get<CutParams>(spec_.params).edges;
      Subset cur = start;
      double val = value(start);
      for (std::size_t j = 0; j < groups.size(); ++j) {
        for (int p : groups[j]) {
          if (cur.contains(p)) continue;
          for (int e : adjacency_[p]) {
            int other = edges[e].a == p ? edges[e].b : edges[e].a;
            val += cur.contains(other) ? -edges[e].w : edges[e].w;
          }
          cur.add(p);
        }
        out[j] = val;
      }
      return;
    }
    if (spec_.kind == "coverage") {
      const auto& c = std::get<CoverageParams>(spec_.params);
      std::vector<char> covered(c.universe, 0);
      Subset cur = start;
      double val = 0;
      start.for_each([&](int p) {
        val += c.modular[p];
        for (int u : covered_by_[p]) {
          if (!covered[u]) {
            covered[u] = 1;
            val += c.weights[u];
          }
        }
      });
      for (std::size_t j = 0; j < groups.size(); ++j) {
        for (int p : groups[j]) {
          if (cur.contains(p)) continue;
          cur.add(p);
          val += c.modular[p];
          for (int u : covered_by_[p]) {
            if (!covered[u]) {
              covered[u] = 1;
              val += c.weights[u];
            }
          }
        }
        out[j] = val;
      }
      return;
    }
    if (spec_.kind == "modular_plus_concave") {
      const auto& m = std::get<ModularConcaveParams>(spec_.params);
      Subset cur = start;
      double modular = 0;
      start.for_each([&](int p) { modular += m.modular[p]; });
      int card = start.size();
      for (std::size_t j = 0; j < groups.size(); ++j) {
        for (int p : groups[j]) {
          if (cur.contains(p)) continue;
          cur.add(p);
          modular += m.modular[p];
          ++card;
        }
        out[j] = modular + m.concave[card];
      }
      return;
    }
    const auto& e = std::get<ExplicitParams>(spec_.params);
    std::uint64_t mask = start.mask();
    for (std::size_t j = 0; j < groups.size(); ++j) {
      for (int p : groups[j]) mask |= std::uint64_t(1) << p;
      out[j] = e.values[mask] - spec_.offset;
    }
  }

 private:
  InstanceSpec spec_;
  std::vector<std::vector<int>> adjacency_;   // cut: element -> incident edges
  std::vector<std::vector<int>> covered_by_;  // coverage: element -> items
};

// Ingest: normalize so evaluate(empty) = 0 exactly, storing the raw
// f(empty) as the offset.
inline InstanceSpec ingest(InstanceSpec spec) {
  detail::validate_params(spec);
  if (spec.kind == "explicit") {
    const auto& e = std::get<ExplicitParams>(spec.params);
    spec.offset = e.values[0];
  } else {
    spec.offset = 0.0;  // the other kinds vanish on the empty set by form
  }
  return spec;
}

// ---- Validation ------------------------------------------------------------

// Exhaustive diminishing-marginal-returns check; equivalent pairwise form
// f(S+i) + f(S+j) >= f(S+i+j) + f(S). Requires n <= 20.
inline bool validate_submodular(const EvalOracle& f, double tol = kValueTol) {
  const int n = f.n();
  if (n > 20) throw std::invalid_argument("validate_submodular limited to n <= 20");
  const std::uint64_t count = std::uint64_t(1) << n;
  std::vector<double> table(count);
  for (std::uint64_t m = 0; m < count; ++m) table[m] = f.value(Subset::from_mask(n, m));
  for (std::uint64_t m = 0; m < count; ++m) {
    for (int i = 0; i < n; ++i) {
      if (m & (std::uint64_t(1) << i)) continue;
      for (int j = i + 1; j < n; ++j) {
        if (m & (std::uint64_t(1) << j)) continue;
        const std::uint64_t mi = m | (std::uint64_t(1) << i);
        const std::uint64_t mj = m | (std::uint64_t(1) << j);
        if (table[mi] + table[mj] + tol < table[mi | mj] + table[m]) return false;
      }
    }
  }
  return true;
}

inline bool validate_submodular(const InstanceSpec& spec, double tol = kValueTol) {
  return validate_submodular(InstanceOracle(spec), tol);
}

// ---- Generators ------------------------------------------------------------

struct GenParams {
  int n = 8;
  int k = 2;              // planted: sparsity bound for the hidden minimizer
  double density = 0.35;  // cut: edge probability
  int universe = 0;       // coverage: item count (0 = pick from n)
};

namespace detail {

inline InstanceSpec random_cut(const GenParams& g, RngStream& rng) {
  InstanceSpec spec{GroundSet(g.n), "cut", CutParams{}, 0.0, {}, 0, false};
  auto& edges = std::get<CutParams>(spec.params).edges;
  for (int a = 0; a < g.n; ++a)
    for (int b = a + 1; b < g.n; ++b)
      if (rng.next_double() < g.density) edges.push_back({a, b, rng.next_range(0.1, 2.0)});
  if (edges.empty()) edges.push_back({0, g.n > 1 ? 1 : 0, 1.0});
  return ingest(std::move(spec));
}

inline InstanceSpec random_coverage(const GenParams& g, RngStream& rng) {
  const int universe = g.universe > 0 ? g.universe : std::max(2, g.n);
  CoverageParams c;
  c.universe = universe;
  c.cover_sets.resize(universe);
  c.weights.resize(universe);
  c.modular.resize(g.n);
  for (int u = 0; u < universe; ++u) {
    int deg = 1 + int(rng.next_below(3));
    for (int t = 0; t < deg; ++t) {
      int p = int(rng.next_below(std::uint64_t(g.n)));
      if (std::find(c.cover_sets[u].begin(), c.cover_sets[u].end(), p) == c.cover_sets[u].end())
        c.cover_sets[u].push_back(p);
    }
    std::sort(c.cover_sets[u].begin(), c.cover_sets[u].end());
    c.weights[u] = rng.next_range(0.1, 1.0);
  }
  for (int p = 0; p < g.n; ++p) c.modular[p] = rng.next_range(-1.0, 1.0);
  InstanceSpec spec{GroundSet(g.n), "coverage", std::move(c), 0.0, {}, 0, false};
  return ingest(std::move(spec));
}

inline InstanceSpec random_modular_concave(const GenParams& g, RngStream& rng) {
  ModularConcaveParams m;
  m.modular.resize(g.n);
  for (auto& x : m.modular) x = rng.next_range(-1.0, 1.0);
  m.concave.assign(g.n + 1, 0.0);
  double diff = rng.next_range(0.5, 1.5);
  for (int i = 1; i <= g.n; ++i) {
    m.concave[i] = m.concave[i - 1] + diff;
    diff -= rng.next_range(0.0, 0.4);  // nonincreasing differences
  }
  InstanceSpec spec{GroundSet(g.n), "modular_plus_concave", std::move(m), 0.0, {}, 0, false};
  return ingest(std::move(spec));
}

// Planted family: a hidden set S* of size <= k is made the unique
// minimizer by coupling its elements through shared coverage items whose
// weight exceeds the (negative) modular mass of each element alone.
// Every element keeps a nonnegative singleton value unless |S*| = 1, so
// the minimizer is invisible to marginals and must be found through
// dimensionality reduction and arc finding. Non-planted elements carry
// strictly positive modular values, which keeps them out of every
// minimizer regardless of the noise coverage on top.
inline InstanceSpec planted_coverage(const GenParams& g, RngStream& rng) {
  const int n = g.n;
  const int k = std::max(1, g.k);
  const int s = 1 + int(rng.next_below(std::uint64_t(k)));

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[int(rng.next_below(i + 1))]);
  std::vector<int> star(perm.begin(), perm.begin() + s);
  std::sort(star.begin(), star.end());

  // Relative scale of the planted coupling vs. the off-minimizer mass
  // decides whether contraction or arc finding carries the run.
  const double scale_in = std::exp(rng.next_range(-1.0, 1.0));
  const double scale_out = std::exp(rng.next_range(-1.0, 1.0));

  CoverageParams c;
  c.modular.assign(n, 0.0);

  auto add_item = [&](std::vector<int> set, double w) {
    std::sort(set.begin(), set.end());
    c.cover_sets.push_back(std::move(set));
    c.weights.push_back(w);
  };

  std::vector<double> alpha(n, 0.0), group_mass(n, 0.0);
  for (int p : star) {
    alpha[p] = rng.next_range(0.75, 1.25) * scale_in;
    add_item({p}, alpha[p]);
  }
  if (s >= 2) {
    const int groups = 2 * s;
    for (int t = 0; t < groups; ++t) {
      int size = 2 + int(rng.next_below(std::uint64_t(std::min(2, s - 1))));
      std::vector<int> set;
      while (int(set.size()) < size) {
        int p = star[rng.next_below(std::uint64_t(s))];
        if (std::find(set.begin(), set.end(), p) == set.end()) set.push_back(p);
      }
      double w = rng.next_range(0.5, 1.0) * scale_in;
      for (int p : set) group_mass[p] += w;
      add_item(std::move(set), w);
    }
    // Guarantee every planted element participates in a group.
    for (int idx = 0; idx + 1 < s; idx += 2) {
      double w = rng.next_range(0.5, 1.0) * scale_in;
      group_mass[star[idx]] += w;
      group_mass[star[idx + 1]] += w;
      add_item({star[idx], star[idx + 1]}, w);
    }
    if (s % 2 == 1 && s >= 2) {
      double w = rng.next_range(0.5, 1.0) * scale_in;
      group_mass[star[s - 1]] += w;
      group_mass[star[0]] += w;
      add_item({star[s - 1], star[0]}, w);
    }
  }

  for (int p : star) {
    if (s == 1) {
      c.modular[p] = -alpha[p] * rng.next_range(1.05, 1.4);
    } else {
      // u_f(p) = theta * group_mass(p) > 0; theta < 1/2 keeps S* strictly
      // below every proper subset.
      double theta = rng.next_range(0.05, 0.2);
      c.modular[p] = -(alpha[p] + group_mass[p]) + theta * group_mass[p];
    }
  }

  // Noise coverage among the non-planted elements only.
  std::vector<int> rest;
  for (int p = 0; p < n; ++p)
    if (!std::count(star.begin(), star.end(), p)) rest.push_back(p);
  for (int p : rest) c.modular[p] = rng.next_range(0.3, 1.0) * scale_out;
  if (!rest.empty()) {
    const int noise_items = std::min<int>(2 * int(rest.size()), 64);
    for (int t = 0; t < noise_items; ++t) {
      int size = 1 + int(rng.next_below(3));
      std::vector<int> set;
      while (int(set.size()) < size) {
        int p = rest[rng.next_below(rest.size())];
        if (std::find(set.begin(), set.end(), p) == set.end()) set.push_back(p);
      }
      add_item(std::move(set), rng.next_range(0.05, 0.3) * scale_out);
    }
  }

  c.universe = int(c.weights.size());
  InstanceSpec spec{GroundSet(n), "coverage", std::move(c), 0.0, star, rng.seed(), true};
  return ingest(std::move(spec));
}

}  // namespace detail

// kind: one of "cut", "coverage", "modular_plus_concave", "explicit",
// "planted". "planted" emits a coverage instance whose unique minimal
// minimizer is recorded in spec.planted (|S*| <= params.k).
inline InstanceSpec generate_instance(const std::string& kind, const GenParams& params,
                                      std::uint64_t seed) {
  if (params.n < 1) throw std::invalid_argument("generator: n must be >= 1");
  if (params.k < 1 || params.k > params.n)
    throw std::invalid_argument("generator: need 1 <= k <= n");
  RngStream rng(seed, "gen/" + kind);
  if (kind == "cut") return detail::random_cut(params, rng);
  if (kind == "coverage") return detail::random_coverage(params, rng);
  if (kind == "modular_plus_concave") return detail::random_modular_concave(params, rng);
  if (kind == "planted") return detail::planted_coverage(params, rng);
  if (kind == "explicit") {
    if (params.n > 14) throw std::invalid_argument("explicit generator limited to n <= 14");
    // Tabulate a random coverage instance; submodularity comes for free.
    InstanceSpec base = detail::random_coverage(params, rng);
    InstanceOracle oracle(base);
    ExplicitParams e;
    e.values.resize(std::size_t(1) << params.n);
    for (std::uint64_t m = 0; m < e.values.size(); ++m)
      e.values[m] = oracle.value(Subset::from_mask(params.n, m));
    InstanceSpec spec{GroundSet(params.n), "explicit", std::move(e), 0.0, {}, seed, false};
    return ingest(std::move(spec));
  }
  throw std::invalid_argument("unknown generator kind: " + kind);
}

}  // namespace ksfm
