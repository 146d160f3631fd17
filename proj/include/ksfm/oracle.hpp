#pragma once

#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ksfm/ledger.hpp"
#include "ksfm/subset.hpp"

namespace ksfm {

// Evaluation-oracle access to a normalized submodular function
// (f(empty) = 0). Implementations guarantee that each value() costs a
// constant number of underlying base-function evaluations, so the
// ledger counts one query per evaluated set regardless of how many
// layers (contraction, ring-family extension) sit in between.
class EvalOracle {
 public:
  virtual ~EvalOracle() = default;

  virtual int n() const = 0;

  // f(S). Pure; no instrumentation.
  virtual double value(const Subset& s) const = 0;

  // out[j] = f(start ∪ groups[0] ∪ ... ∪ groups[j]). One oracle
  // evaluation per group; concrete instances override this with an
  // incremental kernel so a full subgradient costs O(total work), not
  // O(n * per-eval).
  virtual void chain_values(const Subset& start,
                            const std::vector<std::vector<int>>& groups,
                            std::vector<double>& out) const {
    Subset cur = start;
    out.resize(groups.size());
    for (std::size_t j = 0; j < groups.size(); ++j) {
      for (int e : groups[j]) cur.add(e);
      out[j] = value(cur);
    }
  }

  // out[i] = f(start ∪ {order[0..i]}).
  void prefix_values(const Subset& start, const std::vector<int>& order,
                     std::vector<double>& out) const {
    std::vector<std::vector<int>> groups(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) groups[i] = {order[i]};
    chain_values(start, groups, out);
  }
};

// ---- Instrumented access -------------------------------------------------

inline void check_subset(const EvalOracle& f, const Subset& s) {
  if (s.universe() != f.n())
    throw std::invalid_argument("malformed subset: universe " +
                                std::to_string(s.universe()) + " != n " +
                                std::to_string(f.n()));
}

// Single evaluation: one query, one round.
inline double evaluate(const EvalOracle& f, const Subset& s, QueryLedger& ledger) {
  check_subset(f, s);
  ledger.add(1, 1);
  return f.value(s);
}

// One batch: |sets| queries, one round. Empty batch leaves the ledger
// untouched.
inline std::vector<double> evaluate_batch(const EvalOracle& f,
                                          const std::vector<Subset>& sets,
                                          QueryLedger& ledger) {
  std::vector<double> out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    check_subset(f, s);
    out.push_back(f.value(s));
  }
  ledger.add_batch(sets.size());
  return out;
}

// Prefix batch f(start ∪ order[0..i]); |order| queries, one round.
inline std::vector<double> evaluate_prefixes(const EvalOracle& f, const Subset& start,
                                             const std::vector<int>& order,
                                             QueryLedger& ledger) {
  std::vector<double> out;
  f.prefix_values(start, order, out);
  ledger.add_batch(order.size());
  return out;
}

// u_f with (u_f)_p = f({p}); one batch of n singleton queries.
inline std::vector<double> marginal_vector(const EvalOracle& f, QueryLedger& ledger) {
  const int n = f.n();
  std::vector<double> u(n);
  for (int p = 0; p < n; ++p) {
    Subset s(n);
    s.add(p);
    u[p] = f.value(s);
  }
  ledger.add_batch(n);
  return u;
}

// ---- Contraction view ----------------------------------------------------

// f_P(S) = f(S ∪ P) - f(P) over the dense ground set V \ P. Each value()
// makes exactly one call to the parent (f(P) is cached at construction,
// which charges the one query it makes).
class ContractedOracle : public EvalOracle {
 public:
  ContractedOracle(const EvalOracle& base, Subset p, QueryLedger& ledger)
      : base_(&base), p_(std::move(p)) {
    check_subset(base, p_);
    live_ = p_.complement().members();
    f_p_ = evaluate(base, p_, ledger);
  }

  int n() const override { return int(live_.size()); }

  int parent_index(int i) const { return live_[i]; }
  const std::vector<int>& parent_indices() const { return live_; }
  const Subset& contracted_set() const { return p_; }
  double base_value_of_p() const { return f_p_; }

  Subset lift(const Subset& s) const {
    Subset out(base_->n());
    s.for_each([&](int i) { out.add(live_[i]); });
    return out;
  }
  Subset restrict(const Subset& parent_set) const {
    Subset out(n());
    for (std::size_t i = 0; i < live_.size(); ++i)
      if (parent_set.contains(live_[i])) out.add(int(i));
    return out;
  }

  double value(const Subset& s) const override {
    return base_->value(lift(s) | p_) - f_p_;
  }

  void chain_values(const Subset& start, const std::vector<std::vector<int>>& groups,
                    std::vector<double>& out) const override {
    std::vector<std::vector<int>> lifted(groups.size());
    for (std::size_t j = 0; j < groups.size(); ++j) {
      lifted[j].reserve(groups[j].size());
      for (int e : groups[j]) lifted[j].push_back(live_[e]);
    }
    base_->chain_values(lift(start) | p_, lifted, out);
    for (auto& v : out) v -= f_p_;
  }

 private:
  const EvalOracle* base_;
  Subset p_;
  std::vector<int> live_;
  double f_p_ = 0.0;
};

// ---- Opt-in memo wrapper ---------------------------------------------------

// Caches values by set, but still charges the ledger for every request:
// query-complexity measurements count oracle calls as if no cache were
// present. Off by default everywhere; callers opt in.
class MemoizedOracle : public EvalOracle {
 public:
  explicit MemoizedOracle(const EvalOracle& base) : base_(&base) {}

  int n() const override { return base_->n(); }

  double value(const Subset& s) const override {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    double v = base_->value(s);
    cache_.emplace(s, v);
    return v;
  }

  std::size_t cache_size() const { return cache_.size(); }

 private:
  const EvalOracle* base_;
  mutable std::unordered_map<Subset, double, SubsetHash> cache_;
};

}  // namespace ksfm
