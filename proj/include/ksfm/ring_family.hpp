#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksfm/lovasz.hpp"
#include "ksfm/oracle.hpp"
#include "ksfm/subset.hpp"

namespace ksfm {

// Ring-family extension maintainer.
//
// State: contracted elements W (in every minimizer), discarded elements D
// (in no k-sparse minimizer), and per-element down-closures p| = {q : any
// k-sparse minimizer containing p contains q} for the live elements
// V \ (W u D). The maintained surrogate
//
//   ext(S) = f(W u S#) - f(W) + sum_{p in S \ S#} max(0, u_raw(p)),
//   S#     = {p in S : p| subset of S},
//
// is submodular over the live elements, vanishes on the empty set, and
// agrees with f_W on sets consistent with the arcs. u_raw(p) =
// f(W u p|) - f(W u p| \ {p}) and the published marginal u_ext(p) is
// u_raw(p) when p| = {p} or u_raw(p) >= 0, else 0. Every public
// mutation ends by contracting negative-marginal elements until
// u_ext >= 0 on all live elements.
//
// The down-closures are kept transitively closed by a k-bounded BFS: an
// element whose closure exceeds k elements, or reaches a discarded
// element, is itself discarded, so total closure work stays O(nk).
class ExtensionMaintainer {
 public:
  ExtensionMaintainer(const EvalOracle& base, int k, QueryLedger& ledger)
      : base_(&base),
        ledger_(&ledger),
        k_(k),
        n_(base.n()),
        w_(n_),
        d_(n_),
        down_(n_),
        up_(n_),
        u_raw_(n_, 0.0),
        u_ext_(n_, 0.0) {
    if (k < 1) throw std::invalid_argument("extension maintainer: k must be >= 1");
    for (int p = 0; p < n_; ++p) {
      down_[p] = Subset(n_);
      down_[p].add(p);
      up_[p] = Subset(n_);
      up_[p].add(p);
    }
    f_w_ = 0.0;  // f is normalized
    marginals_dirty_ = true;
    update_space(Subset(n_), Subset(n_));
  }

  int k() const { return k_; }
  int base_n() const { return n_; }
  const Subset& contracted() const { return w_; }
  const Subset& discarded() const { return d_; }
  Subset live() const { return (w_ | d_).complement(); }
  int live_count() const { return n_ - w_.size() - d_.size(); }
  const Subset& down_closure(int p) const { return down_[p]; }
  double u_raw(int p) const { return u_raw_[p]; }
  double u_ext(int p) const { return u_ext_[p]; }
  std::uint64_t epoch() const { return epoch_; }
  std::uint64_t ignored_arc_updates() const { return ignored_arc_updates_; }

  double u_ext_inf_norm() const {
    double m = 0;
    live().for_each([&](int p) { m = std::max(m, u_ext_[p]); });
    return m;
  }
  std::vector<double> u_ext_live() const {
    std::vector<double> out;
    live().for_each([&](int p) { out.push_back(u_ext_[p]); });
    return out;
  }

  // W and D grow by w_add / d_add (parent coordinates, must be live),
  // closures are absorbed, then negative-marginal elements contract
  // until u_ext >= 0 everywhere.
  void update_space(const Subset& w_add, const Subset& d_add) {
    if (w_add.intersects(d_))
      throw std::logic_error("update_space: contracting a discarded element");
    if (d_add.intersects(w_))
      throw std::logic_error("update_space: discarding a contracted element");
    ++epoch_;

    // Upward discard: anything with an arc into d_add dies with it.
    if (!d_add.empty()) {
      Subset dead = d_add;
      d_add.for_each([&](int q) { dead |= up_[q]; });
      dead -= w_;
      d_ |= dead;
    }

    bool w_changed = false;
    if (!w_add.empty()) {
      Subset grown = w_;
      w_add.for_each([&](int p) {
        if (d_.contains(p)) throw std::logic_error("update_space: closure hits discarded");
        grown |= down_[p];
      });
      if (grown.intersects(d_)) throw std::logic_error("update_space: closure hits discarded");
      w_changed = grown != w_;
      w_ = grown;
    }

    if (w_changed || marginals_dirty_) {
      refresh_after_w_change();
      marginals_dirty_ = false;
    }

    // Contract negative-marginal elements; by the marginal rule these
    // have singleton closures, so each pass adds them directly to W.
    for (;;) {
      Subset negatives(n_);
      live().for_each([&](int p) {
        if (u_ext_[p] < 0) negatives |= down_[p];
      });
      if (negatives.empty()) break;
      w_ |= negatives;
      refresh_after_w_change();
    }
  }

  // Adds arc endpoints new_arcs[p] (parent coordinates) for each live p,
  // restores bounded transitive closure, discards elements whose closure
  // exceeds k or touches D, refreshes affected marginals, and finishes
  // with update_space.
  void update_arcs(const std::vector<std::pair<int, Subset>>& new_arcs) {
    ++epoch_;
    Subset touched(n_);
    const Subset live_set = live();
    for (const auto& [p, endpoints] : new_arcs) {
      if (!live_set.contains(p)) {
        ++ignored_arc_updates_;
        continue;
      }
      Subset added = endpoints - down_[p] - w_;  // arcs into W are vacuous
      added.remove(p);
      if (added.empty()) continue;
      down_[p] |= added;
      added.for_each([&](int q) { up_[q].add(p); });
      touched.add(p);
    }
    if (touched.empty()) {
      update_space(Subset(n_), Subset(n_));
      return;
    }

    // k rounds of BFS-style propagation; an element is frozen for
    // discard as soon as its closure exceeds k or reaches D.
    Subset to_discard(n_);
    Subset changed = touched;  // closures that grew last round
    for (int round = 0; round < k_ && !changed.empty(); ++round) {
      Subset next(n_);
      live_set.for_each([&](int p) {
        if (to_discard.contains(p)) return;
        if (!changed.contains(p) && !down_[p].intersects(changed)) return;
        Subset closure = down_[p];
        down_[p].for_each([&](int q) {
          if (live_set.contains(q) && !to_discard.contains(q)) closure |= down_[q];
        });
        closure -= w_;
        if (closure.intersects(d_) || closure.size() > k_) {
          to_discard.add(p);
          return;
        }
        if (closure != down_[p]) {
          (closure - down_[p]).for_each([&](int q) { up_[q].add(p); });
          down_[p] = closure;
          next.add(p);
          touched.add(p);
        }
      });
      changed = next;
    }
    // Discard propagates upward to fixpoint: an arc into a dying element
    // kills its source too.
    for (bool grewp = true; grewp;) {
      grewp = false;
      live_set.for_each([&](int p) {
        if (to_discard.contains(p)) return;
        if (down_[p].intersects(d_) || down_[p].intersects(to_discard) ||
            down_[p].size() > k_) {
          to_discard.add(p);
          grewp = true;
        }
      });
    }

    // Refresh marginals only where arcs arrived.
    std::uint64_t cost = 0;
    touched.for_each([&](int p) {
      if (to_discard.contains(p)) return;
      cost += recompute_marginal(p);
    });
    if (cost) ledger_->add(cost, 1);

    update_space(Subset(n_), to_discard);
  }

  // S# for S over live elements (parent coordinates): the union of W and
  // the maximal arc-consistent subset of S u W is W u S#.
  Subset closure_restrict(const Subset& s) const {
    Subset out(n_);
    s.for_each([&](int p) {
      if (down_[p].subset_of(s)) out.add(p);
    });
    return out;
  }

  // Extension value; exactly one base query (f(W) is cached).
  double ext_value(const Subset& s) const {
    Subset sharp = closure_restrict(s);
    double u_plus = 0;
    (s - sharp).for_each([&](int p) { u_plus += std::max(0.0, u_raw_[p]); });
    return base_->value(w_ | sharp) - f_w_ + u_plus;
  }

  double cached_f_w() const { return f_w_; }

 private:
  friend class ExtensionOracle;

  // Recomputes f(W) and every live marginal; one batch.
  void refresh_after_w_change() {
    std::uint64_t cost = 1;
    f_w_ = base_->value(w_);
    const Subset live_set = live();
    live_set.for_each([&](int p) {
      down_[p] -= w_;  // arcs into W became vacuous; p itself stays live
      cost += recompute_marginal(p);
    });
    ledger_->add(cost, 1);
  }

  // Returns the number of base evaluations used (1 or 2).
  std::uint64_t recompute_marginal(int p) {
    std::uint64_t cost;
    if (down_[p].size() == 1) {
      Subset with = w_;
      with.add(p);
      u_raw_[p] = base_->value(with) - f_w_;
      cost = 1;
    } else {
      Subset with = w_ | down_[p];
      Subset without = with;
      without.remove(p);
      u_raw_[p] = base_->value(with) - base_->value(without);
      cost = 2;
    }
    const bool singleton = down_[p].size() == 1;
    u_ext_[p] = (singleton || u_raw_[p] >= 0) ? u_raw_[p] : 0.0;
    return cost;
  }

  const EvalOracle* base_;
  QueryLedger* ledger_;
  int k_;
  int n_;
  Subset w_, d_;
  std::vector<Subset> down_, up_;
  std::vector<double> u_raw_, u_ext_;
  double f_w_ = 0.0;
  bool marginals_dirty_ = true;
  std::uint64_t epoch_ = 0;
  std::uint64_t ignored_arc_updates_ = 0;
};

// Dense oracle view over the maintainer's current live elements. Any
// maintainer mutation invalidates the view (checked via the epoch).
class ExtensionOracle : public EvalOracle {
 public:
  explicit ExtensionOracle(const ExtensionMaintainer& ext)
      : ext_(&ext), epoch_(ext.epoch()), live_(ext.live().members()) {
    child_of_.assign(ext.base_n(), -1);
    for (std::size_t i = 0; i < live_.size(); ++i) child_of_[live_[i]] = int(i);
  }

  int n() const override { return int(live_.size()); }

  const std::vector<int>& parent_indices() const { return live_; }
  int parent_index(int i) const { return live_[i]; }
  int child_index(int parent) const { return child_of_[parent]; }

  Subset lift(const Subset& s) const {
    Subset out(ext_->base_n());
    s.for_each([&](int i) { out.add(live_[i]); });
    return out;
  }
  Subset restrict(const Subset& parent_set) const {
    Subset out(n());
    parent_set.for_each([&](int p) {
      if (child_of_[p] >= 0) out.add(child_of_[p]);
    });
    return out;
  }

  std::vector<double> u_ext() const {
    check_fresh();
    std::vector<double> out(live_.size());
    for (std::size_t i = 0; i < live_.size(); ++i) out[i] = ext_->u_ext(live_[i]);
    return out;
  }

  double value(const Subset& s) const override {
    check_fresh();
    return ext_->ext_value(lift(s));
  }

  // Incremental extension values along a chain: maintains the closed
  // part S# via per-element "missing closure" counters, so the whole
  // chain costs one base evaluation per group plus O(nk) bookkeeping.
  void chain_values(const Subset& start, const std::vector<std::vector<int>>& groups,
                    std::vector<double>& out) const override {
    check_fresh();
    const int nb = ext_->base_n();
    std::vector<int> missing(nb, -1);
    for (int p : live_) missing[p] = ext_->down_closure(p).size();

    Subset prefix(nb);
    double u_plus = 0.0;
    std::vector<char> counted(nb, 0);  // contributes to the u+ term
    std::vector<std::vector<int>> sharp_groups;
    std::vector<double> u_plus_at;

    auto add_element = [&](int child_idx, std::vector<int>& sharp_group) {
      const int e = live_[child_idx];
      if (prefix.contains(e)) return;
      prefix.add(e);
      // e joins the open part until its closure completes.
      ext_->up_[e].for_each([&](int q) {
        if (missing[q] < 0 || !ext_->down_closure(q).contains(e)) return;
        if (--missing[q] == 0 && prefix.contains(q)) {
          sharp_group.push_back(q);
          if (counted[q]) {
            u_plus -= std::max(0.0, ext_->u_raw(q));
            counted[q] = 0;
          }
        }
      });
      if (missing[e] > 0) {
        u_plus += std::max(0.0, ext_->u_raw(e));
        counted[e] = 1;
      } else if (std::find(sharp_group.begin(), sharp_group.end(), e) == sharp_group.end()) {
        // closure was already complete when e arrived
        sharp_group.push_back(e);
      }
    };

    Subset lifted_start = lift(start);
    std::vector<int> start_group;
    start.for_each([&](int i) { add_element(i, start_group); });
    sharp_groups.push_back(std::move(start_group));
    u_plus_at.push_back(u_plus);
    for (const auto& group : groups) {
      std::vector<int> sharp_group;
      for (int i : group) add_element(i, sharp_group);
      sharp_groups.push_back(std::move(sharp_group));
      u_plus_at.push_back(u_plus);
    }

    std::vector<double> base_vals;
    Subset base_start = Subset(nb) | ext_->contracted();
    // First group carries the start set's closed part; its value is not
    // emitted but the base chain needs it.
    ext_->base_->chain_values(base_start, sharp_groups, base_vals);
    out.resize(groups.size());
    for (std::size_t j = 0; j < groups.size(); ++j)
      out[j] = base_vals[j + 1] - ext_->cached_f_w() + u_plus_at[j + 1];
  }

 private:
  void check_fresh() const {
    if (epoch_ != ext_->epoch())
      throw std::logic_error("extension view is stale: maintainer was mutated");
  }

  const ExtensionMaintainer* ext_;
  std::uint64_t epoch_;
  std::vector<int> live_;
  std::vector<int> child_of_;
};

// ext_subgrad / ext_partial over a view, in parent-facing form.
inline Subgradient ext_subgradient(const ExtensionOracle& view, const Permutation& pi,
                                   QueryLedger& ledger) {
  return subgradient(view, pi, ledger);
}
inline double ext_partial(const ExtensionOracle& view, const Permutation& pi, int element,
                          QueryLedger& ledger) {
  return partial_subgradient(view, pi, element, ledger);
}

}  // namespace ksfm
