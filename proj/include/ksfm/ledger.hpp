#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksfm {

// Evaluation-oracle cost accounting. `queries` counts single-set
// evaluations, `rounds` counts adaptive batches: a batch of b sets adds
// b to queries and 1 to rounds, so rounds <= queries always.
//
// Phase ledgers are children; increments propagate to the parent, so the
// root totals already include every phase. Concurrent jobs record into
// detached ledgers which are merged back with `merge_parallel` (queries
// add up, rounds take the max over the jobs).
class QueryLedger {
 public:
  QueryLedger() = default;
  explicit QueryLedger(QueryLedger* parent) : parent_(parent) {}
  QueryLedger(const QueryLedger&) = delete;
  QueryLedger& operator=(const QueryLedger&) = delete;

  void add(std::uint64_t queries, std::uint64_t rounds) {
    queries_.fetch_add(queries, std::memory_order_relaxed);
    rounds_.fetch_add(rounds, std::memory_order_relaxed);
    if (parent_) parent_->add(queries, rounds);
  }
  void add_batch(std::uint64_t batch_size) {
    if (batch_size == 0) return;
    add(batch_size, 1);
  }

  std::uint64_t queries() const { return queries_.load(std::memory_order_relaxed); }
  std::uint64_t rounds() const { return rounds_.load(std::memory_order_relaxed); }

  // Named sub-ledger; created on first use. The child reports into this
  // ledger, so parent totals stay consistent.
  QueryLedger& phase(const std::string& name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = phases_.find(name);
    if (it == phases_.end())
      it = phases_.emplace(name, std::unique_ptr<QueryLedger>(new QueryLedger(this))).first;
    return *it->second;
  }
  bool has_phase(const std::string& name) const {
    std::lock_guard<std::mutex> lock(mu_);
    return phases_.count(name) > 0;
  }
  std::vector<std::pair<std::string, std::pair<std::uint64_t, std::uint64_t>>> phase_totals() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::pair<std::string, std::pair<std::uint64_t, std::uint64_t>>> out;
    for (const auto& [name, led] : phases_)
      out.emplace_back(name, std::make_pair(led->queries(), led->rounds()));
    return out;
  }

  // Detached scratch ledger for a concurrent job (no parent).
  static std::unique_ptr<QueryLedger> detached() {
    return std::unique_ptr<QueryLedger>(new QueryLedger());
  }

  // Merge concurrently executed jobs: all queries count, depth is the
  // longest job.
  void merge_parallel(const std::vector<const QueryLedger*>& jobs) {
    std::uint64_t q = 0, r = 0;
    for (const auto* j : jobs) {
      q += j->queries();
      r = std::max(r, j->rounds());
    }
    add(q, r);
  }

 private:
  std::atomic<std::uint64_t> queries_{0};
  std::atomic<std::uint64_t> rounds_{0};
  QueryLedger* parent_ = nullptr;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<QueryLedger>> phases_;
};

}  // namespace ksfm
