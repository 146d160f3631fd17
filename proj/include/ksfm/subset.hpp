#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksfm {

// Ground set of n elements, identified with indices 0..n-1.
struct GroundSet {
  int n = 0;
  explicit GroundSet(int n_) : n(n_) {
    if (n < 1) throw std::invalid_argument("ground set must have n >= 1");
  }
};

// A subset of {0,...,n-1}, stored as a packed bitmask (one word when
// n <= 64). Equality is by content, never by how the set was built.
class Subset {
 public:
  Subset() = default;
  explicit Subset(int universe)
      : universe_(universe), words_((universe + 63) / 64, 0) {
    assert(universe >= 0);
  }
  Subset(int universe, std::initializer_list<int> members) : Subset(universe) {
    for (int i : members) add(i);
  }

  static Subset from_mask(int universe, std::uint64_t mask) {
    assert(universe <= 64);
    Subset s(universe);
    s.words_[0] = mask;
    return s;
  }
  static Subset from_indices(int universe, const std::vector<int>& idx) {
    Subset s(universe);
    for (int i : idx) s.add(i);
    return s;
  }
  static Subset full(int universe) {
    Subset s(universe);
    for (auto& w : s.words_) w = ~std::uint64_t(0);
    s.trim();
    return s;
  }

  int universe() const { return universe_; }

  bool contains(int i) const {
    check(i);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void add(int i) {
    check(i);
    words_[i >> 6] |= std::uint64_t(1) << (i & 63);
  }
  void remove(int i) {
    check(i);
    words_[i >> 6] &= ~(std::uint64_t(1) << (i & 63));
  }

  int size() const {
    int c = 0;
    for (auto w : words_) c += __builtin_popcountll(w);
    return c;
  }
  bool empty() const {
    for (auto w : words_) if (w) return false;
    return true;
  }

  std::uint64_t mask() const {
    assert(universe_ <= 64);
    return words_.empty() ? 0 : words_[0];
  }

  // Members in ascending index order.
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        out.push_back(int(w * 64) + __builtin_ctzll(bits));
        bits &= bits - 1;
      }
    }
    return out;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        f(int(w * 64) + __builtin_ctzll(bits));
        bits &= bits - 1;
      }
    }
  }

  bool subset_of(const Subset& other) const {
    assert(universe_ == other.universe_);
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~other.words_[w]) return false;
    return true;
  }
  bool intersects(const Subset& other) const {
    assert(universe_ == other.universe_);
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & other.words_[w]) return true;
    return false;
  }

  Subset& operator|=(const Subset& o) {
    assert(universe_ == o.universe_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }
  Subset& operator&=(const Subset& o) {
    assert(universe_ == o.universe_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
    return *this;
  }
  Subset& operator-=(const Subset& o) {
    assert(universe_ == o.universe_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~o.words_[w];
    return *this;
  }
  friend Subset operator|(Subset a, const Subset& b) { return a |= b; }
  friend Subset operator&(Subset a, const Subset& b) { return a &= b; }
  friend Subset operator-(Subset a, const Subset& b) { return a -= b; }

  Subset complement() const { return full(universe_) - *this; }

  friend bool operator==(const Subset& a, const Subset& b) {
    return a.universe_ == b.universe_ && a.words_ == b.words_;
  }
  friend bool operator!=(const Subset& a, const Subset& b) { return !(a == b); }
  friend bool operator<(const Subset& a, const Subset& b) {
    if (a.universe_ != b.universe_) return a.universe_ < b.universe_;
    return a.words_ < b.words_;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for_each([&](int i) {
      if (!first) s += ",";
      s += std::to_string(i);
      first = false;
    });
    return s + "}";
  }

  std::size_t hash() const {
    std::size_t h = std::hash<int>()(universe_);
    for (auto w : words_) h ^= std::hash<std::uint64_t>()(w) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }

 private:
  void check(int i) const {
    if (i < 0 || i >= universe_)
      throw std::out_of_range("subset index " + std::to_string(i) +
                              " out of range for universe " + std::to_string(universe_));
  }
  void trim() {
    int extra = int(words_.size()) * 64 - universe_;
    if (extra > 0 && !words_.empty()) words_.back() &= ~std::uint64_t(0) >> extra;
  }

  int universe_ = 0;
  std::vector<std::uint64_t> words_;
};

struct SubsetHash {
  std::size_t operator()(const Subset& s) const { return s.hash(); }
};

}  // namespace ksfm
