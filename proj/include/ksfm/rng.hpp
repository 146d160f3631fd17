#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace ksfm {

// Counter-based random stream: the t-th draw of stream (seed, stream_id)
// is a pure function of (seed, stream_id, t). Streams can be split per
// phase/repetition/element so concurrent execution order never changes
// the numbers drawn.
class RngStream {
 public:
  RngStream(std::uint64_t seed, const std::string& stream_id)
      : seed_(seed), stream_(fnv1a(stream_id)) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_hash)
      : seed_(seed), stream_(stream_hash) {}

  // Derive an independent child stream.
  RngStream split(const std::string& label) const {
    return RngStream(seed_, mix(stream_ ^ fnv1a(label)));
  }
  RngStream split(std::uint64_t index) const {
    return RngStream(seed_, mix(stream_ + 0x632be59bd9b4e019ull * (index + 1)));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() {
    std::uint64_t x = seed_ + 0x9e3779b97f4a7c15ull * (counter_++ + 1);
    x ^= stream_;
    return mix(x);
  }

  // Uniform in [0, 1).
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound >= 1. Unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    assert(bound >= 1);
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  std::uint64_t next_seed() { return next_u64(); }

 private:
  static std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  }
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace ksfm
