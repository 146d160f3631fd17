#pragma once

// Shared instances and small statistics helpers for the test suites.

#include <cmath>
#include <vector>

#include "ksfm/instance.hpp"
#include "ksfm/oracle.hpp"

namespace ksfm::testing {

// F2: explicit table on n=2 with f({0})=1, f({1})=2, f({0,1})=2.
inline InstanceSpec make_f2() {
  InstanceSpec spec{GroundSet(2), "explicit", ExplicitParams{{0.0, 1.0, 2.0, 2.0}}, 0.0, {}, 0,
                    false};
  return ingest(std::move(spec));
}

inline InstanceSpec make_modular(const std::vector<double>& x) {
  ModularConcaveParams m;
  m.modular = x;
  m.concave.assign(x.size() + 1, 0.0);
  InstanceSpec spec{GroundSet(int(x.size())), "modular_plus_concave", std::move(m), 0.0, {}, 0,
                    false};
  return ingest(std::move(spec));
}

inline InstanceSpec make_zero(int n) { return make_modular(std::vector<double>(n, 0.0)); }

// Path cut 0-1 with weight w.
inline InstanceSpec make_path2(double w) {
  InstanceSpec spec{GroundSet(2), "cut", CutParams{{{0, 1, w}}}, 0.0, {}, 0, false};
  return ingest(std::move(spec));
}

struct RunningStats {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    double d = x - mean;
    mean += d / double(count);
    m2 += d * (x - mean);
  }
  double variance() const { return count > 1 ? m2 / double(count - 1) : 0.0; }
  double stderr_mean() const { return std::sqrt(variance() / double(count)); }
};

}  // namespace ksfm::testing
