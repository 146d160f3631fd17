#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ksfm/rng.hpp"
#include "ksfm/simplex.hpp"
#include "support/numeric_prox.hpp"

using namespace ksfm;
using ksfm::testing::numeric_prox;

namespace {

std::vector<double> random_interior_point(int n, int k, RngStream& rng) {
  std::vector<double> x(n);
  double total = 0;
  for (auto& v : x) {
    v = rng.next_range(0.02, 1.0);
    total += v;
  }
  if (total > 0.95 * k) {
    double scale = 0.95 * k / total;
    for (auto& v : x) v *= scale;
  }
  return x;
}

}  // namespace

TEST_CASE("entropy and bregman closed forms") {
  CHECK(entropy({0.0, 0.0}) == 0.0);  // 0 log 0 = 0
  const int n = 6, k = 2;
  std::vector<double> uniform(n, double(k) / n);
  CHECK(entropy(uniform) == Catch::Approx(k * std::log(double(k) / n)));

  CHECK(bregman({0.3, 0.7}, {0.3, 0.7}) == 0.0);
  CHECK(bregman({0.5, 0.5}, {1.0, 0.0}) == Catch::Approx(std::log(2.0)));
  CHECK_THROWS_AS(bregman({0.0, 1.0}, {0.5, 0.5}), std::domain_error);

  RngStream rng(3, "bregman");
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x = random_interior_point(5, 3, rng);
    std::vector<double> y = random_interior_point(5, 3, rng);
    REQUIRE(bregman(x, y) >= -1e-12);
  }
}

TEST_CASE("proximal step: zero h returns the center") {
  std::vector<double> x0{0.2, 0.35, 0.1};
  auto z = proximal_step(x0, {0, 0, 0}, 2);
  for (int i = 0; i < 3; ++i) CHECK(z.x[i] == Catch::Approx(x0[i]).margin(1e-14));
}

TEST_CASE("proximal step: worked n=2 example") {
  // y = (0.5, 1/6); total 2/3 <= k = 1, so no scaling and no saturation.
  auto z = proximal_step({0.5, 0.5}, {0.0, std::log(3.0)}, 1);
  CHECK(z.x[0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(z.x[1] == Catch::Approx(1.0 / 6.0).margin(1e-12));

  auto numeric = numeric_prox({0.5, 0.5}, {0.0, std::log(3.0)}, 1);
  CHECK(z.x[0] == Catch::Approx(numeric[0]).margin(1e-6));
  CHECK(z.x[1] == Catch::Approx(numeric[1]).margin(1e-6));
}

TEST_CASE("proximal step saturates the big coordinates") {
  // Strong pull on coordinate 0 drives it to the box boundary.
  auto z = proximal_step({0.4, 0.4, 0.4}, {-30.0, 0.0, 0.0}, 2);
  CHECK(z.x[0] == Catch::Approx(1.0));
  CHECK(z.x[1] < 1.0);
  double total = z.x[0] + z.x[1] + z.x[2];
  CHECK(total <= 2.0 + 1e-9);
}

TEST_CASE("proximal step ordering is lexicographic in (log x0 - h, -index)") {
  RngStream rng(11, "prox-order");
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng.next_below(7));
    const int k = 1 + int(rng.next_below(n));
    std::vector<double> x0 = random_interior_point(n, k, rng);
    std::vector<double> h(n);
    for (auto& v : h) v = rng.next_range(-4.0, 4.0);
    if (rng.next_double() < 0.3) h[rng.next_below(n)] = rng.next_range(-40.0, 40.0);
    auto z = proximal_step(x0, h, k);
    z.check();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double key_i = std::log(x0[i]) - h[i];
        double key_j = std::log(x0[j]) - h[j];
        if (key_i > key_j + 1e-12 || (key_i >= key_j - 1e-12 && i < j)) {
          REQUIRE(z.x[i] >= z.x[j] - 1e-12);
        }
      }
  }
}

TEST_CASE("proximal step matches the projected-gradient oracle") {
  RngStream rng(17, "prox-oracle");
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + int(rng.next_below(9));
    const int k = 1 + int(rng.next_below(n));
    std::vector<double> x0 = random_interior_point(n, k, rng);
    std::vector<double> h(n);
    for (auto& v : h) v = rng.next_range(-4.0, 4.0);
    auto z = proximal_step(x0, h, k);
    auto numeric = numeric_prox(x0, h, k);
    CAPTURE(trial, n, k);
    for (int i = 0; i < n; ++i) REQUIRE(z.x[i] == Catch::Approx(numeric[i]).margin(1e-6));
  }
}

TEST_CASE("proximal step KKT residual stays tiny") {
  RngStream rng(23, "prox-kkt");
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng.next_below(11));
    const int k = 1 + int(rng.next_below(n));
    std::vector<double> x0 = random_interior_point(n, k, rng);
    std::vector<double> h(n);
    for (auto& v : h) v = rng.next_range(-8.0, 8.0);
    std::vector<double> log_y(n);
    for (int i = 0; i < n; ++i) log_y[i] = std::log(x0[i]) - h[i];
    auto z = detail::prox_from_log(log_y, k);
    REQUIRE(detail::prox_kkt_residual(log_y, k, z) <= 1e-8);
  }
}

TEST_CASE("ftrl update closed forms") {
  SECTION("zero h gives the entropy minimizer min(1/e, k/n)") {
    for (int n : {4, 8}) {
      for (int k = 1; k <= n; ++k) {
        auto z = ftrl_update(std::vector<double>(n, 0.0), k);
        double expect = std::min(1.0 / std::exp(1.0), double(k) / n);
        for (double v : z.x) REQUIRE(v == Catch::Approx(expect).margin(1e-12));
        // numeric cross-check through the prox route
        std::vector<double> x0(n, double(k) / n);
        std::vector<double> grad_r(n, 1.0 + std::log(double(k) / n));
        auto numeric = numeric_prox(x0, grad_r, k);
        for (int i = 0; i < n; ++i) REQUIRE(z.x[i] == Catch::Approx(numeric[i]).margin(1e-6));
      }
    }
  }
  SECTION("a very negative coordinate saturates") {
    std::vector<double> h(5, 0.0);
    h[0] = -100.0;
    auto z = ftrl_update(h, 2);
    CHECK(z.x[0] == Catch::Approx(1.0).margin(1e-6));
  }
  SECTION("permutation equivariance") {
    std::vector<double> h{1.0, -2.0, 0.3, 0.0};
    auto z = ftrl_update(h, 2);
    std::vector<double> h_rot{0.0, 1.0, -2.0, 0.3};
    auto z_rot = ftrl_update(h_rot, 2);
    for (int i = 0; i < 4; ++i)
      CHECK(z.x[i] == Catch::Approx(z_rot.x[(i + 1) % 4]).margin(1e-12));
  }
}

TEST_CASE("implied permutation") {
  CHECK(implied_permutation({0, 0, 0}).order == std::vector<int>{0, 1, 2});
  CHECK(implied_permutation({2, -1, 0}).order == std::vector<int>{1, 2, 0});

  SECTION("equals the sorted ftrl iterate when no coordinate saturates") {
    RngStream rng(31, "implied");
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 3 + int(rng.next_below(8));
      std::vector<double> h(n);
      for (auto& v : h) v = rng.next_range(0.5, 10.0);  // keeps every y < 1
      Permutation implied = implied_permutation(h);
      for (int k = 1; k <= n; ++k) {
        auto z = ftrl_update(h, k);
        REQUIRE(permutation_of(z.x).order == implied.order);
      }
    }
  }
  SECTION("is a valid nonincreasing order of the iterate even with saturation ties") {
    RngStream rng(37, "implied-ties");
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 3 + int(rng.next_below(6));
      const int k = 1 + int(rng.next_below(n));
      std::vector<double> h(n);
      for (auto& v : h) v = rng.next_range(-8.0, 8.0);
      Permutation implied = implied_permutation(h);
      auto z = ftrl_update(h, k);
      for (int i = 0; i + 1 < n; ++i)
        REQUIRE(z.x[implied.order[i]] >= z.x[implied.order[i + 1]] - 1e-12);
    }
  }
}

TEST_CASE("mirror descent basics") {
  const int n = 3, cap = 2;
  std::vector<double> x0(n, 0.5);

  SECTION("zero gradients freeze the iterate") {
    auto trace = mirror_descent(
        [&](const std::vector<double>&, int) { return std::vector<double>(n, 0.0); }, cap, x0,
        0.5, 8);
    for (const auto& x : trace.points)
      for (int i = 0; i < n; ++i) REQUIRE(x[i] == Catch::Approx(0.5).margin(1e-12));
  }

  SECTION("constant gradient drains the penalized coordinate") {
    std::vector<double> h{2.0, 0.0, -1.0};
    auto trace = mirror_descent([&](const std::vector<double>&, int) { return h; }, cap, x0,
                                0.3, 30);
    const auto& last = trace.points.back();
    CHECK(last[0] < 0.02);
    CHECK(last[2] > 0.9);
    for (std::size_t t = 1; t < trace.points.size(); ++t)
      REQUIRE(trace.points[t][0] <= trace.points[t - 1][0] + 1e-12);
  }
}

TEST_CASE("mirror descent satisfies the regret bound") {
  RngStream rng(41, "regret");
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + int(rng.next_below(5));
    const int cap = 1 + int(rng.next_below(n));
    const int m = 40;
    std::vector<std::vector<double>> hs(m, std::vector<double>(n));
    double L = 0;
    for (auto& h : hs)
      for (auto& v : h) {
        v = rng.next_range(-1.0, 1.0);
        L = std::max(L, std::abs(v));
      }
    std::vector<double> x0(n, std::min(0.9, double(cap) / n));
    const double eta = rng.next_range(0.05, 0.5);
    auto trace =
        mirror_descent([&](const std::vector<double>&, int t) { return hs[t]; }, cap, x0, eta, m);

    const double rho = strong_convexity_modulus(cap);
    for (int wtrial = 0; wtrial < 5; ++wtrial) {
      std::vector<double> w = random_interior_point(n, cap, rng);
      double regret = 0;
      for (int t = 0; t < m; ++t)
        for (int i = 0; i < n; ++i) regret += hs[t][i] * (trace.points[t][i] - w[i]);
      double bound = eta * L * L * m / (2 * rho) + bregman(x0, w) / eta;
      REQUIRE(regret <= bound + 1e-9);
    }
  }
}

TEST_CASE("stochastic ftrl") {
  const int n = 4, k = 2;
  RngStream rng(43, "sftrl");

  SECTION("zero sampler keeps the trace at the entropy minimizer") {
    auto trace = stochastic_ftrl(
        n, [&](const std::vector<double>&, int, RngStream&) { return std::vector<double>(n, 0.0); },
        k, 0.1, 5, rng);
    double expect = std::min(1.0 / std::exp(1.0), double(k) / n);
    for (const auto& x : trace.points)
      for (double v : x) REQUIRE(v == Catch::Approx(expect).margin(1e-12));
  }

  SECTION("deterministic sampler reduces to plain ftrl") {
    std::vector<std::vector<double>> hs = {{1, 0, 0, -1}, {0, 1, -1, 0}, {0.5, 0.5, 0, 0}};
    const double eta = 0.2;
    auto trace = stochastic_ftrl(
        n, [&](const std::vector<double>&, int t, RngStream&) { return hs[t]; }, k, eta,
        int(hs.size()), rng);
    std::vector<double> cumulative(n, 0.0);
    for (std::size_t t = 0; t < hs.size(); ++t) {
      for (int i = 0; i < n; ++i) cumulative[i] += eta * hs[t][i];
      auto expect = ftrl_update(cumulative, k);
      for (int i = 0; i < n; ++i)
        REQUIRE(trace.points[t + 1][i] == Catch::Approx(expect.x[i]).margin(1e-12));
    }
  }

  SECTION("step-size guard reports the offending iteration") {
    auto sampler = [&](const std::vector<double>&, int t, RngStream&) {
      return std::vector<double>(n, t == 2 ? 100.0 : 0.0);
    };
    CHECK_THROWS_WITH(stochastic_ftrl(n, sampler, k, 0.1, 5, rng),
                      Catch::Matchers::ContainsSubstring("t=2"));
  }
}

TEST_CASE("multiplicative weights") {
  SECTION("zero updates keep the uniform distribution") {
    auto trace = multiplicative_weights({{0, 0, 0}, {0, 0, 0}}, 3);
    for (const auto& p : trace.p)
      for (double v : p) REQUIRE(v == Catch::Approx(1.0 / 3));
  }
  SECTION("single half step") {
    auto trace = multiplicative_weights({{0.5, 0.0}}, 2);
    double z = std::exp(0.5) + 1.0;
    CHECK(trace.p[1][0] == Catch::Approx(std::exp(0.5) / z));
    CHECK(trace.p[1][1] == Catch::Approx(1.0 / z));
  }
  SECTION("norm guard") {
    CHECK_THROWS_AS(multiplicative_weights({{0.7, 0.0}}, 2), std::runtime_error);
  }
  SECTION("couples with stochastic ftrl orderings under a shared h stream") {
    const int n = 5, k = 2, m = 12;
    const double eta = 0.05;
    RngStream rng(47, "couple");
    std::vector<std::vector<double>> hs(m, std::vector<double>(n));
    for (auto& h : hs)
      for (auto& v : h) v = rng.next_range(-3.0, 3.0);

    RngStream unused(0, "x");
    auto trace = stochastic_ftrl(
        n, [&](const std::vector<double>&, int t, RngStream&) { return hs[t]; }, k, eta, m,
        unused);
    std::vector<std::vector<double>> mw_updates;
    for (const auto& h : hs) {
      std::vector<double> g(n);
      for (int i = 0; i < n; ++i) g[i] = -eta * h[i];
      mw_updates.push_back(g);
    }
    auto weights = multiplicative_weights(mw_updates, n);
    std::vector<double> cumulative(n, 0.0);
    for (int t = 0; t <= m; ++t) {
      REQUIRE(permutation_of(weights.p[t]).order == implied_permutation(cumulative).order);
      if (t < m)
        for (int i = 0; i < n; ++i) cumulative[i] += eta * hs[t][i];
    }
  }
}
