/*
 *   Copyright 2026 The latgas Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>


#include "latgas/error.hpp"
#include "latgas/modes.hpp"
#include "support.hpp"

using namespace latgas;

namespace {

// Independent weight: binomials built by Pascal's rule.
BigInt binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<BigInt> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<BigInt> next(i + 1, 1);
    for (int j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
    row.swap(next);
  }
  return row[k];
}

BigInt pascal_weight(const ModeContext& ctx, const CountVector& K) {
  BigInt w = 1;
  for (int j = 0; j < ctx.dim(); ++j) w *= binom(ctx.Lbar, K[j]) * binom(ctx.Lbar, K[j] + ctx.I[j]);
  return w;
}

// Every K with 0 <= K_j and K_j + I_j <= Lbar, hyperplane or not.
std::vector<CountVector> box(const ModeContext& ctx) {
  std::vector<CountVector> out;
  CountVector K(ctx.dim(), 0);
  for (;;) {
    out.push_back(K);
    int j = 0;
    while (j < ctx.dim() && ++K[j] + ctx.I[j] > ctx.Lbar) K[j++] = 0;
    if (j == ctx.dim()) break;
  }
  return out;
}

} // namespace

TEST_CASE("h values") {
  CHECK(h(0, 0, 3) == 9.0);
  CHECK(h(0, 1, 3) == 1.0);
  CHECK_THROWS_AS(h(2, 2, 3), InvalidParameters);
  CHECK_THROWS_AS(h(0, -1, 3), InvalidParameters);
  CHECK(h_exact(0, -1, 3).infinite);
  for (int L = 1; L <= 10; ++L)
    for (int n = 0; n <= L; ++n)
      for (int a = 0; a <= L - n; ++a) {
        const auto e = h_exact(n, a, L);
        CHECK(static_cast<double>(e.num) / e.den == doctest::Approx(h(n, a, L)));
        if (a + 1 <= L - n) CHECK(h(n, a + 1, L) < h(n, a, L));
        // Larger n shifts the second factor down.
        for (int m = n + 1; m <= L - a; ++m) CHECK(h(m, a, L) < h(n, a, L));
      }
}

TEST_CASE("exact comparison of h values") {
  CHECK(compare(h_exact(0, 0, 3), h_exact(0, 1, 3)) == 1);
  CHECK(compare(h_exact(0, -1, 3), h_exact(0, 0, 3)) == 1);
  CHECK(compare(h_exact(1, 1, 5), h_exact(1, 1, 5)) == 0);
}

TEST_CASE("weights and the hand example") {
  ModeContext ctx{3, 4, {0, 0}};
  const auto plane = hyperplane(ctx);
  REQUIRE(plane.size() == 3);
  CHECK(weight(ctx, {2, 0}) == 9);
  CHECK(weight(ctx, {1, 1}) == 81);
  CHECK(weight(ctx, {0, 2}) == 9);
  const auto path = greedy_path(ctx, {2, 0});
  CHECK(path.front() == CountVector{2, 0});
  CHECK(path.back() == CountVector{1, 1});
  CHECK(greedy_mode(ctx, {1, 1}) == CountVector{1, 1});
  CHECK(is_mode(ctx, {1, 1}));
  CHECK_FALSE(is_mode(ctx, {2, 0}));
}

TEST_CASE("ratio test agrees with binomial ratios") {
  for (int L = 1; L <= 6; ++L)
    for (int d = 1; d <= 3; ++d) {
      // Momenta drawn from the full range per axis, mass irrelevant here.
      std::vector<int> I(d, 0);
      for (;;) {
        ModeContext ctx{L, 0, I};
        for (const auto& K : box(ctx)) {
          const BigInt w = pascal_weight(ctx, K);
          CHECK(weight(ctx, K) == w);
          for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
              CountVector K2 = K;
              ++K2[j];
              --K2[k];
              const bool valid = in_range(ctx, K2);
              const bool expect = !valid || pascal_weight(ctx, K2) <= w;
              CHECK(ratio_test(ctx, K, j, k) == expect);
            }
        }
        int j = 0;
        while (j < d && ++I[j] > L) I[j++] = 0;
        if (j == d) break;
      }
    }
}

TEST_CASE("symmetric instances") {
  ModeContext ctx{5, 8, {1, 1}};
  CHECK(ratio_test(ctx, {2, 2}, 0, 1));
  CHECK(ratio_test(ctx, {2, 2}, 1, 0));
  CHECK(ratio_test(ctx, {2, 2}, 0, 0));
}

TEST_CASE("exhaustive agreement with brute force") {
  int instances = 0, max_diam = 0;
  for (int L = 1; L <= 5; ++L)
    for (int d = 1; d <= 3; ++d)
      for (const auto& ctx : feasible_instances(L, d)) {
        ++instances;
        const auto all = all_modes_bruteforce(ctx);
        const auto plane = hyperplane(ctx);
        REQUIRE_FALSE(plane.empty());
        REQUIRE_FALSE(all.solutions.empty());
        // Brute-force maximum recomputed with the independent weight.
        BigInt best = 0;
        for (const auto& K : plane) best = std::max(best, pascal_weight(ctx, K));
        CHECK(best == all.max_weight);
        for (const auto& s : all.solutions) {
          CHECK(pascal_weight(ctx, s) == best);
          for (const auto& t : all.solutions)
            for (int j = 0; j < d; ++j) CHECK(std::abs(s[j] - t[j]) <= 1);
        }
        CHECK(all.solutions.size() == all.maximizers.size());
        const int diam = solution_diameter(ctx, all.solutions);
        CHECK(diam >= 0);
        CHECK(2 * diam <= d);
        max_diam = std::max(max_diam, diam);
        // Ordered solution when the momenta are sorted.
        if (std::is_sorted(ctx.I.begin(), ctx.I.end()))
          CHECK(std::any_of(all.solutions.begin(), all.solutions.end(),
                            [](const CountVector& K) { return std::is_sorted(K.rbegin(), K.rend()); }));
        for (const auto& start : plane) {
          const auto path = greedy_path(ctx, start);
          for (std::size_t i = 1; i < path.size(); ++i) CHECK(weight(ctx, path[i]) > weight(ctx, path[i - 1]));
          const auto& m = path.back();
          CHECK(is_mode(ctx, m));
          CHECK(std::find(all.solutions.begin(), all.solutions.end(), m) != all.solutions.end());
        }
      }
  CHECK(instances > 1000);
  MESSAGE("instances " << instances << ", largest solution diameter " << max_diam);
}
