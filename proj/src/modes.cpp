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

#include "latgas/modes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>

#include "latgas/error.hpp"

namespace latgas {

double h(int n, int a, int Lbar) {
  if (a < 0 || a > Lbar - n || n < 0)
    throw InvalidParameters("h: argument " + std::to_string(a) + " outside [0, " + std::to_string(Lbar - n) + "]");
  return (static_cast<double>(Lbar - a) / (1 + a)) * (static_cast<double>(Lbar - a - n) / (1 + a + n));
}

HValue h_exact(int n, int a, int Lbar) {
  if (a == -1) return {0, 1, true};
  if (a < 0 || a > Lbar - n || n < 0) throw InvalidParameters("h: argument out of range");
  return {static_cast<std::int64_t>(Lbar - a) * (Lbar - a - n), static_cast<std::int64_t>(1 + a) * (1 + a + n), false};
}

int compare(const HValue& x, const HValue& y) {
  if (x.infinite || y.infinite) return x.infinite == y.infinite ? 0 : (x.infinite ? 1 : -1);
  const std::int64_t l = x.num * y.den, r = y.num * x.den;
  return (l > r) - (l < r);
}

bool in_range(const ModeContext& ctx, const CountVector& K) {
  if (static_cast<int>(K.size()) != ctx.dim()) return false;
  for (int j = 0; j < ctx.dim(); ++j)
    if (K[j] < 0 || ctx.I[j] < 0 || K[j] + ctx.I[j] > ctx.Lbar) return false;
  return true;
}

bool on_hyperplane(const ModeContext& ctx, const CountVector& K) {
  if (!in_range(ctx, K)) return false;
  const int sk = std::accumulate(K.begin(), K.end(), 0);
  const int si = std::accumulate(ctx.I.begin(), ctx.I.end(), 0);
  return 2 * sk == ctx.I0 - si;
}

std::vector<CountVector> hyperplane(const ModeContext& ctx) {
  std::vector<CountVector> out;
  const int d = ctx.dim();
  const int si = std::accumulate(ctx.I.begin(), ctx.I.end(), 0);
  const int excess = ctx.I0 - si;
  if (excess < 0 || excess % 2 != 0) return out;
  const int target = excess / 2;
  CountVector K(d, 0);
  // Odometer over the box, last coordinate fastest.
  auto recurse = [&](auto&& self, int j, int left) -> void {
    if (j == d) {
      if (left == 0) out.push_back(K);
      return;
    }
    const int hi = std::min(left, ctx.Lbar - ctx.I[j]);
    for (int v = 0; v <= hi; ++v) {
      K[j] = v;
      self(self, j + 1, left - v);
    }
  };
  if (d == 0) return out;
  recurse(recurse, 0, target);
  return out;
}

namespace {

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

HValue up(const ModeContext& ctx, const CountVector& K, int j) {
  // Moving past K_j + I_j = Lbar has factor 0.
  if (K[j] + ctx.I[j] >= ctx.Lbar) return {0, 1, false};
  return h_exact(ctx.I[j], K[j], ctx.Lbar);
}
HValue down(const ModeContext& ctx, const CountVector& K, int k) { return h_exact(ctx.I[k], K[k] - 1, ctx.Lbar); }

} // namespace

BigInt weight(const ModeContext& ctx, const CountVector& K) {
  BigInt w = 1;
  for (int j = 0; j < ctx.dim(); ++j) w *= binomial(ctx.Lbar, K[j]) * binomial(ctx.Lbar, K[j] + ctx.I[j]);
  return w;
}

double log_weight(const ModeContext& ctx, const CountVector& K) {
  double s = 0.0;
  for (int j = 0; j < ctx.dim(); ++j) s += log_binomial(ctx.Lbar, K[j]) + log_binomial(ctx.Lbar, K[j] + ctx.I[j]);
  return s;
}

bool ratio_test(const ModeContext& ctx, const CountVector& K, int j, int k) {
  if (j == k) return true;
  if (K[k] == 0 || K[j] + ctx.I[j] >= ctx.Lbar) return true;
  return compare(up(ctx, K, j), down(ctx, K, k)) <= 0;
}

bool is_mode(const ModeContext& ctx, const CountVector& K) {
  for (int j = 0; j < ctx.dim(); ++j)
    for (int k = 0; k < ctx.dim(); ++k)
      if (compare(up(ctx, K, j), down(ctx, K, k)) > 0) return false;
  return true;
}

std::vector<CountVector> greedy_path(const ModeContext& ctx, const CountVector& start) {
  if (!on_hyperplane(ctx, start)) throw InvalidParameters("greedy start is not on the hyperplane");
  std::vector<CountVector> path{start};
  CountVector K = start;
  for (;;) {
    int j0 = 0, k0 = 0;
    for (int j = 1; j < ctx.dim(); ++j)
      if (compare(up(ctx, K, j), up(ctx, K, j0)) > 0) j0 = j;
    for (int k = 1; k < ctx.dim(); ++k)
      if (compare(down(ctx, K, k), down(ctx, K, k0)) < 0) k0 = k;
    if (compare(down(ctx, K, k0), up(ctx, K, j0)) >= 0) break;
    ++K[j0];
    --K[k0];
    path.push_back(K);
  }
  return path;
}

CountVector greedy_mode(const ModeContext& ctx, const CountVector& start) { return greedy_path(ctx, start).back(); }

ModeSet all_modes_bruteforce(const ModeContext& ctx) {
  ModeSet out;
  const auto pts = hyperplane(ctx);
  if (pts.empty()) throw InfeasibleSector("empty hyperplane");
  std::vector<BigInt> w;
  w.reserve(pts.size());
  for (const auto& K : pts) {
    w.push_back(weight(ctx, K));
    if (w.back() > out.max_weight) out.max_weight = w.back();
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (w[i] == out.max_weight) out.maximizers.push_back(pts[i]);
    if (is_mode(ctx, pts[i])) out.solutions.push_back(pts[i]);
  }
  return out;
}

int solution_diameter(const ModeContext& ctx, const std::vector<CountVector>& solutions) {
  (void)ctx;
  std::map<CountVector, std::size_t> id;
  for (std::size_t i = 0; i < solutions.size(); ++i) id.emplace(solutions[i], i);
  int diameter = 0;
  for (std::size_t s = 0; s < solutions.size(); ++s) {
    std::vector<int> dist(solutions.size(), -1);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      const auto& K = solutions[u];
      for (std::size_t j = 0; j < K.size(); ++j)
        for (std::size_t k = 0; k < K.size(); ++k) {
          if (j == k) continue;
          CountVector n = K;
          ++n[j];
          --n[k];
          auto it = id.find(n);
          if (it != id.end() && dist[it->second] < 0) {
            dist[it->second] = dist[u] + 1;
            q.push(it->second);
          }
        }
    }
    for (int d : dist) {
      if (d < 0) return -1;
      diameter = std::max(diameter, d);
    }
  }
  return diameter;
}

std::vector<ModeContext> feasible_instances(int Lbar, int d) {
  std::vector<ModeContext> out;
  std::vector<int> I(d, 0);
  for (;;) {
    const int si = std::accumulate(I.begin(), I.end(), 0);
    int room = 0;
    for (int v : I) room += Lbar - v;
    for (int extra = 0; extra <= room; ++extra) out.push_back({Lbar, si + 2 * extra, I});
    int j = 0;
    while (j < d && ++I[j] > Lbar) I[j++] = 0;
    if (j == d) break;
  }
  return out;
}

} // namespace latgas
