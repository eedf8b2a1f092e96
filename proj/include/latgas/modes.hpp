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

#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace latgas {

/// Velocity-count coordinates of a Model I block: K_j counts the minority
/// direction of axis j; the majority direction then holds K_j + I_j.
using CountVector = std::vector<int>;
using BigInt = boost::multiprecision::cpp_int;

struct ModeContext {
  int Lbar = 1;        ///< number of sites in the block
  int I0 = 0;          ///< total mass
  std::vector<int> I;  ///< nonnegative momenta I_1..I_d
  int dim() const { return static_cast<int>(I.size()); }
};

/// ((Lbar - a)/(1 + a)) * ((Lbar - a - n)/(1 + a + n)) for 0 <= a <= Lbar - n.
double h(int n, int a, int Lbar);

/// Same value as an exact fraction; a == -1 gives +infinity.
struct HValue {
  std::int64_t num = 0, den = 1;
  bool infinite = false;
};
HValue h_exact(int n, int a, int Lbar);
/// -1, 0, +1 as x <, ==, > y.
int compare(const HValue& x, const HValue& y);

bool in_range(const ModeContext& ctx, const CountVector& K);
bool on_hyperplane(const ModeContext& ctx, const CountVector& K);
std::vector<CountVector> hyperplane(const ModeContext& ctx);

/// prod_j C(Lbar, K_j) C(Lbar, K_j + I_j).
BigInt weight(const ModeContext& ctx, const CountVector& K);
double log_weight(const ModeContext& ctx, const CountVector& K);

/// True when moving one unit from coordinate k to j does not increase the
/// weight, decided with h only. Moves leaving the valid range count as true.
bool ratio_test(const ModeContext& ctx, const CountVector& K, int j, int k);

/// max_j h_{I_j}(K_j) <= min_k h_{I_k}(K_k - 1).
bool is_mode(const ModeContext& ctx, const CountVector& K);

/// Path of the argmax/argmin improvement walk (lowest index on ties); the last
/// entry is the returned mode.
std::vector<CountVector> greedy_path(const ModeContext& ctx, const CountVector& start);
CountVector greedy_mode(const ModeContext& ctx, const CountVector& start);

struct ModeSet {
  std::vector<CountVector> maximizers;
  std::vector<CountVector> solutions;
  BigInt max_weight = 0;
};
ModeSet all_modes_bruteforce(const ModeContext& ctx);

/// Longest shortest path between two solutions, moving one unit between
/// coordinates and staying inside the solution set; -1 if disconnected.
int solution_diameter(const ModeContext& ctx, const std::vector<CountVector>& solutions);

/// Every (I0, I) with a nonempty hyperplane for the given block size and d.
std::vector<ModeContext> feasible_instances(int Lbar, int d);

} // namespace latgas
