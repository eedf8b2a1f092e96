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

// Small helpers shared by the unit tests: hand-rolled generators for
// property checks and a scratch directory.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "latgas/rng.hpp"

namespace testing {

/// Runs `prop(rng, case_index)` for `cases` independently seeded cases.
template <class Prop>
void for_all(int cases, std::uint64_t seed, Prop&& prop) {
  for (int i = 0; i < cases; ++i) {
    latgas::Rng rng(seed, "property", static_cast<std::uint64_t>(i));
    prop(rng, i);
  }
}

inline double uniform_in(latgas::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline int int_in(latgas::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

inline std::vector<double> uniform_vector(latgas::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform_in(rng, lo, hi);
  return v;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* base = std::getenv("LATGAS_TEST_TMP");
  std::filesystem::path p = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path() / "latgas-tests";
  p /= name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

} // namespace testing
