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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "latgas/exact.hpp"
#include "latgas/rng.hpp"
#include "latgas/thermo.hpp"
#include "latgas/velocity.hpp"

namespace latgas {

/// Discrete torus {0..N-1}^d, row-major with the first coordinate fastest.
class Torus {
public:
  Torus() = default;
  Torus(long side, int dim);

  long side() const noexcept { return N_; }
  int dim() const noexcept { return d_; }
  std::size_t sites() const noexcept { return sites_; }

  std::array<long, 3> coords(std::size_t x) const {
    std::array<long, 3> c{0, 0, 0};
    for (int k = 0; k < d_; ++k) {
      c[k] = static_cast<long>(x % N_);
      x /= N_;
    }
    return c;
  }
  std::size_t index(const std::array<long, 3>& c) const {
    std::size_t x = 0;
    for (int k = d_ - 1; k >= 0; --k) x = x * N_ + static_cast<std::size_t>(((c[k] % N_) + N_) % N_);
    return x;
  }
  std::size_t shift(std::size_t x, std::span<const int> z) const {
    std::size_t out = 0, stride = 1;
    for (int k = 0; k < d_; ++k) {
      long c = static_cast<long>(x % N_) + z[k];
      x /= N_;
      c %= N_;
      if (c < 0) c += N_;
      out += static_cast<std::size_t>(c) * stride;
      stride *= N_;
    }
    return out;
  }
  /// x / N in the unit torus.
  std::array<double, 3> position(std::size_t x) const;

private:
  long N_ = 1;
  int d_ = 1;
  std::size_t sites_ = 1;
};

/// Exact momentum carried by each species. A scalar system has one species
/// and no momentum.
class SpeciesTable {
public:
  static SpeciesTable scalar(int dim);
  static SpeciesTable of(const VelocitySet& vs);

  std::size_t size() const noexcept { return count_; }
  int dim() const noexcept { return dim_; }
  bool is_scalar() const noexcept { return scalar_; }
  double irrational() const noexcept { return w_; }
  ExactCoord momentum(std::size_t s, int k) const { return exact_[s * dim_ + k]; }
  double velocity(std::size_t s, int k) const { return exact_[s * dim_ + k].value(w_); }

  /// Conserved vector (mass, exact momentum) of a single-site occupation mask.
  ConservedVector site_value(std::uint32_t mask) const;
  ConservedVector zero() const { return ConservedVector(scalar_ ? 0 : static_cast<std::size_t>(dim_)); }
  std::size_t channels() const noexcept { return scalar_ ? 1 : static_cast<std::size_t>(dim_) + 1; }
  /// I_k of a site mask as a double; k = 0 is mass.
  double channel_value(std::uint32_t mask, std::size_t k) const;

private:
  std::size_t count_ = 1;
  int dim_ = 1;
  bool scalar_ = true;
  double w_ = 0.0;
  std::vector<ExactCoord> exact_;
};

/// Occupation state: one bit per (site, species), packed as a mask per site.
class LatticeConfig {
public:
  LatticeConfig() = default;
  LatticeConfig(Torus torus, SpeciesTable species);

  const Torus& torus() const noexcept { return torus_; }
  const SpeciesTable& species() const noexcept { return species_; }
  std::size_t sites() const noexcept { return torus_.sites(); }

  std::uint32_t mask(std::size_t x) const { return occ_[x]; }
  void set_mask(std::size_t x, std::uint32_t m) { occ_[x] = m; }
  bool get(std::size_t x, std::size_t s) const { return (occ_[x] >> s) & 1u; }
  void set(std::size_t x, std::size_t s, bool on) {
    if (on)
      occ_[x] |= (1u << s);
    else
      occ_[x] &= ~(1u << s);
  }
  const std::vector<std::uint32_t>& masks() const noexcept { return occ_; }
  std::vector<std::uint32_t>& masks() noexcept { return occ_; }

  bool operator==(const LatticeConfig& o) const { return occ_ == o.occ_ && torus_.side() == o.torus_.side(); }

private:
  Torus torus_;
  SpeciesTable species_;
  std::vector<std::uint32_t> occ_;
};

ConservedVector conserved_totals(const LatticeConfig& cfg);

/// Independent Bernoulli occupations with the given per-(site, species) density.
LatticeConfig sample_densities(const Torus& torus, const SpeciesTable& species,
                               const std::function<double(std::size_t, std::size_t)>& density, Rng& rng);

/// Product measure with site-dependent chemical potential.
LatticeConfig sample_product(const Torus& torus, const VelocitySet& vs,
                             const std::function<ChemicalPotential(std::size_t)>& lambda, Rng& rng);

/// Slowly varying profile: site targets (a0 + N^{-b} phi0(x/N), N^{-b} phi_k(x/N)).
/// For scalar systems the density is 1/2 + N^{-b} phi0(x/N) and phi is unused.
struct ProfileSpec {
  double b = 0.0;
  std::function<double(std::span<const double>)> phi0;
  std::vector<std::function<double(std::span<const double>)>> phi;
};

/// Per-(site, species) densities of the profile measure, flattened site-major.
std::vector<double> profile_densities(const ProfileSpec& spec, const Torus& torus, const SpeciesTable& species,
                                      const VelocitySet* vs);
LatticeConfig sample_profile(const ProfileSpec& spec, const Torus& torus, const SpeciesTable& species,
                             const VelocitySet* vs, Rng& rng);

/// Exact enumeration of the configurations of `sites` sites with a given
/// conserved vector. Feasibility of partial assignments is memoised, so the
/// depth-first search never enters a dead branch.
class SectorEnumerator {
public:
  SectorEnumerator(const SpeciesTable& species, std::size_t sites);

  bool feasible(const ConservedVector& target);
  /// Number of configurations in the sector (double to avoid overflow).
  double count(const ConservedVector& target);
  /// States flattened as sites() masks per state, in lexicographic order of
  /// the site masks. Throws InfeasibleSector. Stops (returning false) after
  /// `limit` states.
  bool enumerate(const ConservedVector& target, std::vector<std::uint32_t>& out,
                 std::size_t limit = static_cast<std::size_t>(-1));
  /// One configuration of the sector (the lexicographically first).
  std::vector<std::uint32_t> first(const ConservedVector& target);
  /// Every sector with its size.
  std::vector<std::pair<ConservedVector, double>> all_sectors();

  std::size_t sites() const noexcept { return sites_; }

private:
  struct Class {
    ConservedVector value;
    std::vector<std::uint32_t> masks;
  };
  double count_rec(std::size_t remaining, const ConservedVector& target);

  SpeciesTable species_;
  std::size_t sites_;
  std::vector<Class> classes_;
  std::vector<std::unordered_map<ConservedVector, double, ConservedVectorHash>> memo_;
};

struct CanonicalOptions {
  std::size_t enumeration_limit = 200000;
  /// Burn-in in sweeps of sites*species proposals, times sites*species.
  double burn_in_factor = 50.0;
};

/// Uniform sample from the sector on `sites` sites: exact by enumeration when
/// the sector is small, otherwise by sector-preserving Metropolis moves
/// (same-species exchanges between sites and on-site collisions).
std::vector<std::uint32_t> sample_canonical(const ConservedVector& sector, std::size_t sites,
                                            const SpeciesTable& species,
                                            const std::vector<CollisionQuadruple>& quadruples, Rng& rng,
                                            const CanonicalOptions& opt = {});

/// Average of the conserved quantities over the cube center + {-L..L}^d.
std::vector<double> block_average(const LatticeConfig& cfg, std::size_t center, int L);

/// Snapshot file: one JSON header line followed by the packed occupation bits.
void write_snapshot(const std::string& path, const LatticeConfig& cfg, const nlohmann::json& meta);
LatticeConfig read_snapshot(const std::string& path, const VelocitySet* vs, nlohmann::json* meta = nullptr);

} // namespace latgas
