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
#include <functional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "latgas/exact.hpp"
#include "latgas/lattice.hpp"
#include "latgas/velocity.hpp"

namespace latgas {

/// Law of the conserved vector of one site under a product Bernoulli measure.
struct SiteLaw {
  std::vector<std::pair<ConservedVector, double>> entries; // grouped by exact key
  double total() const;
};

SiteLaw site_law(const SpeciesTable& species, std::span<const double> theta);

using SumLaw = std::unordered_map<ConservedVector, double, ConservedVectorHash>;

/// Law of the sum over `sites` i.i.d. sites, by repeated exact-key convolution.
SumLaw sum_law(const SiteLaw& law, std::size_t sites);

/// Function of the masks of a block of sites.
using LocalFunction = std::function<double(std::span<const std::uint32_t>)>;

/// Per-species densities of the grand-canonical measure matched to the sector
/// average target / sites.
std::vector<double> matched_densities(const SpeciesTable& species, const VelocitySet* vs,
                                      const ConservedVector& target, std::size_t sites);

struct EnsembleComparison {
  double canonical = 0.0;
  double grand = 0.0;
  double variance = 0.0;   ///< variance of f under the product measure
  double normalizer = 0.0; ///< P(total = target)
  double difference() const { return grand - canonical; }
};

/// Expectations of f (on `block` sites) under the product measure with the
/// given densities and under the same measure conditioned on the total of
/// `total_sites` sites equalling `target`.
EnsembleComparison compare_ensembles(const LocalFunction& f, std::size_t block, std::size_t total_sites,
                                     const SpeciesTable& species, std::span<const double> theta,
                                     const ConservedVector& target);

/// Canonical expectation with densities matched to the sector.
double canonical_expectation(const LocalFunction& f, std::size_t block, std::size_t total_sites,
                             const SpeciesTable& species, const VelocitySet* vs, const ConservedVector& target);

struct ScalingRow {
  long L = 0;
  double canonical = 0.0;
  double grand = 0.0;
  double difference = 0.0;
  double bound_ref = 0.0; ///< sqrt(variance) / L^d
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double slope = 0.0; ///< least-squares slope of log|difference| against log L
};

/// Sweep over torus sides L (dimension species.dim()); `sector_of(L)` gives the
/// target conserved vector.
ScalingReport hs1_scaling(const LocalFunction& f, std::size_t block, const SpeciesTable& species,
                          const VelocitySet* vs, const std::function<ConservedVector(long)>& sector_of,
                          const std::vector<long>& sides);

double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace latgas
