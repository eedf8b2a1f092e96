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
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "latgas/exact.hpp"
#include "latgas/lattice.hpp"
#include "latgas/velocity.hpp"

namespace latgas {

/// Explicit finite set of lattice sites.
struct Region {
  int dim = 1;
  std::vector<std::array<int, 3>> sites;

  static Region segment(int length);
  static Region box(int side, int d);
  /// {-M..M}^d.
  static Region cube(int M, int d);
  std::size_t size() const { return sites.size(); }
  /// Max-norm distance.
  int distance(std::size_t i, std::size_t j) const;
};

enum class ExchangeKind {
  uniform, ///< any pair of sites at rate M^{-(d+2)}
  bounded  ///< pairs within distance M at rate 2 A_M / M^{d+2}
};

using SparseGenerator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// All configurations of a region with a fixed conserved vector, with the
/// exchange, on-site collision and four-site collision generators.
struct GeneratorSector {
  Region region;
  SpeciesTable species;
  std::vector<CollisionQuadruple> quadruples;
  ConservedVector sector;
  int M = 1;
  ExchangeKind kind = ExchangeKind::uniform;
  std::vector<std::uint64_t> states;
  std::unordered_map<std::uint64_t, std::size_t> index;
  SparseGenerator Lex, Lc, Lct;

  std::size_t size() const { return states.size(); }
  bool occupied(std::uint64_t state, std::size_t site, std::size_t s) const {
    return (state >> (site * species.size() + s)) & 1u;
  }
  double exchange_rate() const;
};

/// Enumerates the sector (lexicographic in the site masks) and assembles the
/// generators. `with_tilde` controls the (costly) four-site collision matrix.
GeneratorSector build_sector(const Region& region, const SpeciesTable& species,
                             const std::vector<CollisionQuadruple>& quadruples, const ConservedVector& sector, int M,
                             ExchangeKind kind = ExchangeKind::uniform, bool with_tilde = true);

/// Every sector of the region with its size, in ConservedVector order.
std::vector<std::pair<ConservedVector, double>> sector_list(const Region& region, const SpeciesTable& species);

/// <f, -L f> under the uniform measure on the sector.
double quadratic_form(const SparseGenerator& L, const Eigen::VectorXd& f);

/// Sum-of-squares Dirichlet forms, evaluated configuration by configuration.
double exchange_form(const GeneratorSector& g, const Eigen::VectorXd& f);
double collision_form(const GeneratorSector& g, const Eigen::VectorXd& f);

struct GapReport {
  std::string sector;
  std::size_t dim = 0;
  bool trivial = false;
  double gap = 0.0;         ///< smallest nonzero eigenvalue of -(Lex + Lc)
  double bound_ratio = 0.0; ///< gap^{-1} / M^{2+3d+2d^2}
  std::string method;
};

struct GapOptions {
  std::size_t dense_limit = 4000;
  int max_lanczos = 2000;
  double tolerance = 1e-10;
};

/// Second-smallest eigenvalue of a symmetric generator -L with constant kernel.
double symmetric_gap(const SparseGenerator& L, const GapOptions& opt = {}, std::string* method = nullptr);
GapReport spectral_gap(const GeneratorSector& g, const GapOptions& opt = {});

struct ComparisonReport {
  double max_ratio = 0.0;     ///< max over f of <-Lct f,f> / (M^2 <-Lex f,f> + <-Lc f,f>)
  double worst_margin = 0.0;  ///< min over f of <-Lct f,f> - <-Lc F,F>
  bool comparison_holds = true;
  std::size_t samples = 0;
};

/// Conditional expectation of f given the per-species particle counts.
Eigen::VectorXd condition_on_counts(const GeneratorSector& g, const Eigen::VectorXd& f);
ComparisonReport check_collision_comparison(const GeneratorSector& g, const std::vector<Eigen::VectorXd>& fs,
                                       double tol = 1e-10);

} // namespace latgas
