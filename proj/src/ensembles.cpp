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

#include "latgas/ensembles.hpp"

#include <cmath>
#include <map>

#include "latgas/error.hpp"
#include "latgas/thermo.hpp"

namespace latgas {

double SiteLaw::total() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.second;
  return s;
}

namespace {

double mask_probability(std::uint32_t mask, std::span<const double> theta) {
  double p = 1.0;
  for (std::size_t s = 0; s < theta.size(); ++s) p *= ((mask >> s) & 1u) ? theta[s] : 1.0 - theta[s];
  return p;
}

} // namespace

SiteLaw site_law(const SpeciesTable& species, std::span<const double> theta) {
  if (theta.size() != species.size()) throw InvalidParameters("site law needs one density per species");
  // One species at a time; the number of distinct keys stays far below 2^|V|.
  std::map<ConservedVector, double> acc{{species.zero(), 1.0}};
  for (std::size_t s = 0; s < species.size(); ++s) {
    const ConservedVector v = species.site_value(1u << s);
    std::map<ConservedVector, double> next;
    for (const auto& [k, p] : acc) {
      next[k] += p * (1.0 - theta[s]);
      next[k + v] += p * theta[s];
    }
    acc = std::move(next);
  }
  SiteLaw law;
  law.entries.assign(acc.begin(), acc.end());
  return law;
}

SumLaw sum_law(const SiteLaw& law, std::size_t sites) {
  SumLaw cur;
  ConservedVector zero = law.entries.empty() ? ConservedVector() : law.entries.front().first.scaled(0);
  cur.emplace(zero, 1.0);
  for (std::size_t i = 0; i < sites; ++i) {
    SumLaw next;
    next.reserve(cur.size() * 2);
    for (const auto& [k, p] : cur)
      for (const auto& [v, q] : law.entries) {
        if (q == 0.0) continue;
        next[k + v] += p * q;
      }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> matched_densities(const SpeciesTable& species, const VelocitySet* vs,
                                      const ConservedVector& target, std::size_t sites) {
  const double n = static_cast<double>(sites);
  if (species.is_scalar()) return {static_cast<double>(target.mass) / n};
  if (!vs) throw InvalidParameters("velocity set required for matched densities");
  const auto v = target.values(vs->irrational());
  HydroPoint x;
  x.rho = v[0] / n;
  for (std::size_t k = 1; k < v.size(); ++k) x.p.push_back(v[k] / n);
  return theta_all(lambda_of_hydro(x, *vs), *vs);
}

EnsembleComparison compare_ensembles(const LocalFunction& f, std::size_t block, std::size_t total_sites,
                                     const SpeciesTable& species, std::span<const double> theta,
                                     const ConservedVector& target) {
  if (block > total_sites) throw InvalidParameters("block larger than the torus");
  if (block * species.size() > 24) throw InvalidParameters("block too large to enumerate");
  const SiteLaw law = site_law(species, theta);
  const SumLaw rest = sum_law(law, total_sites - block);

  const std::uint32_t per = 1u << species.size();
  std::vector<std::uint32_t> masks(block, 0);
  EnsembleComparison out;
  double mean = 0.0, second = 0.0, can = 0.0, norm = 0.0;
  for (;;) {
    double p = 1.0;
    ConservedVector s = species.zero();
    for (auto m : masks) {
      p *= mask_probability(m, theta);
      s += species.site_value(m);
    }
    const double fv = f(masks);
    mean += p * fv;
    second += p * fv * fv;
    auto it = rest.find(target - s);
    if (it != rest.end()) {
      can += p * it->second * fv;
      norm += p * it->second;
    }
    std::size_t k = 0;
    while (k < block && ++masks[k] == per) masks[k++] = 0;
    if (k == block) break;
  }
  if (!(norm > 0.0)) throw InfeasibleSector("sector " + target.to_string() + " has zero probability");
  out.grand = mean;
  out.variance = std::max(0.0, second - mean * mean);
  out.canonical = can / norm;
  out.normalizer = norm;
  return out;
}

double canonical_expectation(const LocalFunction& f, std::size_t block, std::size_t total_sites,
                             const SpeciesTable& species, const VelocitySet* vs, const ConservedVector& target) {
  const auto theta = matched_densities(species, vs, target, total_sites);
  return compare_ensembles(f, block, total_sites, species, theta, target).canonical;
}

ScalingReport hs1_scaling(const LocalFunction& f, std::size_t block, const SpeciesTable& species,
                          const VelocitySet* vs, const std::function<ConservedVector(long)>& sector_of,
                          const std::vector<long>& sides) {
  ScalingReport rep;
  std::vector<double> xs, ys;
  for (long L : sides) {
    std::size_t sites = 1;
    for (int k = 0; k < species.dim(); ++k) sites *= static_cast<std::size_t>(L);
    const ConservedVector target = sector_of(L);
    const auto theta = matched_densities(species, vs, target, sites);
    const auto c = compare_ensembles(f, block, sites, species, theta, target);
    ScalingRow row{L, c.canonical, c.grand, c.difference(), std::sqrt(c.variance) / static_cast<double>(sites)};
    rep.rows.push_back(row);
    if (std::abs(row.difference) > 0.0) {
      xs.push_back(std::log(static_cast<double>(L)));
      ys.push_back(std::log(std::abs(row.difference)));
    }
  }
  rep.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return rep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

} // namespace latgas
