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

#include "latgas/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>

#include "latgas/error.hpp"

namespace latgas {

Torus::Torus(long side, int dim) : N_(side), d_(dim) {
  if (side < 1) throw InvalidParameters("torus side must be >= 1");
  if (dim < 1 || dim > 3) throw InvalidParameters("torus dimension must be 1, 2 or 3");
  sites_ = 1;
  for (int k = 0; k < dim; ++k) sites_ *= static_cast<std::size_t>(side);
}

std::array<double, 3> Torus::position(std::size_t x) const {
  auto c = coords(x);
  return {static_cast<double>(c[0]) / N_, static_cast<double>(c[1]) / N_, static_cast<double>(c[2]) / N_};
}

SpeciesTable SpeciesTable::scalar(int dim) {
  SpeciesTable t;
  t.count_ = 1;
  t.dim_ = dim;
  t.scalar_ = true;
  t.exact_.assign(static_cast<std::size_t>(dim), ExactCoord{});
  return t;
}

SpeciesTable SpeciesTable::of(const VelocitySet& vs) {
  SpeciesTable t;
  t.count_ = vs.size();
  t.dim_ = vs.dim();
  t.scalar_ = false;
  t.w_ = vs.irrational();
  for (std::size_t s = 0; s < vs.size(); ++s)
    for (int k = 0; k < vs.dim(); ++k) t.exact_.push_back(vs.exact_component(s, k));
  return t;
}

ConservedVector SpeciesTable::site_value(std::uint32_t mask) const {
  ConservedVector c = zero();
  c.mass = std::popcount(mask);
  if (scalar_) return c;
  while (mask) {
    const int s = std::countr_zero(mask);
    mask &= mask - 1;
    for (int k = 0; k < dim_; ++k) c.momentum[k] += exact_[s * dim_ + k];
  }
  return c;
}

double SpeciesTable::channel_value(std::uint32_t mask, std::size_t k) const {
  if (k == 0) return std::popcount(mask);
  double v = 0.0;
  while (mask) {
    const int s = std::countr_zero(mask);
    mask &= mask - 1;
    v += velocity(s, static_cast<int>(k) - 1);
  }
  return v;
}

LatticeConfig::LatticeConfig(Torus torus, SpeciesTable species)
    : torus_(torus), species_(std::move(species)), occ_(torus.sites(), 0u) {}

ConservedVector conserved_totals(const LatticeConfig& cfg) {
  ConservedVector c = cfg.species().zero();
  for (std::size_t x = 0; x < cfg.sites(); ++x)
    if (cfg.mask(x)) c += cfg.species().site_value(cfg.mask(x));
  return c;
}

LatticeConfig sample_densities(const Torus& torus, const SpeciesTable& species,
                               const std::function<double(std::size_t, std::size_t)>& density, Rng& rng) {
  LatticeConfig cfg(torus, species);
  for (std::size_t x = 0; x < torus.sites(); ++x) {
    std::uint32_t m = 0;
    for (std::size_t s = 0; s < species.size(); ++s)
      if (rng.uniform() < density(x, s)) m |= (1u << s);
    cfg.set_mask(x, m);
  }
  return cfg;
}

LatticeConfig sample_product(const Torus& torus, const VelocitySet& vs,
                             const std::function<ChemicalPotential(std::size_t)>& lambda, Rng& rng) {
  LatticeConfig cfg(torus, SpeciesTable::of(vs));
  for (std::size_t x = 0; x < torus.sites(); ++x) {
    const auto t = theta_all(lambda(x), vs);
    std::uint32_t m = 0;
    for (std::size_t s = 0; s < vs.size(); ++s)
      if (rng.uniform() < t[s]) m |= (1u << s);
    cfg.set_mask(x, m);
  }
  return cfg;
}

std::vector<double> profile_densities(const ProfileSpec& spec, const Torus& torus, const SpeciesTable& species,
                                      const VelocitySet* vs) {
  const double scale = std::pow(static_cast<double>(torus.side()), -spec.b);
  const std::size_t S = species.size();
  std::vector<double> out(torus.sites() * S);
  for (std::size_t x = 0; x < torus.sites(); ++x) {
    const auto pos = torus.position(x);
    std::span<const double> u(pos.data(), static_cast<std::size_t>(torus.dim()));
    const double f0 = spec.phi0 ? spec.phi0(u) : 0.0;
    if (species.is_scalar()) {
      const double rho = 0.5 + scale * f0;
      if (!(rho > 0.0 && rho < 1.0)) throw InversionError("profile density leaves (0,1)");
      out[x] = rho;
      continue;
    }
    if (!vs) throw InvalidParameters("profile on a velocity system needs the velocity set");
    HydroPoint h;
    h.rho = static_cast<double>(vs->size()) / 2.0 + scale * f0;
    h.p.assign(vs->dim(), 0.0);
    for (int k = 0; k < vs->dim() && k < static_cast<int>(spec.phi.size()); ++k)
      if (spec.phi[k]) h.p[k] = scale * spec.phi[k](u);
    const auto t = theta_all(lambda_of_hydro(h, *vs), *vs);
    std::copy(t.begin(), t.end(), out.begin() + static_cast<std::ptrdiff_t>(x * S));
  }
  return out;
}

LatticeConfig sample_profile(const ProfileSpec& spec, const Torus& torus, const SpeciesTable& species,
                             const VelocitySet* vs, Rng& rng) {
  const auto dens = profile_densities(spec, torus, species, vs);
  const std::size_t S = species.size();
  return sample_densities(torus, species, [&](std::size_t x, std::size_t s) { return dens[x * S + s]; }, rng);
}

SectorEnumerator::SectorEnumerator(const SpeciesTable& species, std::size_t sites)
    : species_(species), sites_(sites), memo_(sites + 1) {
  if (species.size() > 26) throw InvalidParameters("sector enumeration supports at most 26 species");
  std::map<ConservedVector, std::vector<std::uint32_t>> groups;
  const std::uint32_t n = 1u << species.size();
  for (std::uint32_t m = 0; m < n; ++m) groups[species.site_value(m)].push_back(m);
  for (auto& [v, ms] : groups) classes_.push_back({v, std::move(ms)});
}

double SectorEnumerator::count_rec(std::size_t remaining, const ConservedVector& target) {
  if (remaining == 0) return target == species_.zero() ? 1.0 : 0.0;
  if (target.mass < 0 || target.mass > static_cast<std::int64_t>(remaining * species_.size())) return 0.0;
  auto& memo = memo_[remaining];
  if (auto it = memo.find(target); it != memo.end()) return it->second;
  double total = 0.0;
  for (const auto& c : classes_) {
    if (c.value.mass > target.mass) continue;
    total += static_cast<double>(c.masks.size()) * count_rec(remaining - 1, target - c.value);
  }
  memo.emplace(target, total);
  return total;
}

bool SectorEnumerator::feasible(const ConservedVector& target) { return count_rec(sites_, target) > 0.0; }

double SectorEnumerator::count(const ConservedVector& target) { return count_rec(sites_, target); }

bool SectorEnumerator::enumerate(const ConservedVector& target, std::vector<std::uint32_t>& out,
                                 std::size_t limit) {
  if (!feasible(target)) throw InfeasibleSector("sector " + target.to_string() + " has no configuration");
  out.clear();
  std::vector<std::uint32_t> cur(sites_);
  std::size_t produced = 0;
  bool complete = true;
  std::function<void(std::size_t, const ConservedVector&)> rec = [&](std::size_t i, const ConservedVector& rest) {
    if (!complete) return;
    if (i == sites_) {
      if (produced == limit) {
        complete = false;
        return;
      }
      out.insert(out.end(), cur.begin(), cur.end());
      ++produced;
      return;
    }
    for (const auto& c : classes_) {
      if (c.value.mass > rest.mass) continue;
      const ConservedVector next = rest - c.value;
      if (count_rec(sites_ - i - 1, next) == 0.0) continue;
      for (std::uint32_t m : c.masks) {
        cur[i] = m;
        rec(i + 1, next);
        if (!complete) return;
      }
    }
  };
  rec(0, target);
  return complete;
}

std::vector<std::uint32_t> SectorEnumerator::first(const ConservedVector& target) {
  std::vector<std::uint32_t> out;
  enumerate(target, out, 1);
  out.resize(sites_);
  return out;
}

std::vector<std::pair<ConservedVector, double>> SectorEnumerator::all_sectors() {
  // Convolve the single-site class sizes sites_ times.
  std::map<ConservedVector, double> law{{species_.zero(), 1.0}};
  for (std::size_t i = 0; i < sites_; ++i) {
    std::map<ConservedVector, double> next;
    for (const auto& [v, n] : law)
      for (const auto& c : classes_) next[v + c.value] += n * static_cast<double>(c.masks.size());
    law.swap(next);
  }
  return {law.begin(), law.end()};
}

std::vector<std::uint32_t> sample_canonical(const ConservedVector& sector, std::size_t sites,
                                            const SpeciesTable& species,
                                            const std::vector<CollisionQuadruple>& quadruples, Rng& rng,
                                            const CanonicalOptions& opt) {
  SectorEnumerator en(species, sites);
  std::vector<std::uint32_t> states;
  if (en.enumerate(sector, states, opt.enumeration_limit)) {
    const std::size_t n = states.size() / sites;
    const std::size_t pick = rng.below(n);
    return {states.begin() + static_cast<std::ptrdiff_t>(pick * sites),
            states.begin() + static_cast<std::ptrdiff_t>((pick + 1) * sites)};
  }
  std::vector<std::uint32_t> cur = en.first(sector);
  const std::size_t S = species.size();
  const double sweep = static_cast<double>(sites * S);
  const auto moves = static_cast<std::uint64_t>(opt.burn_in_factor * sweep * sweep);
  for (std::uint64_t it = 0; it < moves; ++it) {
    if (quadruples.empty() || rng.uniform() < 0.5) {
      if (sites < 2) continue;
      const std::size_t x = rng.below(sites);
      const std::size_t y = rng.below(sites);
      const std::size_t s = rng.below(S);
      const std::uint32_t bx = (cur[x] >> s) & 1u, by = (cur[y] >> s) & 1u;
      if (bx != by) {
        cur[x] ^= (1u << s);
        cur[y] ^= (1u << s);
      }
    } else {
      const std::size_t x = rng.below(sites);
      const auto& q = quadruples[rng.below(quadruples.size())];
      const std::uint32_t need = (1u << q.v) | (1u << q.w);
      const std::uint32_t empty = (1u << q.vp) | (1u << q.wp);
      if ((cur[x] & need) == need && (cur[x] & empty) == 0) cur[x] ^= need | empty;
    }
  }
  return cur;
}

std::vector<double> block_average(const LatticeConfig& cfg, std::size_t center, int L) {
  const auto& sp = cfg.species();
  const Torus& t = cfg.torus();
  std::vector<double> acc(sp.channels(), 0.0);
  const int d = t.dim();
  std::vector<int> z(d, -L);
  std::size_t count = 0;
  for (;;) {
    const std::uint32_t m = cfg.mask(t.shift(center, z));
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += sp.channel_value(m, k);
    ++count;
    int k = 0;
    while (k < d && ++z[k] > L) z[k++] = -L;
    if (k == d) break;
  }
  for (auto& a : acc) a /= static_cast<double>(count);
  return acc;
}

void write_snapshot(const std::string& path, const LatticeConfig& cfg, const nlohmann::json& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  nlohmann::json h = meta;
  h["N"] = cfg.torus().side();
  h["d"] = cfg.torus().dim();
  h["species"] = cfg.species().size();
  h["scalar"] = cfg.species().is_scalar();
  const std::size_t bytes = (cfg.species().size() + 7) / 8;
  h["bytes_per_site"] = bytes;
  os << h.dump() << "\n";
  for (std::size_t x = 0; x < cfg.sites(); ++x) {
    const std::uint32_t m = cfg.mask(x);
    for (std::size_t b = 0; b < bytes; ++b) os.put(static_cast<char>((m >> (8 * b)) & 0xffu));
  }
  if (!os) throw IoError("write failed for " + path);
}

LatticeConfig read_snapshot(const std::string& path, const VelocitySet* vs, nlohmann::json* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  std::getline(is, line);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw IoError("bad snapshot header in " + path + ": " + e.what());
  }
  const Torus torus(h.at("N").get<long>(), h.at("d").get<int>());
  SpeciesTable sp = h.at("scalar").get<bool>() ? SpeciesTable::scalar(torus.dim())
                    : vs                        ? SpeciesTable::of(*vs)
                                                : throw IoError("snapshot of a velocity system needs its velocity set");
  if (sp.size() != h.at("species").get<std::size_t>()) throw IoError("species count mismatch in " + path);
  LatticeConfig cfg(torus, sp);
  const std::size_t bytes = h.at("bytes_per_site").get<std::size_t>();
  for (std::size_t x = 0; x < cfg.sites(); ++x) {
    std::uint32_t m = 0;
    for (std::size_t b = 0; b < bytes; ++b) {
      const int c = is.get();
      if (c == EOF) throw IoError("truncated snapshot " + path);
      m |= static_cast<std::uint32_t>(c) << (8 * b);
    }
    cfg.set_mask(x, m);
  }
  if (meta) *meta = h;
  return cfg;
}

} // namespace latgas
