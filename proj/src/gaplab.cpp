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

#include "latgas/gaplab.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "latgas/error.hpp"
#include "latgas/kernels.hpp"

namespace latgas {

Region Region::segment(int length) { return box(length, 1); }

Region Region::box(int side, int d) {
  if (side < 1 || d < 1 || d > 3) throw InvalidParameters("region needs side >= 1 and 1 <= d <= 3");
  Region r;
  r.dim = d;
  std::array<int, 3> c{0, 0, 0};
  for (;;) {
    r.sites.push_back(c);
    int k = 0;
    while (k < d && ++c[k] == side) c[k++] = 0;
    if (k == d) break;
  }
  return r;
}

Region Region::cube(int M, int d) {
  Region r = box(2 * M + 1, d);
  for (auto& s : r.sites)
    for (int k = 0; k < d; ++k) s[k] -= M;
  return r;
}

int Region::distance(std::size_t i, std::size_t j) const {
  int m = 0;
  for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(sites[i][k] - sites[j][k]));
  return m;
}

double GeneratorSector::exchange_rate() const {
  const int d = region.dim;
  const double md2 = std::pow(static_cast<double>(M), d + 2);
  return kind == ExchangeKind::uniform ? 1.0 / md2 : 2.0 * compute_AM(M, d) / md2;
}

namespace {

std::uint64_t pack(const std::uint32_t* masks, std::size_t sites, std::size_t S) {
  std::uint64_t v = 0;
  for (std::size_t x = 0; x < sites; ++x) v |= static_cast<std::uint64_t>(masks[x]) << (x * S);
  return v;
}

std::uint64_t bit(std::size_t site, std::size_t s, std::size_t S) { return std::uint64_t{1} << (site * S + s); }

} // namespace

GeneratorSector build_sector(const Region& region, const SpeciesTable& species,
                             const std::vector<CollisionQuadruple>& quadruples, const ConservedVector& sector, int M,
                             ExchangeKind kind, bool with_tilde) {
  const std::size_t K = region.size();
  const std::size_t S = species.size();
  if (K * S > 64) throw InvalidParameters("region too large for packed states (sites * species > 64)");
  if (M < 1) throw InvalidParameters("gap lab needs M >= 1");
  GeneratorSector g;
  g.region = region;
  g.species = species;
  g.quadruples = quadruples;
  g.sector = sector;
  g.M = M;
  g.kind = kind;

  SectorEnumerator en(species, K);
  std::vector<std::uint32_t> flat;
  en.enumerate(sector, flat);
  const std::size_t n = flat.size() / K;
  g.states.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.states[i] = pack(flat.data() + i * K, K, S);
    g.index.emplace(g.states[i], i);
  }

  auto lookup = [&](std::uint64_t s) {
    auto it = g.index.find(s);
    if (it == g.index.end()) throw AuditFailure("transition leaves the sector");
    return static_cast<int>(it->second);
  };
  auto assemble = [&](std::vector<Eigen::Triplet<double>>& trip) {
    SparseGenerator L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> diag(n, 0.0);
    for (const auto& t : trip) diag[t.row()] -= t.value();
    for (std::size_t i = 0; i < n; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
    L.setFromTriplets(trip.begin(), trip.end());
    L.makeCompressed();
    return L;
  };

  const double rex = g.exchange_rate();
  std::vector<Eigen::Triplet<double>> tex, tc, tct;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t st = g.states[i];
    const int row = static_cast<int>(i);
    for (std::size_t x = 0; x < K; ++x)
      for (std::size_t y = 0; y < K; ++y) {
        if (x == y) continue;
        if (kind == ExchangeKind::bounded && region.distance(x, y) > M) continue;
        for (std::size_t s = 0; s < S; ++s) {
          const auto bx = bit(x, s, S), by = bit(y, s, S);
          if ((st & bx) && !(st & by)) tex.emplace_back(row, lookup(st ^ bx ^ by), rex);
        }
      }
    for (std::size_t x = 0; x < K; ++x)
      for (const auto& q : quadruples) {
        const auto need = bit(x, q.v, S) | bit(x, q.w, S);
        const auto empty = bit(x, q.vp, S) | bit(x, q.wp, S);
        if ((st & need) == need && (st & empty) == 0) tc.emplace_back(row, lookup(st ^ need ^ empty), 1.0);
      }
    if (with_tilde && !quadruples.empty()) {
      const double w = 1.0 / std::pow(static_cast<double>(K), 3);
      for (const auto& q : quadruples)
        for (std::size_t x1 = 0; x1 < K; ++x1) {
          const auto b1 = bit(x1, q.v, S);
          if (!(st & b1)) continue;
          for (std::size_t x2 = 0; x2 < K; ++x2) {
            const auto b2 = bit(x2, q.w, S);
            if (!(st & b2)) continue;
            for (std::size_t x3 = 0; x3 < K; ++x3) {
              const auto b3 = bit(x3, q.vp, S);
              if (st & b3) continue;
              for (std::size_t x4 = 0; x4 < K; ++x4) {
                const auto b4 = bit(x4, q.wp, S);
                if (st & b4) continue;
                tct.emplace_back(row, lookup(st ^ b1 ^ b2 ^ b3 ^ b4), w);
              }
            }
          }
        }
    }
  }
  g.Lex = assemble(tex);
  g.Lc = assemble(tc);
  g.Lct = assemble(tct);
  return g;
}

std::vector<std::pair<ConservedVector, double>> sector_list(const Region& region, const SpeciesTable& species) {
  SectorEnumerator en(species, region.size());
  return en.all_sectors();
}

double quadratic_form(const SparseGenerator& L, const Eigen::VectorXd& f) {
  return -f.dot(L * f) / static_cast<double>(f.size());
}

double exchange_form(const GeneratorSector& g, const Eigen::VectorXd& f) {
  const std::size_t K = g.region.size(), S = g.species.size();
  const double rate = g.exchange_rate();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::uint64_t st = g.states[i];
    for (std::size_t x = 0; x < K; ++x)
      for (std::size_t y = 0; y < K; ++y) {
        if (g.kind == ExchangeKind::bounded && (x == y || g.region.distance(x, y) > g.M)) continue;
        for (std::size_t sp = 0; sp < S; ++sp) {
          const auto bx = bit(x, sp, S), by = bit(y, sp, S);
          // Exchange of the two occupation variables.
          std::uint64_t t = st;
          if (((st & bx) != 0) != ((st & by) != 0)) t ^= bx | by;
          const double diff = f[static_cast<Eigen::Index>(g.index.at(t))] - f[static_cast<Eigen::Index>(i)];
          s += diff * diff;
        }
      }
  }
  return rate / 4.0 * s / static_cast<double>(g.size());
}

double collision_form(const GeneratorSector& g, const Eigen::VectorXd& f) {
  const std::size_t K = g.region.size(), S = g.species.size();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::uint64_t st = g.states[i];
    for (const auto& q : g.quadruples)
      for (std::size_t x = 0; x < K; ++x) {
        const auto need = bit(x, q.v, S) | bit(x, q.w, S);
        const auto empty = bit(x, q.vp, S) | bit(x, q.wp, S);
        if ((st & need) != need || (st & empty) != 0) continue;
        const double diff =
            f[static_cast<Eigen::Index>(g.index.at(st ^ need ^ empty))] - f[static_cast<Eigen::Index>(i)];
        s += diff * diff;
      }
  }
  return 0.5 * s / static_cast<double>(g.size());
}

namespace {

double lanczos_gap(const SparseGenerator& L, const GapOptions& opt) {
  const Eigen::Index n = L.rows();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = std::sin(1.0 + 0.7 * static_cast<double>(i)) + 0.1 * ((i * 7919) % 13);
  q -= ones * ones.dot(q);
  q.normalize();
  const int mmax = static_cast<int>(std::min<Eigen::Index>(opt.max_lanczos, n - 1));
  Eigen::MatrixXd Q(n, mmax + 1);
  std::vector<double> alpha, beta;
  Q.col(0) = q;
  double last = std::numeric_limits<double>::infinity();
  for (int j = 0; j < mmax; ++j) {
    Eigen::VectorXd w = -(L * Q.col(j));
    const double a = Q.col(j).dot(w);
    alpha.push_back(a);
    // Full reorthogonalization, including against the constant mode.
    for (int pass = 0; pass < 2; ++pass) {
      w -= ones * ones.dot(w);
      w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    }
    const double b = w.norm();
    const int m = j + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double theta = es.eigenvalues()[0];
    const double resid = std::abs(b * es.eigenvectors()(m - 1, 0));
    if (b < 1e-12 || (resid < opt.tolerance * std::max(1.0, std::abs(theta)) && std::abs(theta - last) < opt.tolerance))
      return theta;
    last = theta;
    beta.push_back(b);
    Q.col(j + 1) = w / b;
  }
  throw EigenSolverError("Lanczos did not converge within " + std::to_string(mmax) + " steps");
}

} // namespace

double symmetric_gap(const SparseGenerator& L, const GapOptions& opt, std::string* method) {
  const Eigen::Index n = L.rows();
  if (n < 2) return std::numeric_limits<double>::infinity();
  if (static_cast<std::size_t>(n) <= opt.dense_limit) {
    Eigen::MatrixXd A = -Eigen::MatrixXd(L);
    A = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigenSolverError("dense eigensolver failed");
    if (method) *method = "dense";
    return es.eigenvalues()[1];
  }
  if (method) *method = "lanczos";
  return lanczos_gap(L, opt);
}

GapReport spectral_gap(const GeneratorSector& g, const GapOptions& opt) {
  GapReport r;
  r.sector = g.sector.to_string();
  r.dim = g.size();
  if (g.size() <= 1) {
    r.trivial = true;
    r.gap = std::numeric_limits<double>::infinity();
    r.method = "trivial";
    return r;
  }
  SparseGenerator L = g.Lex + g.Lc;
  r.gap = symmetric_gap(L, opt, &r.method);
  const int d = g.region.dim;
  r.bound_ratio = (1.0 / r.gap) / std::pow(static_cast<double>(g.M), 2 + 3 * d + 2 * d * d);
  return r;
}

Eigen::VectorXd condition_on_counts(const GeneratorSector& g, const Eigen::VectorXd& f) {
  const std::size_t K = g.region.size(), S = g.species.size();
  std::map<std::vector<int>, std::pair<double, int>> acc;
  std::vector<std::vector<int>> keys(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::vector<int> c(S, 0);
    for (std::size_t x = 0; x < K; ++x)
      for (std::size_t s = 0; s < S; ++s) c[s] += g.occupied(g.states[i], x, s);
    auto& a = acc[c];
    a.first += f[static_cast<Eigen::Index>(i)];
    a.second += 1;
    keys[i] = std::move(c);
  }
  Eigen::VectorXd F(f.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& a = acc[keys[i]];
    F[static_cast<Eigen::Index>(i)] = a.first / a.second;
  }
  return F;
}

ComparisonReport check_collision_comparison(const GeneratorSector& g, const std::vector<Eigen::VectorXd>& fs, double tol) {
  ComparisonReport r;
  r.worst_margin = std::numeric_limits<double>::infinity();
  const double m2 = static_cast<double>(g.M) * g.M;
  for (const auto& f : fs) {
    const double dex = quadratic_form(g.Lex, f);
    const double dc = quadratic_form(g.Lc, f);
    const double dct = quadratic_form(g.Lct, f);
    const double denom = m2 * dex + dc;
    if (denom > 1e-300) r.max_ratio = std::max(r.max_ratio, dct / denom);
    const Eigen::VectorXd F = condition_on_counts(g, f);
    const double lhs = quadratic_form(g.Lc, F);
    const double margin = dct - lhs;
    r.worst_margin = std::min(r.worst_margin, margin);
    if (margin < -tol) r.comparison_holds = false;
    ++r.samples;
  }
  return r;
}

} // namespace latgas
