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

#include "latgas/observables.hpp"

#include <cmath>
#include <numbers>

#include "latgas/error.hpp"

namespace latgas {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double weight(const SpeciesTable& sp, std::size_t s, std::size_t k) {
  return k == 0 ? 1.0 : sp.velocity(s, static_cast<int>(k) - 1);
}

} // namespace

std::vector<double> channel_field(const LatticeConfig& cfg, std::size_t k) {
  if (k >= cfg.species().channels()) throw InvalidParameters("channel index out of range");
  std::vector<double> f(cfg.sites());
  for (std::size_t x = 0; x < cfg.sites(); ++x) f[x] = cfg.species().channel_value(cfg.mask(x), k);
  return f;
}

double pair(const LatticeConfig& cfg, std::size_t k, const TestFunction& H) {
  const auto f = channel_field(cfg, k);
  const Torus& t = cfg.torus();
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] == 0.0) continue;
    const auto u = t.position(x);
    s += f[x] * H(std::span<const double>(u.data(), static_cast<std::size_t>(t.dim())));
  }
  return s / static_cast<double>(t.sites());
}

std::complex<double> fourier_coefficient(const Torus& torus, std::span<const double> field, std::span<const int> n) {
  const int d = torus.dim();
  if (static_cast<int>(n.size()) != d) throw InvalidParameters("mode has wrong dimension");
  const long N = torus.side();
  // Twiddle table per axis keeps the phase exact for integer n.x.
  std::vector<std::vector<std::complex<double>>> tw(d, std::vector<std::complex<double>>(N));
  for (int k = 0; k < d; ++k)
    for (long c = 0; c < N; ++c) {
      const long r = ((static_cast<long>(n[k]) * c) % N + N) % N;
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(N);
      tw[k][c] = {std::cos(ang), std::sin(ang)};
    }
  std::complex<double> s = 0.0;
  for (std::size_t x = 0; x < field.size(); ++x) {
    if (field[x] == 0.0) continue;
    const auto c = torus.coords(x);
    std::complex<double> ph = tw[0][c[0]];
    for (int k = 1; k < d; ++k) ph *= tw[k][c[k]];
    s += field[x] * ph;
  }
  return s / static_cast<double>(torus.sites());
}

std::complex<double> fourier_pair(const LatticeConfig& cfg, std::size_t k, std::span<const int> n) {
  const auto f = channel_field(cfg, k);
  return fourier_coefficient(cfg.torus(), f, n);
}

double EmpiricalField::pair(std::size_t k, const TestFunction& H) const {
  const auto& f = channels.at(k);
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const auto u = torus.position(x);
    s += f[x] * H(std::span<const double>(u.data(), static_cast<std::size_t>(torus.dim())));
  }
  return s / static_cast<double>(torus.sites());
}

std::complex<double> EmpiricalField::fourier(std::size_t k, std::span<const int> n) const {
  return fourier_coefficient(torus, channels.at(k), n);
}

EmpiricalField corrected_field(const LatticeConfig& cfg, double b, double a0) {
  EmpiricalField e;
  e.torus = cfg.torus();
  e.b = b;
  const double scale = std::pow(static_cast<double>(cfg.torus().side()), b);
  for (std::size_t k = 0; k < cfg.species().channels(); ++k) {
    auto f = channel_field(cfg, k);
    for (auto& v : f) v = scale * (k == 0 ? v - a0 : v);
    e.channels.push_back(std::move(f));
  }
  return e;
}

double current_W(const LatticeConfig& cfg, const JumpKernel& kernel, std::size_t weight_channel, int j,
                 std::size_t x, bool reflected) {
  const auto& sp = cfg.species();
  const int d = kernel.dim();
  if (j < 0 || j >= d) throw InvalidParameters("current axis out of range");
  if (weight_channel >= sp.channels()) throw InvalidParameters("current channel out of range");
  const std::uint32_t m0 = cfg.mask(x);
  if (!m0) return 0.0;
  double s = 0.0;
  for (std::size_t o = 0; o < kernel.offsets(); ++o) {
    if (o == kernel.zero_offset()) continue;
    auto z = kernel.offset(o);
    const std::uint32_t mz = cfg.mask(cfg.torus().shift(x, z));
    const std::uint32_t moving = m0 & ~mz;
    if (!moving) continue;
    const std::size_t oq = reflected ? kernel.reflected(o) : o;
    for (std::size_t sidx = 0; sidx < sp.size(); ++sidx)
      if ((moving >> sidx) & 1u) s += weight(sp, sidx, weight_channel) * kernel.q(oq, sidx) * z[j];
  }
  const double pre = (kernel.kind() == JumpKernel::Kind::velocity ? kernel.AM() : 1.0) / ipow(kernel.range(), d + 1);
  return pre * s;
}

double current_V(const LatticeConfig& cfg, const JumpKernel& kernel, int i, int j, std::size_t k, std::size_t l,
                 std::size_t x) {
  const auto& sp = cfg.species();
  const int d = kernel.dim();
  const std::uint32_t m0 = cfg.mask(x);
  if (!m0) return 0.0;
  double s = 0.0;
  for (std::size_t o = 0; o < kernel.offsets(); ++o) {
    if (o == kernel.zero_offset()) continue;
    auto z = kernel.offset(o);
    const std::uint32_t moving = m0 & ~cfg.mask(cfg.torus().shift(x, z));
    if (!moving) continue;
    for (std::size_t sidx = 0; sidx < sp.size(); ++sidx)
      if ((moving >> sidx) & 1u) s += weight(sp, sidx, k) * weight(sp, sidx, l) * z[i] * z[j];
  }
  return kernel.AM() / ipow(kernel.range(), d + 2) * s;
}

double current_Vhat(const LatticeConfig& cfg, const JumpKernel& kernel, int i, int j, std::size_t k, std::size_t l,
                    std::size_t x, double B) {
  double shift = 0.0;
  if (i == j) {
    if (cfg.species().is_scalar())
      shift = 0.25;
    else if (k == l && k > 0)
      shift = B / 4.0;
  }
  return current_V(cfg, kernel, i, j, k, l, x) - shift;
}

} // namespace latgas
