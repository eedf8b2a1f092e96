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

#include "latgas/pde.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "latgas/error.hpp"
#include "latgas/thermo.hpp"

namespace latgas {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using Spec = std::vector<std::complex<double>>;
using State = std::vector<Spec>;

} // namespace

GridField::GridField(int n_, int d_, int components) : n(n_), d(d_) {
  if (n_ < 2 || d_ < 1 || d_ > 3) throw InvalidParameters("grid needs n >= 2 and 1 <= d <= 3");
  comp.assign(static_cast<std::size_t>(components), std::vector<double>(points(), 0.0));
}

std::size_t GridField::points() const {
  std::size_t p = 1;
  for (int k = 0; k < d; ++k) p *= static_cast<std::size_t>(n);
  return p;
}

std::array<double, 3> GridField::position(std::size_t i) const {
  std::array<double, 3> u{0, 0, 0};
  for (int k = d - 1; k >= 0; --k) {
    u[k] = static_cast<double>(i % n) / n;
    i /= n;
  }
  return u;
}

void GridField::fill(const std::function<double(int, std::span<const double>)>& f) {
  for (std::size_t c = 0; c < comp.size(); ++c)
    for (std::size_t i = 0; i < points(); ++i) {
      const auto u = position(i);
      comp[c][i] = f(static_cast<int>(c), std::span<const double>(u.data(), static_cast<std::size_t>(d)));
    }
}

struct SpectralGrid::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
};

SpectralGrid::SpectralGrid(int n, int d) : n_(n), d_(d), plans_(std::make_unique<Plans>()) {
  if (n < 2 || d < 1 || d > 3) throw InvalidParameters("spectral grid needs n >= 2 and 1 <= d <= 3");
  real_ = 1;
  for (int k = 0; k < d; ++k) real_ *= static_cast<std::size_t>(n);
  const std::size_t half = static_cast<std::size_t>(n / 2 + 1);
  spec_ = real_ / static_cast<std::size_t>(n) * half;
  waves_.resize(spec_);
  kept_.resize(spec_);
  for (std::size_t c = 0; c < spec_; ++c) {
    std::size_t rem = c;
    std::array<int, 3> k{0, 0, 0};
    k[d - 1] = static_cast<int>(rem % half);
    rem /= half;
    for (int a = d - 2; a >= 0; --a) {
      const int i = static_cast<int>(rem % n);
      rem /= n;
      k[a] = i <= n / 2 ? i : i - n;
    }
    waves_[c] = k;
    bool keep = true;
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) {
      keep = keep && 3 * std::abs(k[a]) < n;
      k2 += static_cast<double>(k[a]) * k[a];
    }
    kept_[c] = keep;
    if (keep) kmax2_ = std::max(kmax2_, k2);
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->rbuf = fftw_alloc_real(real_);
  plans_->cbuf = fftw_alloc_complex(spec_);
  int dims[3] = {n, n, n};
  plans_->fwd = fftw_plan_dft_r2c(d, dims, plans_->rbuf, plans_->cbuf, FFTW_ESTIMATE);
  plans_->inv = fftw_plan_dft_c2r(d, dims, plans_->cbuf, plans_->rbuf, FFTW_ESTIMATE);
}

SpectralGrid::~SpectralGrid() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plans_->fwd);
  fftw_destroy_plan(plans_->inv);
  fftw_free(plans_->rbuf);
  fftw_free(plans_->cbuf);
}

void SpectralGrid::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  std::copy(in.begin(), in.end(), plans_->rbuf);
  fftw_execute(plans_->fwd);
  const auto* src = reinterpret_cast<const std::complex<double>*>(plans_->cbuf);
  std::copy(src, src + spec_, out.begin());
}

void SpectralGrid::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  std::copy(in.begin(), in.end(), reinterpret_cast<std::complex<double>*>(plans_->cbuf));
  fftw_execute(plans_->inv);
  const double norm = 1.0 / static_cast<double>(real_);
  for (std::size_t i = 0; i < real_; ++i) out[i] = plans_->rbuf[i] * norm;
}

double stable_step(double kmax2, double speed) {
  const double diff = 4.0 * std::numbers::pi * std::numbers::pi * kmax2;
  const double adv = kTwoPi * std::sqrt(kmax2) * speed;
  return 2.5 / (diff + adv);
}

namespace {

/// Shared RK4 driver over spectral states; `rhs` writes d/dt of its input.
struct Integrator {
  const SpectralGrid& g;
  std::function<void(const State&, State&)> rhs;
  std::function<void(const State&)> after_step;

  long run(State& u, double T, double dt, double& max_mass) {
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(T / dt - 1e-9)));
    const double h = T / static_cast<double>(steps);
    const std::size_t nc = u.size();
    State k1 = u, k2 = u, k3 = u, k4 = u, tmp = u;
    const double scale = 1.0 / static_cast<double>(g.real_size());
    for (long s = 0; s < steps; ++s) {
      std::vector<double> mass0(nc);
      for (std::size_t c = 0; c < nc; ++c) mass0[c] = u[c][0].real() * scale;
      auto axpy = [&](const State& k, double a) {
        for (std::size_t c = 0; c < nc; ++c)
          for (std::size_t i = 0; i < u[c].size(); ++i) tmp[c][i] = u[c][i] + a * k[c][i];
      };
      rhs(u, k1);
      axpy(k1, 0.5 * h);
      rhs(tmp, k2);
      axpy(k2, 0.5 * h);
      rhs(tmp, k3);
      axpy(k3, h);
      rhs(tmp, k4);
      for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t i = 0; i < u[c].size(); ++i)
          u[c][i] += h / 6.0 * (k1[c][i] + 2.0 * k2[c][i] + 2.0 * k3[c][i] + k4[c][i]);
      for (std::size_t c = 0; c < nc; ++c)
        max_mass = std::max(max_mass, std::abs(u[c][0].real() * scale - mass0[c]));
      if (after_step) after_step(u);
    }
    return steps;
  }
};

State to_spectral(const SpectralGrid& g, const GridField& f) {
  State u(f.comp.size(), Spec(g.spectral_size()));
  for (std::size_t c = 0; c < f.comp.size(); ++c) {
    g.forward(f.comp[c], u[c]);
    for (std::size_t i = 0; i < g.spectral_size(); ++i)
      if (!g.kept(i)) u[c][i] = 0.0;
  }
  return u;
}

GridField to_grid(const SpectralGrid& g, const State& u, int n, int d, double t) {
  GridField f(n, d, static_cast<int>(u.size()));
  for (std::size_t c = 0; c < u.size(); ++c) g.inverse(u[c], f.comp[c]);
  f.t = t;
  return f;
}

double max_abs(const GridField& f) {
  double m = 0.0;
  for (const auto& c : f.comp)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

double pick_step(double dt, double stable) {
  if (dt <= 0.0) return 0.9 * stable;
  if (dt > stable)
    throw CflViolation("time step " + std::to_string(dt) + " exceeds stability limit " + std::to_string(stable));
  return dt;
}

double spectral_divergence(const SpectralGrid& g, const State& u, std::vector<double>& work) {
  const int d = g.d();
  Spec div(g.spectral_size());
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const auto k = g.wave(i);
    std::complex<double> s = 0.0;
    for (int a = 0; a < d; ++a) s += std::complex<double>(0.0, kTwoPi * k[a]) * u[a][i];
    div[i] = s;
  }
  g.inverse(div, work);
  double m = 0.0;
  for (double v : work) m = std::max(m, std::abs(v));
  return m;
}

} // namespace

PdeResult solve_scalar(const GridField& phi0, const std::vector<double>& gamma, double T, double dt) {
  if (phi0.comp.size() != 1) throw InvalidParameters("scalar solver takes one component");
  if (static_cast<int>(gamma.size()) != phi0.d) throw InvalidParameters("gamma must have d entries");
  SpectralGrid g(phi0.n, phi0.d);
  double gnorm = 0.0;
  for (double v : gamma) gnorm += v * v;
  const double h = pick_step(dt, stable_step(g.kmax2(), 2.0 * std::sqrt(gnorm) * std::max(1.0, max_abs(phi0))));
  State u = to_spectral(g, phi0);
  std::vector<double> phys(g.real_size());
  Spec sq(g.spectral_size());
  Integrator it{g, [&](const State& in, State& out) {
                  g.inverse(in[0], phys);
                  for (double& v : phys) v *= v;
                  g.forward(phys, sq);
                  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
                    if (!g.kept(i)) {
                      out[0][i] = 0.0;
                      continue;
                    }
                    const auto k = g.wave(i);
                    double kg = 0.0, k2 = 0.0;
                    for (int a = 0; a < phi0.d; ++a) {
                      kg += gamma[a] * k[a];
                      k2 += static_cast<double>(k[a]) * k[a];
                    }
                    out[0][i] = std::complex<double>(0.0, kTwoPi * kg) * sq[i] -
                                (kTwoPi * kTwoPi * k2) * in[0][i];
                  }
                },
                {}};
  PdeResult r;
  r.steps = it.run(u, T, h, r.max_mass_change);
  r.dt = T / static_cast<double>(r.steps);
  r.field = to_grid(g, u, phi0.n, phi0.d, phi0.t + T);
  return r;
}

double divergence_norm(const GridField& phi) {
  SpectralGrid g(phi.n, phi.d);
  if (static_cast<int>(phi.comp.size()) != phi.d) throw InvalidParameters("divergence needs d components");
  State u(phi.comp.size(), Spec(g.spectral_size()));
  for (std::size_t c = 0; c < phi.comp.size(); ++c) g.forward(phi.comp[c], u[c]);
  std::vector<double> work(g.real_size());
  return spectral_divergence(g, u, work);
}

PdeResult solve_ns(const GridField& phi0, const NSCoefficients& c, double T, double dt, bool projected) {
  const int d = phi0.d;
  if (static_cast<int>(phi0.comp.size()) != d) throw InvalidParameters("velocity field needs d components");
  if (d < 2) throw InvalidParameters("incompressible solver needs d >= 2");
  SpectralGrid g(phi0.n, d);
  std::vector<double> work(g.real_size());
  {
    State u0(d, Spec(g.spectral_size()));
    for (int a = 0; a < d; ++a) g.forward(phi0.comp[a], u0[a]);
    const double div0 = spectral_divergence(g, u0, work);
    if (projected && div0 > 1e-10)
      throw NonSolenoidalInput("initial divergence " + std::to_string(div0) + " exceeds 1e-10");
  }
  const double speed = (2.0 * std::abs(c.A0) + std::abs(c.A1) + 2.0 * std::abs(c.A2)) * max_abs(phi0) * std::sqrt(d);
  const double h = pick_step(dt, stable_step(g.kmax2(), speed));
  State u = to_spectral(g, phi0);

  std::vector<std::vector<double>> phi(d, std::vector<double>(g.real_size()));
  std::vector<std::vector<double>> grad(d * d, std::vector<double>(g.real_size()));
  std::vector<double> buf(g.real_size());
  Spec tmp(g.spectral_size()), s1(g.spectral_size()), s3(g.spectral_size());
  State nl(d, Spec(g.spectral_size()));
  const bool nonlinear = c.A0 != 0.0 || c.A1 != 0.0 || c.A2 != 0.0;

  Integrator it{g, [&](const State& in, State& out) {
                  if (nonlinear) {
                    for (int a = 0; a < d; ++a) g.inverse(in[a], phi[a]);
                    // |phi|^2 for the A2 gradient term.
                    for (std::size_t i = 0; i < buf.size(); ++i) {
                      double s = 0.0;
                      for (int a = 0; a < d; ++a) s += phi[a][i] * phi[a][i];
                      buf[i] = s;
                    }
                    g.forward(buf, s3);
                    if (c.A1 != 0.0) {
                      for (int l = 0; l < d; ++l)
                        for (int j = 0; j < d; ++j) {
                          for (std::size_t i = 0; i < g.spectral_size(); ++i)
                            tmp[i] = std::complex<double>(0.0, kTwoPi * g.wave(i)[j]) * in[l][i];
                          g.inverse(tmp, grad[l * d + j]);
                        }
                    }
                    for (int l = 0; l < d; ++l) {
                      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = phi[l][i] * phi[l][i];
                      g.forward(buf, s1);
                      if (c.A1 != 0.0) {
                        for (std::size_t i = 0; i < buf.size(); ++i) {
                          double s = 0.0;
                          for (int j = 0; j < d; ++j) s += phi[j][i] * grad[l * d + j][i];
                          buf[i] = s;
                        }
                        g.forward(buf, tmp);
                      }
                      for (std::size_t i = 0; i < g.spectral_size(); ++i) {
                        const std::complex<double> ikl(0.0, kTwoPi * g.wave(i)[l]);
                        nl[l][i] = c.A0 * ikl * s1[i] + c.A2 * ikl * s3[i] + (c.A1 != 0.0 ? c.A1 * tmp[i] : 0.0);
                      }
                    }
                    if (projected) {
                      for (std::size_t i = 0; i < g.spectral_size(); ++i) {
                        const auto k = g.wave(i);
                        double k2 = 0.0;
                        std::complex<double> kn = 0.0;
                        for (int a = 0; a < d; ++a) {
                          k2 += static_cast<double>(k[a]) * k[a];
                          kn += static_cast<double>(k[a]) * nl[a][i];
                        }
                        if (k2 == 0.0) continue;
                        for (int a = 0; a < d; ++a) nl[a][i] -= static_cast<double>(k[a]) * kn / k2;
                      }
                    }
                  }
                  for (int l = 0; l < d; ++l)
                    for (std::size_t i = 0; i < g.spectral_size(); ++i) {
                      if (!g.kept(i)) {
                        out[l][i] = 0.0;
                        continue;
                      }
                      const auto k = g.wave(i);
                      double k2 = 0.0;
                      for (int a = 0; a < d; ++a) k2 += static_cast<double>(k[a]) * k[a];
                      out[l][i] = (nonlinear ? nl[l][i] : 0.0) - (kTwoPi * kTwoPi * k2) * in[l][i];
                    }
                },
                {}};
  PdeResult r;
  it.after_step = [&](const State& s) { r.max_divergence = std::max(r.max_divergence, spectral_divergence(g, s, work)); };
  r.steps = it.run(u, T, h, r.max_mass_change);
  r.dt = T / static_cast<double>(r.steps);
  r.field = to_grid(g, u, phi0.n, d, phi0.t + T);
  return r;
}

PdeResult solve_full_hydro(const GridField& state0, const VelocitySet& vs, double stiffness, double T, double dt) {
  const int d = state0.d;
  if (vs.dim() != d) throw InvalidParameters("velocity set dimension does not match grid");
  if (static_cast<int>(state0.comp.size()) != d + 1) throw InvalidParameters("hydro state needs d+1 components");
  SpectralGrid g(state0.n, d);
  double v2 = 0.0;
  for (std::size_t s = 0; s < vs.size(); ++s)
    for (int k = 0; k < d; ++k) v2 += vs.component(s, k) * vs.component(s, k);
  const double h = pick_step(dt, stable_step(g.kmax2(), std::abs(stiffness) * (static_cast<double>(vs.size()) + v2) / 4.0));
  State u = to_spectral(g, state0);
  const std::size_t P = g.real_size();
  std::vector<std::vector<double>> fields(d + 1, std::vector<double>(P));
  // flux[a * d + j] = sum_v u_a v_j chi(theta_v), u = (1, v).
  std::vector<std::vector<double>> flux((d + 1) * d, std::vector<double>(P));
  std::vector<Spec> fluxhat((d + 1) * d, Spec(g.spectral_size()));
  Integrator it{g, [&](const State& in, State& out) {
                  for (int a = 0; a <= d; ++a) g.inverse(in[a], fields[a]);
                  if (stiffness != 0.0) {
                    HydroPoint hp;
                    hp.p.resize(d);
                    for (std::size_t i = 0; i < P; ++i) {
                      hp.rho = fields[0][i];
                      for (int k = 0; k < d; ++k) hp.p[k] = fields[k + 1][i];
                      const auto th = theta_all(lambda_of_hydro(hp, vs), vs);
                      for (auto& f : flux) f[i] = 0.0;
                      for (std::size_t s = 0; s < vs.size(); ++s) {
                        const double ch = chi(th[s]);
                        for (int a = 0; a <= d; ++a) {
                          const double ua = a == 0 ? 1.0 : vs.component(s, a - 1);
                          for (int j = 0; j < d; ++j) flux[a * d + j][i] += ua * vs.component(s, j) * ch;
                        }
                      }
                    }
                    for (std::size_t f = 0; f < flux.size(); ++f) g.forward(flux[f], fluxhat[f]);
                  }
                  for (int a = 0; a <= d; ++a)
                    for (std::size_t i = 0; i < g.spectral_size(); ++i) {
                      if (!g.kept(i)) {
                        out[a][i] = 0.0;
                        continue;
                      }
                      const auto k = g.wave(i);
                      double k2 = 0.0;
                      std::complex<double> div = 0.0;
                      for (int j = 0; j < d; ++j) {
                        k2 += static_cast<double>(k[j]) * k[j];
                        if (stiffness != 0.0) div += std::complex<double>(0.0, kTwoPi * k[j]) * fluxhat[a * d + j][i];
                      }
                      out[a][i] = -stiffness * div - (kTwoPi * kTwoPi * k2) * in[a][i];
                    }
                },
                {}};
  PdeResult r;
  r.steps = it.run(u, T, h, r.max_mass_change);
  r.dt = T / static_cast<double>(r.steps);
  r.field = to_grid(g, u, state0.n, d, state0.t + T);
  return r;
}

std::complex<double> grid_mode(const GridField& f, int component, std::span<const int> k) {
  if (static_cast<int>(k.size()) != f.d) throw InvalidParameters("mode has wrong dimension");
  std::complex<double> s = 0.0;
  const auto& v = f.comp.at(static_cast<std::size_t>(component));
  for (std::size_t i = 0; i < f.points(); ++i) {
    const auto u = f.position(i);
    double ph = 0.0;
    for (int a = 0; a < f.d; ++a) ph += k[a] * u[a];
    s += v[i] * std::polar(1.0, kTwoPi * ph);
  }
  return s / static_cast<double>(f.points());
}

} // namespace latgas
