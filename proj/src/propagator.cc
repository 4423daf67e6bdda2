// Copyright 2026 The pepr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pepr/propagator.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pepr {

namespace {

// Classic RK4 on a fixed-size buffer. `rhs(y, controls, dy)` evaluates the
// vector field with the controls sampled at the matching half-step.
template <std::size_t D, typename Rhs>
void rk4(std::array<double, D>& y, const ControlTrack& track, std::size_t n0, std::size_t n1, double h,
         const Rhs& rhs) {
  std::array<double, D> k1, k2, k3, k4, tmp;
  const double half = 0.5 * h;
  const double sixth = h / 6.0;
  for (std::size_t n = n0; n < n1; ++n) {
    const double* c0 = track.at(2 * n);
    const double* c_mid = track.at(2 * n + 1);
    const double* c1 = track.at(2 * n + 2);
    rhs(y.data(), c0, k1.data());
    for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + half * k1[i];
    rhs(tmp.data(), c_mid, k2.data());
    for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + half * k2[i];
    rhs(tmp.data(), c_mid, k3.data());
    for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp.data(), c1, k4.data());
    for (std::size_t i = 0; i < D; ++i) y[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
  }
}

template <std::size_t D, typename Rhs>
void integrate(StateVector& state, const ControlTrack& track, std::size_t n0, std::size_t n1, double h,
               const Rhs& rhs) {
  std::array<double, D> y;
  std::copy(state.coords.data(), state.coords.data() + D, y.begin());
  rk4<D>(y, track, n0, n1, h, rhs);
  std::copy(y.begin(), y.end(), state.coords.data());
}

}  // namespace

void IntegratorConfig::validate() const {
  if (steps_pow2 < 6 || steps_pow2 > 24) {
    throw std::invalid_argument("steps_pow2 must lie in [6, 24], got " + std::to_string(steps_pow2));
  }
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("t_f must be positive");
}

Propagator::Propagator(IntegratorConfig cfg, std::size_t n_modes) : cfg_(cfg), n_modes_(n_modes) {
  cfg_.validate();
  const std::size_t half_points = 2 * cfg_.steps() + 1;
  const double half_step = 0.5 * cfg_.step_size();
  basis_.resize(half_points * n_modes_);
  for (std::size_t m = 0; m < half_points; ++m) {
    const double t = static_cast<double>(m) * half_step;
    for (std::size_t k = 0; k < n_modes_; ++k) {
      basis_[m * n_modes_ + k] = std::sin(std::numbers::pi * static_cast<double>(k + 1) * t / cfg_.t_final);
    }
  }
}

std::size_t Propagator::grid_index(double t) const {
  const double x = t / cfg_.step_size();
  const double n = std::round(x);
  if (n < 0.0 || n > static_cast<double>(steps()) || std::abs(x - n) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument("time " + std::to_string(t) + " is not on the integration grid");
  }
  return static_cast<std::size_t>(n);
}

std::size_t Propagator::snap(double t) const {
  const double n = std::round(t / cfg_.step_size());
  if (!(n >= 0.0)) return 0;
  return std::min(static_cast<std::size_t>(n), steps());
}

ControlTrack Propagator::sample(const ControlParams& params) const {
  if (params.n_modes() != n_modes_) {
    throw std::invalid_argument("propagator built for " + std::to_string(n_modes_) + " modes, params have " +
                                std::to_string(params.n_modes()));
  }
  if (params.t_final() != cfg_.t_final) throw std::invalid_argument("params t_f differs from integrator t_f");
  ControlTrack track(params.n_channels(), 2 * steps() + 1);
  for (std::size_t m = 0; m < track.n_half_points(); ++m) {
    const double* basis = &basis_[m * n_modes_];
    double* out = track.at(m);
    for (std::size_t j = 0; j < params.n_channels(); ++j) {
      auto row = params.channel(j);
      double value = 0.0;
      for (std::size_t k = 0; k < n_modes_; ++k) value += row[k] * basis[k];
      out[j] = value;
    }
  }
  return track;
}

ControlTrack Propagator::sample(std::size_t n_channels, const ControlFunction& controls) const {
  ControlTrack track(n_channels, 2 * steps() + 1);
  const double half_step = 0.5 * cfg_.step_size();
  for (std::size_t m = 0; m < track.n_half_points(); ++m) {
    controls(static_cast<double>(m) * half_step, std::span<double>(track.at(m), n_channels));
  }
  return track;
}

StateVector Propagator::propagate(const Model& model, const ControlTrack& track, StateVector state,
                                  std::size_t n0, std::size_t n1) const {
  if (state.dim() != model.dim()) throw std::invalid_argument("state dimension does not match model");
  if (track.n_channels() != model.n_channels() || track.n_half_points() != 2 * steps() + 1) {
    throw std::invalid_argument("control track does not match model and grid");
  }
  if (n0 > n1 || n1 > steps()) throw std::invalid_argument("propagation interval outside [0, t_f]");
  const double h = cfg_.step_size();
  if (model.kind() == ModelKind::kHadamard) {
    integrate<3>(state, track, n0, n1, h,
                 [](const double* y, const double* c, double* dy) { detail::hadamard_rhs(y, c, dy); });
  } else {
    const double xi = state.xi;
    const double gamma = model.gamma_z();
    integrate<15>(state, track, n0, n1, h, [xi, gamma](const double* y, const double* c, double* dy) {
      detail::cnot_rhs(y, xi, c, gamma, dy);
    });
  }
  return state;
}

StateVector Propagator::propagate(const Model& model, const ControlParams& params, StateVector state, double t0,
                                  double t1) const {
  const std::size_t n0 = grid_index(t0);
  const std::size_t n1 = grid_index(t1);
  return propagate(model, sample(params), std::move(state), n0, n1);
}

StateVector Propagator::propagate_with_kick(const Model& model, const ControlTrack& track,
                                            const StateVector& initial, std::size_t j, std::size_t n_r,
                                            RunLedger& ledger) const {
  StateVector at_probe = propagate(model, track, initial, 0, n_r);
  StateVector kicked = perturbation_map(model, j, at_probe);
  StateVector out = propagate(model, track, std::move(kicked), n_r, steps());
  ledger.add(1);
  return out;
}

StateVector Propagator::propagate_with_kick(const Model& model, const ControlParams& params,
                                            const StateVector& initial, std::size_t j, double t_r,
                                            RunLedger& ledger) const {
  return propagate_with_kick(model, sample(params), initial, j, grid_index(t_r), ledger);
}

}  // namespace pepr
