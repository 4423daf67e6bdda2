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

#ifndef PEPR_PROPAGATOR_H_
#define PEPR_PROPAGATOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pepr/models.h"
#include "pepr/parametrization.h"

namespace pepr {

/// Fixed-step RK4 with h = t_f / 2^steps_pow2.
struct IntegratorConfig {
  int steps_pow2 = 14;
  double t_final = 1.0;

  std::size_t steps() const { return std::size_t{1} << steps_pow2; }
  double step_size() const { return t_final / static_cast<double>(steps()); }
  /// Throws std::invalid_argument unless steps_pow2 in [6, 24] and t_f > 0.
  void validate() const;
};

/// Number of full-span time evolutions spent by one optimization trajectory.
class RunLedger {
 public:
  void add(std::uint64_t runs = 1) { count_ += runs; }
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_ = 0;
};

/// Control values sampled at every RK4 node and midpoint: half-step index m
/// corresponds to t = m h / 2, m = 0..2N.
class ControlTrack {
 public:
  ControlTrack(std::size_t n_channels, std::size_t n_half_points)
      : n_channels_(n_channels), n_half_points_(n_half_points), values_(n_channels * n_half_points) {}

  std::size_t n_channels() const { return n_channels_; }
  std::size_t n_half_points() const { return n_half_points_; }
  const double* at(std::size_t m) const { return &values_[m * n_channels_]; }
  double* at(std::size_t m) { return &values_[m * n_channels_]; }

 private:
  std::size_t n_channels_;
  std::size_t n_half_points_;
  std::vector<double> values_;
};

/// Integrates StateVectors on the shared grid t_n = n h. Immutable after
/// construction and safe to share between threads.
class Propagator {
 public:
  using ControlFunction = std::function<void(double t, std::span<double> out)>;

  Propagator(IntegratorConfig cfg, std::size_t n_modes);

  const IntegratorConfig& config() const { return cfg_; }
  std::size_t steps() const { return cfg_.steps(); }
  double step_size() const { return cfg_.step_size(); }
  double time_at(std::size_t n) const { return static_cast<double>(n) * cfg_.step_size(); }

  /// Grid index of t; throws std::invalid_argument if t is not a grid point.
  std::size_t grid_index(double t) const;
  /// Nearest grid index to t in [0, t_f].
  std::size_t snap(double t) const;

  ControlTrack sample(const ControlParams& params) const;
  /// Samples an arbitrary control function (testing and custom drives).
  ControlTrack sample(std::size_t n_channels, const ControlFunction& controls) const;

  StateVector propagate(const Model& model, const ControlTrack& track, StateVector state, std::size_t n0,
                        std::size_t n1) const;
  StateVector propagate(const Model& model, const ControlParams& params, StateVector state, double t0,
                        double t1) const;

  /// propagate(n_r -> N) . i[B_j, .] . propagate(0 -> n_r) applied to
  /// `initial`. Adds one run to `ledger`.
  StateVector propagate_with_kick(const Model& model, const ControlTrack& track, const StateVector& initial,
                                  std::size_t j, std::size_t n_r, RunLedger& ledger) const;
  StateVector propagate_with_kick(const Model& model, const ControlParams& params, const StateVector& initial,
                                  std::size_t j, double t_r, RunLedger& ledger) const;

 private:
  IntegratorConfig cfg_;
  std::size_t n_modes_;
  std::vector<double> basis_;  // sin(pi (k+1) t_m / t_f), [m * n_modes + k]
};

}  // namespace pepr

#endif  // PEPR_PROPAGATOR_H_
