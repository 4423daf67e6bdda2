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

#ifndef PEPR_PARAMETRIZATION_H_
#define PEPR_PARAMETRIZATION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace pepr {

/// Coefficient table theta_{j,k} of the sine-mode expansion
///
///   theta_j(t) = sum_k theta_{j,k} sin(pi k t / t_f),   k = 1..n_modes.
///
/// Channels and modes are indexed from zero in code; mode index `k` stores
/// the coefficient of sin(pi (k+1) t / t_f). Storage is channel-major.
class ControlParams {
 public:
  ControlParams() = default;
  ControlParams(std::size_t n_channels, std::size_t n_modes, double t_final = 1.0);

  /// Builds from one row of coefficients per channel. All rows must have the
  /// same length and all entries must be finite.
  static ControlParams from_rows(const std::vector<std::vector<double>>& rows, double t_final = 1.0);

  std::size_t n_channels() const { return n_channels_; }
  std::size_t n_modes() const { return n_modes_; }
  std::size_t size() const { return coeffs_.size(); }
  double t_final() const { return t_final_; }

  double& operator()(std::size_t j, std::size_t k) { return coeffs_[j * n_modes_ + k]; }
  double operator()(std::size_t j, std::size_t k) const { return coeffs_[j * n_modes_ + k]; }

  std::span<double> channel(std::size_t j);
  std::span<const double> channel(std::size_t j) const;
  std::span<double> flat() { return coeffs_; }
  std::span<const double> flat() const { return coeffs_; }

  bool all_finite() const;

  bool operator==(const ControlParams&) const = default;

 private:
  std::size_t n_channels_ = 0;
  std::size_t n_modes_ = 0;
  double t_final_ = 1.0;
  std::vector<double> coeffs_;
};

void to_json(nlohmann::json& out, const ControlParams& params);
void from_json(const nlohmann::json& in, ControlParams& params);

/// theta_j(t). Throws std::invalid_argument for j >= n_channels or t outside
/// [0, t_f].
double evaluate_control(const ControlParams& params, std::size_t j, double t);

/// Conjugate coefficient g_k(t_r) = (2/t_f) sin(pi (k+1) t_r / t_f) of the
/// delta-function decomposition in the sine basis.
double projection_coefficient(const ControlParams& params, std::size_t k, double t_r);

/// Which channels are bounded together. A Rabi pair (x, y) is bounded by
/// |h_x - i h_y| <= omega_max; a coupling channel by |J| <= j_max.
struct ChannelLayout {
  std::vector<std::pair<std::size_t, std::size_t>> rabi_pairs;
  std::vector<std::size_t> coupling_channels;
};

struct ConstraintSpec {
  std::optional<double> omega_max;
  std::optional<double> j_max;
  std::size_t grid_points = 4096;  // grid intervals; samples are grid_points + 1

  bool active() const { return omega_max.has_value() || j_max.has_value(); }
  /// Throws std::invalid_argument on negative bounds or grid_points < 256.
  void validate() const;
};

/// Sine modes sampled at t_i = i t_f / intervals, i = 0..intervals. Power-of-two
/// interval counts put t_f / 2, t_f / 4, ... exactly on the grid.
class ModeGrid {
 public:
  ModeGrid(std::size_t intervals, std::size_t n_modes, double t_final);

  std::size_t points() const { return points_; }
  std::size_t n_modes() const { return n_modes_; }
  double t_final() const { return t_final_; }
  double spacing() const { return t_final_ / static_cast<double>(points_ - 1); }

  /// Control value of channel j at grid point i.
  double control(const ControlParams& params, std::size_t j, std::size_t i) const;

 private:
  std::size_t points_;
  std::size_t n_modes_;
  double t_final_;
  std::vector<double> table_;  // [i * n_modes + k]
};

double max_rabi_amplitude(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                          const ModeGrid& grid);
double max_rabi_amplitude(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                          const ConstraintSpec& constraints);

double max_coupling_magnitude(const ControlParams& params, std::size_t channel, const ModeGrid& grid);

/// Trapezoid quadrature of |h_x - i h_y| over [0, t_f].
double pulse_area(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                  const ModeGrid& grid);
double pulse_area(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                  std::size_t grid_points = 4096);

/// Bounds of a ConstraintSpec bound to a channel layout and a sampled grid.
/// Construct once per trajectory; checks are then table lookups.
class ConstraintSet {
 public:
  ConstraintSet(ConstraintSpec spec, ChannelLayout layout, std::size_t n_modes, double t_final);

  const ConstraintSpec& spec() const { return spec_; }
  const ChannelLayout& layout() const { return layout_; }
  const ModeGrid& grid() const { return grid_; }

  /// True if every bounded amplitude stays within its bound on the grid,
  /// up to a relative slack of 1e-12 for rounding after a rescale.
  bool satisfied(const ControlParams& params) const;

  /// Divides each Rabi pair by max(1, max_t|Omega|/omega_max) and each
  /// coupling channel by max(1, max_t|J|/j_max).
  ControlParams rescale(const ControlParams& params) const;

 private:
  ConstraintSpec spec_;
  ChannelLayout layout_;
  ModeGrid grid_;
};

ControlParams rescale_to_constraints(const ControlParams& params, const ChannelLayout& layout,
                                     const ConstraintSpec& constraints);

}  // namespace pepr

#endif  // PEPR_PARAMETRIZATION_H_
