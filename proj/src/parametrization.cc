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

#include "pepr/parametrization.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pepr {

namespace {

constexpr double kTimeSlack = 1e-12;
constexpr double kBoundSlack = 1e-12;

void check_time(double t, double t_final) {
  if (!(t >= -kTimeSlack * t_final && t <= t_final * (1.0 + kTimeSlack))) {
    throw std::invalid_argument("time " + std::to_string(t) + " outside [0, " +
                                std::to_string(t_final) + "]");
  }
}

double sine_mode(std::size_t k, double t, double t_final) {
  return std::sin(std::numbers::pi * static_cast<double>(k + 1) * t / t_final);
}

}  // namespace

ControlParams::ControlParams(std::size_t n_channels, std::size_t n_modes, double t_final)
    : n_channels_(n_channels), n_modes_(n_modes), t_final_(t_final), coeffs_(n_channels * n_modes, 0.0) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_f must be positive and finite");
  }
}

ControlParams ControlParams::from_rows(const std::vector<std::vector<double>>& rows, double t_final) {
  const std::size_t n_modes = rows.empty() ? 0 : rows.front().size();
  ControlParams params(rows.size(), n_modes, t_final);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != n_modes) {
      throw std::invalid_argument("all channels must have the same number of modes");
    }
    std::copy(rows[j].begin(), rows[j].end(), params.channel(j).begin());
  }
  if (!params.all_finite()) {
    throw std::invalid_argument("control coefficients must be finite");
  }
  return params;
}

std::span<double> ControlParams::channel(std::size_t j) {
  return std::span<double>(coeffs_).subspan(j * n_modes_, n_modes_);
}

std::span<const double> ControlParams::channel(std::size_t j) const {
  return std::span<const double>(coeffs_).subspan(j * n_modes_, n_modes_);
}

bool ControlParams::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](double v) { return std::isfinite(v); });
}

void to_json(nlohmann::json& out, const ControlParams& params) {
  auto coeffs = nlohmann::json::array();
  for (std::size_t j = 0; j < params.n_channels(); ++j) {
    auto row = params.channel(j);
    coeffs.push_back(std::vector<double>(row.begin(), row.end()));
  }
  out = nlohmann::json{{"t_f", params.t_final()}, {"coeffs", std::move(coeffs)}};
}

void from_json(const nlohmann::json& in, ControlParams& params) {
  params = ControlParams::from_rows(in.at("coeffs").get<std::vector<std::vector<double>>>(),
                                    in.value("t_f", 1.0));
}

double evaluate_control(const ControlParams& params, std::size_t j, double t) {
  if (j >= params.n_channels()) {
    throw std::invalid_argument("channel index " + std::to_string(j) + " out of range");
  }
  check_time(t, params.t_final());
  double value = 0.0;
  auto row = params.channel(j);
  for (std::size_t k = 0; k < row.size(); ++k) {
    value += row[k] * sine_mode(k, t, params.t_final());
  }
  return value;
}

double projection_coefficient(const ControlParams& params, std::size_t k, double t_r) {
  if (k >= params.n_modes()) {
    throw std::invalid_argument("mode index " + std::to_string(k) + " out of range");
  }
  check_time(t_r, params.t_final());
  return 2.0 / params.t_final() * sine_mode(k, t_r, params.t_final());
}

void ConstraintSpec::validate() const {
  if (omega_max && !(*omega_max >= 0.0)) throw std::invalid_argument("omega_max must be >= 0");
  if (j_max && !(*j_max >= 0.0)) throw std::invalid_argument("j_max must be >= 0");
  if (grid_points < 256) throw std::invalid_argument("constraint grid needs at least 256 intervals");
}

ModeGrid::ModeGrid(std::size_t intervals, std::size_t n_modes, double t_final)
    : points_(intervals + 1), n_modes_(n_modes), t_final_(t_final), table_(points_ * n_modes) {
  if (intervals < 1) throw std::invalid_argument("mode grid needs at least one interval");
  for (std::size_t i = 0; i < points_; ++i) {
    const double t = static_cast<double>(i) * t_final / static_cast<double>(intervals);
    for (std::size_t k = 0; k < n_modes; ++k) {
      table_[i * n_modes + k] = sine_mode(k, t, t_final);
    }
  }
}

double ModeGrid::control(const ControlParams& params, std::size_t j, std::size_t i) const {
  auto row = params.channel(j);
  const double* basis = &table_[i * n_modes_];
  double value = 0.0;
  for (std::size_t k = 0; k < n_modes_; ++k) value += row[k] * basis[k];
  return value;
}

double max_rabi_amplitude(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                          const ModeGrid& grid) {
  double best = 0.0;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    best = std::max(best, std::hypot(grid.control(params, x_channel, i), grid.control(params, y_channel, i)));
  }
  return best;
}

double max_rabi_amplitude(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                          const ConstraintSpec& constraints) {
  constraints.validate();
  return max_rabi_amplitude(params, x_channel, y_channel,
                            ModeGrid(constraints.grid_points, params.n_modes(), params.t_final()));
}

double max_coupling_magnitude(const ControlParams& params, std::size_t channel, const ModeGrid& grid) {
  double best = 0.0;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    best = std::max(best, std::abs(grid.control(params, channel, i)));
  }
  return best;
}

double pulse_area(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                  const ModeGrid& grid) {
  double sum = 0.0;
  double previous = 0.0;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const double amplitude = std::hypot(grid.control(params, x_channel, i), grid.control(params, y_channel, i));
    if (i > 0) sum += 0.5 * (previous + amplitude);
    previous = amplitude;
  }
  return sum * grid.spacing();
}

double pulse_area(const ControlParams& params, std::size_t x_channel, std::size_t y_channel,
                  std::size_t grid_points) {
  return pulse_area(params, x_channel, y_channel, ModeGrid(grid_points, params.n_modes(), params.t_final()));
}

ConstraintSet::ConstraintSet(ConstraintSpec spec, ChannelLayout layout, std::size_t n_modes, double t_final)
    : spec_(spec), layout_(std::move(layout)), grid_(spec.grid_points, n_modes, t_final) {
  spec_.validate();
}

bool ConstraintSet::satisfied(const ControlParams& params) const {
  if (spec_.omega_max) {
    const double bound = *spec_.omega_max * (1.0 + kBoundSlack);
    for (auto [x, y] : layout_.rabi_pairs) {
      for (std::size_t i = 0; i < grid_.points(); ++i) {
        const double hx = grid_.control(params, x, i);
        const double hy = grid_.control(params, y, i);
        if (hx * hx + hy * hy > bound * bound) return false;
      }
    }
  }
  if (spec_.j_max) {
    const double bound = *spec_.j_max * (1.0 + kBoundSlack);
    for (auto j : layout_.coupling_channels) {
      if (max_coupling_magnitude(params, j, grid_) > bound) return false;
    }
  }
  return true;
}

ControlParams ConstraintSet::rescale(const ControlParams& params) const {
  ControlParams out = params;
  auto scale_channel = [&out](std::size_t j, double factor) {
    for (double& c : out.channel(j)) c /= factor;
  };
  if (spec_.omega_max) {
    for (auto [x, y] : layout_.rabi_pairs) {
      const double factor = std::max(1.0, max_rabi_amplitude(params, x, y, grid_) / *spec_.omega_max);
      scale_channel(x, factor);
      scale_channel(y, factor);
    }
  }
  if (spec_.j_max) {
    for (auto j : layout_.coupling_channels) {
      scale_channel(j, std::max(1.0, max_coupling_magnitude(params, j, grid_) / *spec_.j_max));
    }
  }
  return out;
}

ControlParams rescale_to_constraints(const ControlParams& params, const ChannelLayout& layout,
                                     const ConstraintSpec& constraints) {
  return ConstraintSet(constraints, layout, params.n_modes(), params.t_final()).rescale(params);
}

}  // namespace pepr
