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

#include "pepr/optimizers.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pepr {

void PeprConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("PEPR learning rate must be positive");
  if (max_reject < 1) throw std::invalid_argument("max_reject must be >= 1");
  if (constraints) constraints->validate();
}

void GrapeConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("GRAPE learning rate must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite-difference length must be positive");
  if (constraints) constraints->validate();
}

double propagated_fidelity(const Model& model, const Propagator& propagator, const ControlTrack& track,
                           const StateVector& initial) {
  return fidelity(model, initial, propagator.propagate(model, track, initial, 0, propagator.steps()));
}

SusceptibilitySample susceptibility(const Model& model, const Propagator& propagator, const ControlTrack& track,
                                    const StateVector& initial, std::size_t j, std::size_t n_r,
                                    RunLedger& ledger) {
  if (initial.xi != 1) throw std::invalid_argument("susceptibility needs a unit-trace initial state");
  const StateVector response = propagator.propagate_with_kick(model, track, initial, j, n_r, ledger);
  return {j, propagator.time_at(n_r), fidelity(model, initial, response)};
}

SusceptibilitySample susceptibility(const Model& model, const Propagator& propagator,
                                    const ControlParams& params, const StateVector& initial, std::size_t j,
                                    double t_r, RunLedger& ledger) {
  return susceptibility(model, propagator, propagator.sample(params), initial, j, propagator.grid_index(t_r),
                        ledger);
}

ControlParams apply_pepr_update(const ControlParams& params, const SusceptibilitySample& sample, double alpha) {
  ControlParams out = params;
  auto row = out.channel(sample.j);
  for (std::size_t k = 0; k < row.size(); ++k) {
    row[k] -= alpha * std::sin(std::numbers::pi * static_cast<double>(k + 1) * sample.t_r / params.t_final()) *
              sample.chi;
  }
  return out;
}

PeprOptimizer::PeprOptimizer(Model model, const Propagator& propagator, PeprConfig cfg, std::size_t n_modes)
    : model_(model), propagator_(&propagator), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.constraints && cfg_.constraints->active()) {
    constraints_.emplace(*cfg_.constraints, model_.layout(), n_modes, propagator.config().t_final);
  }
}

PeprOutcome PeprOptimizer::step(const ControlParams& params, Rng& rng, RunLedger& ledger,
                                std::size_t attempt_cap) const {
  const ControlTrack track = propagator_->sample(params);
  std::uniform_int_distribution<std::size_t> pick_channel(0, model_.n_channels() - 1);
  std::uniform_real_distribution<double> pick_time(0.0, propagator_->config().t_final);

  PeprOutcome outcome{params, 0, false, std::nullopt};
  const std::size_t limit = std::min(cfg_.max_reject, attempt_cap);
  while (outcome.attempts < limit) {
    ++outcome.attempts;
    const StateVector initial = sample_initial_state(model_, rng, cfg_.normalize_states);
    const std::size_t j = pick_channel(rng);
    const std::size_t n_r = propagator_->snap(pick_time(rng));

    RunLedger attempt;
    const SusceptibilitySample probe = susceptibility(model_, *propagator_, track, initial, j, n_r, attempt);
    ControlParams candidate = apply_pepr_update(params, probe, cfg_.alpha);
    const bool ok = !constraints_ || constraints_->satisfied(candidate);
    if (ok || cfg_.count_rejected) ledger.add(attempt.count());
    if (ok) {
      outcome.params = std::move(candidate);
      outcome.accepted = true;
      outcome.sample = probe;
      break;
    }
  }
  return outcome;
}

std::vector<double> forward_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                                std::span<const double> x, double epsilon) {
  std::vector<double> point(x.begin(), x.end());
  const double base = loss(point);
  std::vector<double> gradient(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + epsilon;
    gradient[i] = (loss(point) - base) / epsilon;
    point[i] = saved;
  }
  return gradient;
}

std::vector<double> grape_gradient(const Model& model, const Propagator& propagator, const ControlParams& params,
                                   const GrapeConfig& cfg, const StateVector& initial, RunLedger& ledger) {
  if (initial.xi != 1) throw std::invalid_argument("GRAPE needs a unit-trace initial state");
  ControlParams shifted = params;
  auto loss = [&](std::span<const double> theta) {
    std::copy(theta.begin(), theta.end(), shifted.flat().begin());
    ledger.add(1);
    return 1.0 - propagated_fidelity(model, propagator, propagator.sample(shifted), initial);
  };
  return forward_difference_gradient(loss, params.flat(), cfg.epsilon);
}

ControlParams apply_gradient_step(const ControlParams& params, std::span<const double> gradient, double alpha) {
  if (gradient.size() != params.size()) throw std::invalid_argument("gradient size does not match params");
  ControlParams out = params;
  auto theta = out.flat();
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= alpha * gradient[i];
  return out;
}

GrapeOptimizer::GrapeOptimizer(Model model, const Propagator& propagator, GrapeConfig cfg, std::size_t n_modes)
    : model_(model), propagator_(&propagator), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.constraints && cfg_.constraints->active()) {
    constraints_.emplace(*cfg_.constraints, model_.layout(), n_modes, propagator.config().t_final);
  }
}

ControlParams GrapeOptimizer::step(const ControlParams& params, Rng& rng, RunLedger& ledger) const {
  const StateVector initial = sample_initial_state(model_, rng, cfg_.normalize_states);
  const std::vector<double> gradient = grape_gradient(model_, *propagator_, params, cfg_, initial, ledger);
  ControlParams next = apply_gradient_step(params, gradient, cfg_.alpha);
  if (constraints_) next = constraints_->rescale(next);
  return next;
}

ControlParams sample_initial_params(const Model& model, std::size_t n_modes, Rng& rng,
                                    const std::optional<ConstraintSpec>& constraints, double t_final) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ControlParams params(model.n_channels(), n_modes, t_final);
  for (double& c : params.flat()) c = normal(rng);
  if (constraints && constraints->active()) params = rescale_to_constraints(params, model.layout(), *constraints);
  return params;
}

}  // namespace pepr
