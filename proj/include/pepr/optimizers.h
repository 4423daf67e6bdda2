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

#ifndef PEPR_OPTIMIZERS_H_
#define PEPR_OPTIMIZERS_H_

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pepr/models.h"
#include "pepr/parametrization.h"
#include "pepr/propagator.h"
#include "pepr/random.h"

namespace pepr {

/// `alpha` is the effective rate of the sine-basis update; the bare rate of
/// the generic rule is alpha_0 = alpha * t_f / 2.
struct PeprConfig {
  double alpha = 0.5;
  std::optional<ConstraintSpec> constraints;
  std::size_t max_reject = 1000;
  /// Rejected constrained candidates still cost a time evolution; set to
  /// false to leave them out of the ledger.
  bool count_rejected = true;
  bool normalize_states = true;

  void validate() const;
};

struct GrapeConfig {
  double alpha = 1.2;
  double epsilon = 1e-7;
  std::optional<ConstraintSpec> constraints;
  bool normalize_states = true;

  void validate() const;
};

/// One probe of the fidelity's linear response to a delta kick of B_j.
struct SusceptibilitySample {
  std::size_t j = 0;
  double t_r = 0.0;
  double chi = 0.0;
};

/// Fidelity of the propagated state, Tr(rho(t_f) V rho(0) V^dag). Does not
/// touch any ledger.
double propagated_fidelity(const Model& model, const Propagator& propagator, const ControlTrack& track,
                           const StateVector& initial);

/// chi_j(t_r) = Tr(V rho(0) V^dag U(t_r, t_f) i[B_j, rho(t_r)] U^dag(t_r, t_f)),
/// the response of F to H_p = -eps delta(t - t_r) B_j. Costs one run.
SusceptibilitySample susceptibility(const Model& model, const Propagator& propagator, const ControlTrack& track,
                                    const StateVector& initial, std::size_t j, std::size_t n_r,
                                    RunLedger& ledger);
SusceptibilitySample susceptibility(const Model& model, const Propagator& propagator,
                                    const ControlParams& params, const StateVector& initial, std::size_t j,
                                    double t_r, RunLedger& ledger);

/// theta_{j,k} -> theta_{j,k} - alpha sin(pi (k+1) t_r / t_f) chi for every
/// mode of channel sample.j; other channels are untouched.
ControlParams apply_pepr_update(const ControlParams& params, const SusceptibilitySample& sample, double alpha);

struct PeprOutcome {
  ControlParams params;
  std::size_t attempts = 0;
  bool accepted = false;
  std::optional<SusceptibilitySample> sample;
};

class PeprOptimizer {
 public:
  PeprOptimizer(Model model, const Propagator& propagator, PeprConfig cfg, std::size_t n_modes);

  const PeprConfig& config() const { return cfg_; }
  const std::optional<ConstraintSet>& constraints() const { return constraints_; }

  /// One update. Each attempt draws rho(0), then j, then t_r (snapped to the
  /// grid) from `rng`. A candidate violating the constraints is discarded and
  /// a fresh draw is made, for at most min(max_reject, attempt_cap) attempts;
  /// if none is accepted the outcome carries the unchanged params.
  PeprOutcome step(const ControlParams& params, Rng& rng, RunLedger& ledger,
                   std::size_t attempt_cap = std::numeric_limits<std::size_t>::max()) const;

 private:
  Model model_;
  const Propagator* propagator_;
  PeprConfig cfg_;
  std::optional<ConstraintSet> constraints_;
};

/// Forward differences (loss(x + eps e_i) - loss(x)) / eps for every i.
/// Calls `loss` exactly size(x) + 1 times, base point first.
std::vector<double> forward_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                                std::span<const double> x, double epsilon);

/// Forward-difference gradient of L = 1 - F for one shared initial state, in
/// channel-major order (index j * n_modes + k). Adds n_channels * n_modes + 1
/// runs to the ledger.
std::vector<double> grape_gradient(const Model& model, const Propagator& propagator, const ControlParams& params,
                                   const GrapeConfig& cfg, const StateVector& initial, RunLedger& ledger);

/// theta -> theta - alpha * gradient.
ControlParams apply_gradient_step(const ControlParams& params, std::span<const double> gradient, double alpha);

class GrapeOptimizer {
 public:
  GrapeOptimizer(Model model, const Propagator& propagator, GrapeConfig cfg, std::size_t n_modes);

  const GrapeConfig& config() const { return cfg_; }

  /// Draws one initial state shared by all shifted evaluations, takes a
  /// gradient step, and rescales into the constraints if any are set.
  ControlParams step(const ControlParams& params, Rng& rng, RunLedger& ledger) const;

 private:
  Model model_;
  const Propagator* propagator_;
  GrapeConfig cfg_;
  std::optional<ConstraintSet> constraints_;
};

/// theta_{j,k} ~ N(0, 1), rescaled into the constraints when given.
ControlParams sample_initial_params(const Model& model, std::size_t n_modes, Rng& rng,
                                    const std::optional<ConstraintSpec>& constraints = std::nullopt,
                                    double t_final = 1.0);

}  // namespace pepr

#endif  // PEPR_OPTIMIZERS_H_
