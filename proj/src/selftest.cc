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

#include <algorithm>
#include <cmath>

#include "pepr/harness.h"
#include "pepr/oracle.h"

namespace pepr {

namespace {

StateVector random_coords(const Model& model, Rng& rng, int xi) {
  std::normal_distribution<double> normal(0.0, 1.0);
  StateVector s{Coords(static_cast<Eigen::Index>(model.dim())), xi};
  for (Eigen::Index i = 0; i < s.coords.size(); ++i) s.coords[i] = normal(rng);
  return s;
}

std::vector<double> random_controls(const Model& model, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(model.n_channels());
  for (double& x : c) x = normal(rng);
  return c;
}

ControlParams random_params(const Model& model, std::size_t n_modes, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ControlParams p(model.n_channels(), n_modes);
  for (double& x : p.flat()) x = normal(rng);
  return p;
}

Model random_model(std::size_t i, Rng& rng) {
  if (i % 2 == 0) return Model::hadamard();
  return Model::cnot(std::uniform_real_distribution<double>(0.0, 0.1)(rng));
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
  if (a.xi != b.xi) return std::numeric_limits<double>::infinity();
  return (a.coords - b.coords).cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<SelftestResult> run_selftest(std::uint64_t seed, std::size_t samples) {
  Rng rng(make_stream(seed, 0, 0));
  SelftestResult eom{"eom_rhs vs Lindblad", 0.0, 1e-12};
  SelftestResult maps{"perturbation maps vs commutator", 0.0, 1e-12};
  SelftestResult fid{"fidelity form vs trace", 0.0, 1e-12};
  for (std::size_t i = 0; i < samples; ++i) {
    const Model model = random_model(i, rng);
    for (int xi : {0, 1}) {
      const StateVector s = random_coords(model, rng, xi);
      const std::vector<double> c = random_controls(model, rng);
      const StateVector expected = oracle::from_matrix(oracle::lindblad_rhs(model, oracle::to_matrix(s), c));
      eom.max_error = std::max(eom.max_error, max_abs_diff({eom_rhs(model, s, c), 0}, expected));

      for (std::size_t j = 0; j < model.n_channels(); ++j) {
        oracle::Matrix m = oracle::commutator(model, j, oracle::to_matrix(s));
        if (model.kind() == ModelKind::kHadamard) m *= 0.5;
        maps.max_error = std::max(maps.max_error, max_abs_diff(perturbation_map(model, j, s), oracle::from_matrix(m)));
      }

      const StateVector initial = random_coords(model, rng, 1);
      const double f = fidelity(model, initial, s);
      const double f_ref = oracle::fidelity(model, oracle::to_matrix(initial), oracle::to_matrix(s));
      fid.max_error = std::max(fid.max_error, std::abs(f - f_ref));
    }
  }

  // Full propagation and the susceptibility use a coarse grid to stay fast.
  const IntegratorConfig integrator{8, 1.0};
  const std::size_t n_long = std::max<std::size_t>(1, samples / 50);
  SelftestResult prop{"propagation vs matrix RK4", 0.0, 1e-10};
  SelftestResult chi{"susceptibility vs unitary kick (relative)", 0.0, 1e-6};
  for (std::size_t i = 0; i < n_long; ++i) {
    const Model model = random_model(i, rng);
    const std::size_t n_modes = model.default_modes();
    const Propagator propagator(integrator, n_modes);
    const ControlParams params = random_params(model, n_modes, rng);
    const StateVector initial = sample_initial_state(model, rng);
    const oracle::Matrix m0 = oracle::to_matrix(initial);

    const StateVector final_state = propagator.propagate(model, params, initial, 0.0, 1.0);
    const oracle::Matrix m1 = oracle::propagate(model, params, m0, 0.0, 1.0, propagator.steps());
    prop.max_error = std::max(prop.max_error, max_abs_diff(final_state, oracle::from_matrix(m1)));

    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, model.n_channels() - 1)(rng);
    const std::size_t n_r = propagator.snap(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    const double t_r = propagator.time_at(n_r);
    RunLedger ledger;
    const double value = susceptibility(model, propagator, params, initial, j, t_r, ledger).chi;

    // The single-qubit probe is sigma_j / 2.
    const double scale = model.kind() == ModelKind::kHadamard ? 0.5 : 1.0;
    constexpr double kEps = 1e-4;
    const oracle::Matrix mid = oracle::propagate(model, params, m0, 0.0, t_r, n_r);
    auto kicked = [&](double eps) {
      const oracle::Matrix k = oracle::unitary_kick(model, mid, j, scale * eps);
      return oracle::fidelity(model, m0,
                              oracle::propagate(model, params, k, t_r, 1.0, propagator.steps() - n_r));
    };
    const double reference = (kicked(kEps) - kicked(-kEps)) / (2.0 * kEps);
    chi.max_error = std::max(chi.max_error, std::abs(value - reference) / std::max(std::abs(reference), 1e-3));
  }
  return {eom, maps, fid, prop, chi};
}

}  // namespace pepr
