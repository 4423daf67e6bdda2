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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pepr/harness.h"

namespace {

using pepr::ConfigError;
using pepr::ExperimentConfig;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> model;
  std::optional<std::string> method;
  std::optional<std::size_t> n_modes;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<std::size_t> n_traj;
  std::optional<std::size_t> n_fid;
  std::optional<std::uint64_t> max_runs;
  std::optional<int> steps_pow2;
  std::optional<double> gamma_z;
  std::optional<double> omega_max;
  std::optional<double> j_max;
  std::optional<std::uint64_t> seed;
  std::optional<double> checkpoint_ratio;
  std::optional<std::size_t> max_reject;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> threads;
  bool every_step = false;
  bool no_count_rejected = false;
  bool no_normalize = false;
  bool full_scale = false;
};

void add_experiment_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON file with ExperimentConfig fields");
  app->add_option("--model", o.model, "hadamard or cnot");
  app->add_option("--method", o.method, "pepr or grape");
  app->add_option("--n-modes", o.n_modes, "sine modes per channel");
  app->add_option("--alpha", o.alpha, "learning rate");
  app->add_option("--epsilon", o.epsilon, "GRAPE finite-difference length");
  app->add_option("--n-traj", o.n_traj, "trajectories in the ensemble");
  app->add_option("--n-fid", o.n_fid, "initial states per fidelity estimate");
  app->add_option("--max-runs", o.max_runs, "N_run budget per trajectory");
  app->add_option("--steps-pow2", o.steps_pow2, "integrator steps = 2^p");
  app->add_option("--gamma-z", o.gamma_z, "dephasing rate (cnot only)");
  app->add_option("--omega-max", o.omega_max, "Rabi amplitude bound");
  app->add_option("--j-max", o.j_max, "coupling bound");
  app->add_option("--seed", o.seed, "experiment seed");
  app->add_option("--checkpoint-ratio", o.checkpoint_ratio, "geometric checkpoint spacing");
  app->add_option("--max-reject", o.max_reject, "PEPR rejections per step before giving up");
  app->add_option("-o,--output-dir", o.output_dir, "output directory");
  app->add_option("--threads", o.threads, "worker threads (0: all cores)");
  app->add_flag("--every-step", o.every_step, "checkpoint after every optimizer step");
  app->add_flag("--no-count-rejected", o.no_count_rejected, "rejected PEPR attempts do not use up the budget");
  app->add_flag("--no-normalize", o.no_normalize, "keep Gaussian initial Bloch vectors unnormalized");
  app->add_flag("--full-scale", o.full_scale, "100 trajectories, 2^14 integrator steps");
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig cfg = o.config ? pepr::load_config(*o.config) : ExperimentConfig{};
  if (o.full_scale) cfg.apply_full_scale();
  if (o.model) cfg.model = *o.model;
  if (o.method) cfg.method = pepr::method_from_string(*o.method);
  if (o.n_modes) cfg.n_modes = *o.n_modes;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.n_traj) cfg.n_traj = *o.n_traj;
  if (o.n_fid) cfg.n_fid = *o.n_fid;
  if (o.max_runs) cfg.max_runs = *o.max_runs;
  if (o.steps_pow2) cfg.steps_pow2 = *o.steps_pow2;
  if (o.gamma_z) cfg.gamma_z = *o.gamma_z;
  if (o.omega_max) cfg.omega_max = *o.omega_max;
  if (o.j_max) cfg.j_max = *o.j_max;
  if (o.seed) cfg.seed = *o.seed;
  if (o.checkpoint_ratio) cfg.checkpoint_ratio = *o.checkpoint_ratio;
  if (o.every_step) cfg.checkpoint_ratio = 1.0;
  if (o.max_reject) cfg.max_reject = *o.max_reject;
  if (o.no_count_rejected) cfg.count_rejected = false;
  if (o.no_normalize) cfg.normalize_states = false;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

void print_final(const pepr::ExperimentResult& result) {
  const pepr::SummaryRow& last = result.summary.back();
  std::printf("%s %s: N_run=%llu log_mean=%.3f min=%.3g max=%.3g clamped=%zu\n", result.config.model.c_str(),
              pepr::to_string(result.config.method).c_str(), static_cast<unsigned long long>(last.n_run),
              last.log_mean_infidelity, last.min_infidelity, last.max_infidelity, last.n_clamped);
}

int run_optimize(const Overrides& o) {
  const ExperimentConfig cfg = build_config(o);
  const pepr::ExperimentResult result = pepr::run_experiment(cfg);
  pepr::write_experiment(result, cfg.output_dir);
  print_final(result);
  return kOk;
}

int run_sweep(const Overrides& o, pepr::SweepParameter parameter, const std::vector<double>& values) {
  const ExperimentConfig cfg = build_config(o);
  const auto points = pepr::run_sweep(cfg, parameter, values);
  for (const auto& p : points) {
    std::printf("value=%g ", p.value);
    print_final(p.result);
  }
  return kOk;
}

struct TraceOptions {
  std::string params_path;
  std::optional<std::string> model;
  std::optional<std::size_t> trajectory;
  std::vector<std::string> states;
  int steps_pow2 = 12;
  std::size_t stride = 0;
  std::string output = "trace.csv";
};

// Accepts a bare ControlParams document or the params.json of an experiment
// (picks `trajectory`, or the lowest final infidelity, and fills in the
// model name if none was given).
pepr::ControlParams load_params(TraceOptions& t) {
  std::ifstream in(t.params_path);
  if (!in) throw ConfigError("cannot open params file " + t.params_path);
  nlohmann::json j;
  try {
    in >> j;
    if (!j.contains("trajectories")) return j.get<pepr::ControlParams>();
    if (!t.model) t.model = j.at("config").at("model").get<std::string>();
    const auto& list = j.at("trajectories");
    if (list.empty()) throw ConfigError("params file holds no trajectories");
    std::size_t pick = 0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (t.trajectory ? list[i].at("trajectory_id").get<std::size_t>() == *t.trajectory
                       : list[i].at("final_infidelity").get<double>() <
                             list[pick].at("final_infidelity").get<double>()) {
        pick = i;
      }
    }
    if (t.trajectory && list[pick].at("trajectory_id").get<std::size_t>() != *t.trajectory) {
      throw ConfigError("trajectory not found in params file");
    }
    return list[pick].at("params").get<pepr::ControlParams>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed params file: " + std::string(e.what()));
  }
}

int run_trace(TraceOptions t) {
  pepr::Model model = pepr::Model::hadamard();
  std::vector<pepr::StateVector> states;
  pepr::ControlParams params;
  try {
    params = load_params(t);
    model = pepr::Model::from_name(t.model.value_or("cnot"));
    if (params.n_channels() != model.n_channels()) throw ConfigError("params do not match the model");
    if (t.states.empty()) {
      t.states = model.n_qubits() == 1 ? std::vector<std::string>{"0", "1"}
                                       : std::vector<std::string>{"00", "01", "10", "11"};
    }
    for (const std::string& s : t.states) states.push_back(pepr::basis_state(model, s));
    pepr::IntegratorConfig{t.steps_pow2, params.t_final()}.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto trace =
      pepr::emit_protocol_trace(model, params, states, pepr::IntegratorConfig{t.steps_pow2, params.t_final()}, t.stride);
  pepr::write_protocol_trace(trace, t.output);
  std::printf("wrote %zu rows to %s; pulse areas:", trace.rows.size(), t.output.c_str());
  for (double a : trace.pulse_areas) std::printf(" %.6g", a);
  std::printf("\n");
  return kOk;
}

int run_selftest(std::uint64_t seed, std::size_t samples) {
  bool ok = true;
  for (const auto& r : pepr::run_selftest(seed, samples)) {
    std::printf("%-4s %-45s max_error=%.3e tol=%.1e\n", r.passed() ? "ok" : "FAIL", r.name.c_str(), r.max_error,
                r.tolerance);
    ok = ok && r.passed();
  }
  return ok ? kOk : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse optimization by projected response functions, with a GRAPE baseline"};
  app.require_subcommand(1);

  Overrides optimize_o, constraint_o, dissipation_o, modes_o;
  auto* optimize = app.add_subcommand("optimize", "run one ensemble experiment");
  add_experiment_options(optimize, optimize_o);

  std::vector<double> omega_values{1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.7, 2.8, 3.0, 3.2};
  auto* sweep_c = app.add_subcommand("sweep-constraints", "sweep Omega_max t_f with J_max = Omega_max");
  add_experiment_options(sweep_c, constraint_o);
  sweep_c->add_option("--values", omega_values, "bounds to sweep")->delimiter(',');

  std::vector<double> gamma_values{1e-3, 1e-2};
  auto* sweep_d = app.add_subcommand("sweep-dissipation", "sweep the dephasing rate");
  add_experiment_options(sweep_d, dissipation_o);
  sweep_d->add_option("--values", gamma_values, "rates to sweep")->delimiter(',');

  std::vector<double> mode_values{1, 2, 4, 8};
  auto* sweep_m = app.add_subcommand("sweep-modes", "sweep the number of sine modes");
  add_experiment_options(sweep_m, modes_o);
  sweep_m->add_option("--values", mode_values, "mode counts to sweep")->delimiter(',');

  TraceOptions trace_o;
  auto* trace = app.add_subcommand("trace", "write the time series of a protocol");
  trace->add_option("-p,--params", trace_o.params_path, "ControlParams JSON or an experiment's params.json")
      ->required();
  trace->add_option("--model", trace_o.model, "hadamard or cnot (default: from params.json, else cnot)");
  trace->add_option("--trajectory", trace_o.trajectory, "trajectory id (default: best)");
  trace->add_option("--states", trace_o.states, "computational basis initial states (default: all)")->delimiter(',');
  trace->add_option("--steps-pow2", trace_o.steps_pow2, "integrator steps = 2^p");
  trace->add_option("--stride", trace_o.stride, "grid points per row (0: auto)");
  trace->add_option("-o,--output", trace_o.output, "CSV path");

  std::uint64_t selftest_seed = 1;
  std::size_t selftest_samples = 1000;
  auto* selftest = app.add_subcommand("selftest", "compare the vector kernels with the matrix oracle");
  selftest->add_option("--seed", selftest_seed, "RNG seed");
  selftest->add_option("--samples", selftest_samples, "random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*optimize) return run_optimize(optimize_o);
    if (*sweep_c) return run_sweep(constraint_o, pepr::SweepParameter::kConstraint, omega_values);
    if (*sweep_d) return run_sweep(dissipation_o, pepr::SweepParameter::kDissipation, gamma_values);
    if (*sweep_m) return run_sweep(modes_o, pepr::SweepParameter::kModes, mode_values);
    if (*trace) return run_trace(trace_o);
    if (*selftest) return run_selftest(selftest_seed, selftest_samples);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
