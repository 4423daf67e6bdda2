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

#ifndef PEPR_HARNESS_H_
#define PEPR_HARNESS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pepr/models.h"
#include "pepr/optimizers.h"
#include "pepr/parametrization.h"
#include "pepr/propagator.h"

namespace pepr {

/// Invalid or inconsistent experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { kPepr, kGrape };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// Everything that determines an experiment. Output is a pure function of
/// this struct (thread count excluded).
struct ExperimentConfig {
  std::string model = "cnot";
  Method method = Method::kPepr;
  std::optional<std::size_t> n_modes;  // default: 8 for cnot, 2 for hadamard
  std::optional<double> alpha;         // default: see learning_rate()
  double epsilon = 1e-7;
  std::size_t n_traj = 10;
  std::size_t n_fid = 10;
  std::uint64_t max_runs = 30000;
  int steps_pow2 = 12;
  double gamma_z = 0.0;
  std::optional<double> omega_max;
  std::optional<double> j_max;
  std::uint64_t seed = 1;
  /// Geometric checkpoint spacing in N_run; values <= 1 checkpoint after
  /// every optimizer step.
  double checkpoint_ratio = 1.2;
  std::size_t max_reject = 1000;
  bool count_rejected = true;
  bool normalize_states = true;
  std::string output_dir = "out";
  std::size_t threads = 0;  // 0: hardware concurrency

  std::size_t modes() const;
  /// alpha if set; otherwise 0.5 (PEPR, cnot), 2.5 (PEPR, hadamard), 1.2 (GRAPE).
  double learning_rate() const;
  std::optional<ConstraintSpec> constraints() const;
  Model make_model() const;
  /// Throws ConfigError.
  void validate() const;

  /// Full-scale statistics: 100 trajectories and h = 2^-14 t_f.
  void apply_full_scale();
};

void to_json(nlohmann::json& out, const ExperimentConfig& cfg);
/// Rejects unknown keys and ill-typed values with ConfigError.
void from_json(const nlohmann::json& in, ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Checkpoint {
  std::uint64_t n_run = 0;
  double infidelity = 0.0;
};

struct TrajectoryRecord {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;
  ControlParams final_params;
  std::size_t rejections = 0;    // discarded PEPR candidates
  std::size_t failed_steps = 0;  // PEPR steps that hit max_reject

  double final_infidelity() const { return checkpoints.back().infidelity; }
};

struct SummaryRow {
  std::uint64_t n_run = 0;
  double log_mean_infidelity = 0.0;  // mean of log10(1 - F)
  double variance = 0.0;
  double min_infidelity = 0.0;
  double max_infidelity = 0.0;
  std::size_t n_clamped = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrajectoryRecord> trajectories;  // sorted by id
  std::vector<SummaryRow> summary;
};

/// 1 - (1/n_fid) sum F over n_fid fresh initial states drawn from `rng`.
double evaluate_infidelity(const Model& model, const Propagator& propagator, const ControlParams& params,
                           std::size_t n_fid, Rng& rng, bool normalize_states = true);

/// Samples below this are clamped before taking log10.
constexpr double kInfidelityFloor = 1e-16;

struct LogMean {
  double value = 0.0;
  std::size_t n_clamped = 0;
};

/// (1/n) sum log10(x_i), with x_i < 1e-16 clamped to 1e-16 and counted.
LogMean log_mean_infidelity(std::span<const double> samples);

/// Unbiased (1/(n-1)) sum (x_i - mean)^2. Throws std::invalid_argument for n < 2.
double ensemble_variance(std::span<const double> samples);

double median(std::vector<double> samples);

/// Checkpoint schedule 0, 1, ..., max_runs with geometric spacing `ratio`
/// (each point is max(prev + 1, ceil(prev * ratio))). The last point is
/// always max_runs.
std::vector<std::uint64_t> checkpoint_schedule(std::uint64_t max_runs, double ratio);

/// One optimization trajectory. Optimizer draws use stream (seed, id, 0),
/// checkpoint evaluations use stream (seed, id, 1).
TrajectoryRecord run_trajectory(const ExperimentConfig& cfg, std::size_t id, const Propagator& propagator);

/// Aggregates, for each schedule point s, the first checkpoint of every
/// trajectory with n_run >= s.
std::vector<SummaryRow> summarize(std::span<const TrajectoryRecord> trajectories,
                                  std::span<const std::uint64_t> schedule);

/// Runs n_traj trajectories concurrently. Does no I/O.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes trajectories.csv, summary.csv, params.json and summary.svg into
/// `dir`. On I/O failure a PARTIAL marker is left behind (when possible) and
/// std::runtime_error is thrown.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

enum class SweepParameter { kConstraint, kDissipation, kModes };

/// Runs one experiment per value. kConstraint sets omega_max = j_max = value,
/// kDissipation sets gamma_z, kModes sets n_modes. Each point's outputs go to
/// `<output_dir>/<name>_<value>/`; `<output_dir>/sweep.csv`,
/// `<output_dir>/sweep_scatter.csv` and `<output_dir>/sweep.svg` collect the
/// final ensembles.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepParameter parameter,
                                  std::span<const double> values, bool write_outputs = true);

/// Time series of a protocol: controls, Rabi amplitude/phase per qubit,
/// coupling, and the Bloch vector of the target qubit for each initial state.
struct ProtocolTrace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<double> pulse_areas;  // one per Rabi pair
};

/// Samples every `stride`-th grid point (0 picks a stride giving <= 1025 rows).
ProtocolTrace emit_protocol_trace(const Model& model, const ControlParams& params,
                                  std::span<const StateVector> initial_states, const IntegratorConfig& integrator,
                                  std::size_t stride = 0);
void write_protocol_trace(const ProtocolTrace& trace, const std::filesystem::path& path);

/// Computational basis state |b_1 b_2 ...> from a bit string such as "10".
StateVector basis_state(const Model& model, const std::string& bits);

struct SelftestResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
};

/// Compares the vector kernels against the matrix oracle on random inputs.
std::vector<SelftestResult> run_selftest(std::uint64_t seed, std::size_t samples);

}  // namespace pepr

#endif  // PEPR_HARNESS_H_
