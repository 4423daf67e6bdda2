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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "pepr/harness.h"
#include "pepr/oracle.h"

namespace pepr {
namespace {

namespace fs = std::filesystem;

// Two-mode Hadamard protocol found by PEPR and checked against the matrix
// oracle at 2^14 steps (worst infidelity ~1e-14 over 100 random states).
ControlParams hadamard_solution() {
  return ControlParams::from_rows({{-2.4565767754918855, -1.6860316483136912},
                                   {-0.9503547813374813, 1.1239289057808133}});
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pepr_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_hadamard() {
  ExperimentConfig cfg;
  cfg.model = "hadamard";
  cfg.n_traj = 4;
  cfg.max_runs = 200;
  cfg.steps_pow2 = 8;
  cfg.threads = 1;
  return cfg;
}

TEST(LogMean, Examples) {
  EXPECT_NEAR(log_mean_infidelity(std::vector{1e-2, 1e-4}).value, -3.0, 1e-12);
  EXPECT_NEAR(log_mean_infidelity(std::vector{1e-3}).value, -3.0, 1e-12);
  EXPECT_NEAR(log_mean_infidelity(std::vector{1e-1, 1e-1, 1e-7}).value, -3.0, 1e-12);
}

TEST(LogMean, ClampsTinyAndNegativeSamples) {
  const LogMean lm = log_mean_infidelity(std::vector{0.0, -1e-17, 1e-16, 1e-8});
  EXPECT_EQ(lm.n_clamped, 2u);
  EXPECT_NEAR(lm.value, (-16.0 * 3 - 8.0) / 4, 1e-12);
  EXPECT_THROW(log_mean_infidelity(std::vector<double>{}), std::invalid_argument);
}

TEST(Variance, Examples) {
  EXPECT_NEAR(ensemble_variance(std::vector{0.1, 0.3}), 0.02, 1e-15);
  EXPECT_EQ(ensemble_variance(std::vector{0.5, 0.5, 0.5}), 0.0);
  EXPECT_NEAR(ensemble_variance(std::vector{0.0, 1.0}), 0.5, 1e-15);
  EXPECT_THROW(ensemble_variance(std::vector{0.1}), std::invalid_argument);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
}

TEST(CheckpointSchedule, Properties) {
  for (double ratio : {0.5, 1.0, 1.2, 2.0}) {
    const auto s = checkpoint_schedule(1000, ratio);
    EXPECT_EQ(s.front(), 0u);
    EXPECT_EQ(s[1], 1u);
    EXPECT_EQ(s.back(), 1000u);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s[i], s[i - 1]);
  }
  EXPECT_EQ(checkpoint_schedule(1000, 1.0).size(), 1001u);
  EXPECT_LT(checkpoint_schedule(30000, 1.2).size(), 80u);
}

TEST(EvaluateInfidelity, HadamardSolution) {
  const Model model = Model::hadamard();
  const Propagator p(IntegratorConfig{14, 1.0}, 2);
  Rng rng(1);
  EXPECT_LE(evaluate_infidelity(model, p, hadamard_solution(), 10, rng), 1e-10);
}

TEST(EvaluateInfidelity, SingleSampleMatchesOracle) {
  const Model model = Model::cnot();
  const Propagator p(IntegratorConfig{8, 1.0}, 8);
  Rng rng(2), copy(2);
  const double infidelity = evaluate_infidelity(model, p, ControlParams(5, 8), 1, rng);
  const oracle::Matrix m = oracle::to_matrix(sample_initial_state(model, copy));
  EXPECT_NEAR(infidelity, 1.0 - oracle::fidelity(model, m, m), 1e-12);
}

TEST(EvaluateInfidelity, CnotIdleEnsembleAverage) {
  // With no controls the system idles; the CNOT overlap then averages to 4/9.
  const Model model = Model::cnot();
  const Propagator p(IntegratorConfig{6, 1.0}, 8);
  Rng rng(3);
  EXPECT_NEAR(evaluate_infidelity(model, p, ControlParams(5, 8), 4000, rng), 5.0 / 9.0, 0.02);
}

TEST(EvaluateInfidelity, RejectsZeroSamples) {
  const Model model = Model::hadamard();
  const Propagator p(IntegratorConfig{6, 1.0}, 2);
  Rng rng(4);
  EXPECT_THROW(evaluate_infidelity(model, p, ControlParams(2, 2), 0, rng), std::invalid_argument);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.model = "hadamard";
  cfg.method = Method::kGrape;
  cfg.n_modes = 3;
  cfg.alpha = 0.7;
  cfg.omega_max = 2.7;
  cfg.seed = 99;
  cfg.count_rejected = false;
  const nlohmann::json j = cfg;
  ExperimentConfig back;
  from_json(j, back);
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.modes(), 3u);
  EXPECT_EQ(back.learning_rate(), 0.7);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  ExperimentConfig cfg;
  EXPECT_THROW(from_json(nlohmann::json{{"n_trajectories", 5}}, cfg), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json{{"n_traj", "five"}}, cfg), ConfigError);
  EXPECT_THROW(method_from_string("adam"), ConfigError);

  ExperimentConfig bad;
  bad.model = "toffoli";
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = ExperimentConfig{};
  bad.n_traj = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = ExperimentConfig{};
  bad.omega_max = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Config, Defaults) {
  ExperimentConfig cfg;
  EXPECT_EQ(cfg.modes(), 8u);
  EXPECT_EQ(cfg.learning_rate(), 0.5);
  cfg.model = "hadamard";
  EXPECT_EQ(cfg.modes(), 2u);
  cfg.apply_full_scale();
  EXPECT_EQ(cfg.n_traj, 100u);
  EXPECT_EQ(cfg.steps_pow2, 14);
}

TEST(RunTrajectory, RunsPerCheckpointStep) {
  ExperimentConfig cfg;
  cfg.n_traj = 1;
  cfg.max_runs = 123;
  cfg.steps_pow2 = 7;
  cfg.checkpoint_ratio = 1.0;
  const Propagator p(IntegratorConfig{7, 1.0}, 8);

  const TrajectoryRecord pepr = run_trajectory(cfg, 0, p);
  ASSERT_EQ(pepr.checkpoints.size(), 124u);
  for (std::size_t i = 0; i < pepr.checkpoints.size(); ++i) EXPECT_EQ(pepr.checkpoints[i].n_run, i);

  cfg.method = Method::kGrape;
  const TrajectoryRecord grape = run_trajectory(cfg, 0, p);
  ASSERT_EQ(grape.checkpoints.size(), 4u);
  for (std::size_t i = 0; i < grape.checkpoints.size(); ++i) EXPECT_EQ(grape.checkpoints[i].n_run, 41 * i);
}

TEST(RunExperiment, HadamardConverges) {
  ExperimentConfig cfg = small_hadamard();
  cfg.n_traj = 5;
  cfg.max_runs = 500;
  cfg.steps_pow2 = 10;
  const ExperimentResult r = run_experiment(cfg);
  EXPECT_EQ(r.summary.back().n_run, 500u);
  EXPECT_LT(r.summary.back().log_mean_infidelity, -10.0);
  EXPECT_GT(r.summary.front().log_mean_infidelity, -3.0);
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  ExperimentConfig cfg = small_hadamard();
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  write_experiment(run_experiment(cfg), a);
  cfg.threads = 3;
  write_experiment(run_experiment(cfg), b);
  for (const char* name : {"trajectories.csv", "summary.csv", "params.json"}) {
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_FALSE(fs::exists(a / "PARTIAL"));
  cfg.seed = 2;
  const ExperimentResult other = run_experiment(cfg);
  EXPECT_NE(other.trajectories[0].checkpoints.back().infidelity,
            run_experiment(small_hadamard()).trajectories[0].checkpoints.back().infidelity);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RunExperiment, SummaryFollowsFirstCheckpointAtOrAfter) {
  const ExperimentResult r = run_experiment(small_hadamard());
  for (const SummaryRow& row : r.summary) {
    std::vector<double> values;
    for (const auto& t : r.trajectories) {
      for (const auto& c : t.checkpoints) {
        if (c.n_run >= row.n_run) {
          values.push_back(c.infidelity);
          break;
        }
      }
    }
    EXPECT_EQ(log_mean_infidelity(values).value, row.log_mean_infidelity);
  }
}

TEST(WriteExperiment, FailureLeavesPartialMarker) {
  const ExperimentResult r = run_experiment(small_hadamard());
  const fs::path dir = scratch_dir("partial");
  fs::create_directories(dir / "summary.csv");  // a directory blocks the file
  EXPECT_THROW(write_experiment(r, dir), std::runtime_error);
  EXPECT_TRUE(fs::exists(dir / "PARTIAL"));
  fs::remove_all(dir);
}

TEST(RunSweep, WritesPerPointOutputs) {
  ExperimentConfig cfg = small_hadamard();
  cfg.n_traj = 2;
  cfg.max_runs = 50;
  const fs::path dir = scratch_dir("sweep");
  cfg.output_dir = dir.string();
  const std::vector<double> values{1.0, 2.0};
  const auto points = run_sweep(cfg, SweepParameter::kModes, values);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[1].result.config.modes(), 2u);
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "modes_1" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "modes_2" / "params.json"));
  fs::remove_all(dir);
}

TEST(ProtocolTrace, ZeroControlsHoldBasisState) {
  const Model model = Model::cnot();
  const std::vector<StateVector> states{basis_state(model, "00"), basis_state(model, "11")};
  const ProtocolTrace trace = emit_protocol_trace(model, ControlParams(5, 8), states, IntegratorConfig{8, 1.0}, 16);
  ASSERT_EQ(trace.rows.size(), 17u);
  ASSERT_EQ(trace.columns.size(), 1u + 5 + 4 + 1 + 6);
  for (const auto& row : trace.rows) {
    for (std::size_t i = 1; i <= 10; ++i) EXPECT_EQ(row[i], 0.0);
    EXPECT_NEAR(row[11], 0.0, 1e-14);
    EXPECT_NEAR(row[13], 1.0, 1e-14);
    EXPECT_NEAR(row[16], -1.0, 1e-14);
  }
  EXPECT_EQ(trace.pulse_areas, (std::vector<double>{0.0, 0.0}));
}

TEST(ProtocolTrace, AmplitudeIsHypotOfChannels) {
  const Model model = Model::hadamard();
  const std::vector<StateVector> states{basis_state(model, "0")};
  const ProtocolTrace trace = emit_protocol_trace(model, hadamard_solution(), states, IntegratorConfig{10, 1.0});
  EXPECT_EQ(trace.rows.size(), 1025u);
  for (const auto& row : trace.rows) EXPECT_NEAR(row[3], std::hypot(row[1], row[2]), 1e-15);
  // Hadamard maps +z to +x.
  const auto& last = trace.rows.back();
  EXPECT_NEAR(last[5], 1.0, 1e-8);
  EXPECT_NEAR(last[7], 0.0, 1e-8);

  const fs::path path = scratch_dir("trace") / "trace.csv";
  write_protocol_trace(trace, path);
  EXPECT_NE(slurp(path).find("# pulse_area,"), std::string::npos);
  fs::remove_all(path.parent_path());
}

TEST(BasisState, RejectsBadLabels) {
  const Model model = Model::cnot();
  EXPECT_THROW(basis_state(model, "0"), std::invalid_argument);
  EXPECT_THROW(basis_state(model, "0x"), std::invalid_argument);
}

TEST(Selftest, AllChecksPass) {
  for (const SelftestResult& r : run_selftest(1, 50)) EXPECT_TRUE(r.passed()) << r.name << " " << r.max_error;
}

}  // namespace
}  // namespace pepr
