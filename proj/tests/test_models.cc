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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pepr/models.h"
#include "pepr/oracle.h"
#include "pepr/propagator.h"

namespace pepr {
namespace {

using oracle::Matrix;

StateVector random_coords(const Model& model, int xi, Rng& rng) {
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

StateVector vec(std::initializer_list<double> values, int xi = 1) {
  StateVector s{Coords(static_cast<Eigen::Index>(values.size())), xi};
  Eigen::Index i = 0;
  for (double v : values) s.coords[i++] = v;
  return s;
}

StateVector unit_coord(std::size_t index, int xi = 1) {
  StateVector s{Coords::Zero(15), xi};
  s.coords[static_cast<Eigen::Index>(index)] = 1.0;
  return s;
}

StateVector basis(const Model& model, int b1, int b2) {
  const std::array<std::array<double, 3>, 2> bloch{{{0, 0, b1 ? -1.0 : 1.0}, {0, 0, b2 ? -1.0 : 1.0}}};
  return product_state(model, bloch);
}

double max_diff(const StateVector& a, const StateVector& b) { return (a.coords - b.coords).cwiseAbs().maxCoeff(); }

TEST(Model, Construction) {
  EXPECT_EQ(Model::from_name("cnot", 0.1).gamma_z(), 0.1);
  EXPECT_EQ(Model::from_name("hadamard").dim(), 3u);
  EXPECT_THROW(Model::from_name("hadamard", 0.1), std::invalid_argument);
  EXPECT_THROW(Model::from_name("toffoli"), std::invalid_argument);
  EXPECT_THROW(Model::cnot(-1.0), std::invalid_argument);
  const std::vector<std::string> names{"h_x1", "h_y1", "h_x2", "h_y2", "J"};
  EXPECT_EQ(Model::cnot().channel_names(), names);
}

TEST(EomRhs, HadamardZeroControls) {
  const Model model = Model::hadamard();
  Rng rng(1);
  const std::vector<double> c{0.0, 0.0};
  EXPECT_EQ(eom_rhs(model, random_coords(model, 1, rng), c).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EomRhs, HadamardRotatesIntoZ) {
  const double c = 0.7;
  const std::vector<double> controls{c, 0.0};
  const Coords d = eom_rhs(Model::hadamard(), vec({0, 1, 0}), controls);
  EXPECT_DOUBLE_EQ(d[0], 0.0);
  EXPECT_DOUBLE_EQ(d[1], 0.0);
  EXPECT_DOUBLE_EQ(d[2], 2 * c);
}

TEST(EomRhs, CnotDephasingOfCoherence) {
  const double gamma = 0.3;
  const std::vector<double> controls(5, 0.0);
  const Coords d = eom_rhs(Model::cnot(gamma), unit_coord(3), controls);
  for (Eigen::Index i = 0; i < 15; ++i) EXPECT_DOUBLE_EQ(d[i], i == 3 ? -2 * gamma : 0.0) << "coord " << i;
}

TEST(EomRhs, RejectsWrongShapes) {
  const std::vector<double> controls(5, 0.0);
  EXPECT_THROW(eom_rhs(Model::cnot(), vec({0, 0, 1}), controls), std::invalid_argument);
  const std::vector<double> short_controls(4, 0.0);
  EXPECT_THROW(eom_rhs(Model::cnot(), unit_coord(0), short_controls), std::invalid_argument);
}

TEST(EomRhs, MatchesLindbladOracle) {
  Rng rng(2);
  std::uniform_real_distribution<double> rate(0.0, 0.2);
  for (int i = 0; i < 1000; ++i) {
    const Model model = i % 2 ? Model::cnot(rate(rng)) : Model::hadamard();
    for (int xi : {0, 1}) {
      const StateVector s = random_coords(model, xi, rng);
      const std::vector<double> c = random_controls(model, rng);
      const StateVector expected = oracle::from_matrix(oracle::lindblad_rhs(model, oracle::to_matrix(s), c));
      ASSERT_EQ(expected.xi, 0);
      EXPECT_LT(max_diff({eom_rhs(model, s, c), 0}, expected), 1e-12);
    }
  }
}

TEST(PerturbationMap, HadamardExamples) {
  const Model model = Model::hadamard();
  const StateVector x = perturbation_map(model, 0, vec({0, 0, 1}));
  EXPECT_EQ(x.xi, 0);
  EXPECT_LT(max_diff(x, vec({0, 1, 0}, 0)), 1e-15);
  const StateVector y = perturbation_map(model, 1, vec({0, 0, 1}));
  EXPECT_LT(max_diff(y, vec({-1, 0, 0}, 0)), 1e-15);
}

TEST(PerturbationMap, CnotIdentityCommutesWithCoupling) {
  const StateVector out = perturbation_map(Model::cnot(), 4, StateVector{Coords::Zero(15), 1});
  EXPECT_EQ(out.xi, 0);
  EXPECT_EQ(out.coords.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PerturbationMap, MatchesCommutatorOracle) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Model model = i % 2 ? Model::cnot() : Model::hadamard();
    const StateVector s = random_coords(model, i % 3 ? 1 : 0, rng);
    for (std::size_t j = 0; j < model.n_channels(); ++j) {
      Matrix m = oracle::commutator(model, j, oracle::to_matrix(s));
      if (model.kind() == ModelKind::kHadamard) m *= 0.5;  // probe operator sigma_j / 2
      const StateVector out = perturbation_map(model, j, s);
      EXPECT_EQ(out.xi, 0);
      EXPECT_LT(max_diff(out, oracle::from_matrix(m)), 1e-12) << "channel " << j;
    }
  }
}

TEST(PerturbationMap, RejectsBadChannel) {
  EXPECT_THROW(perturbation_map(Model::cnot(), 5, unit_coord(0)), std::invalid_argument);
}

TEST(Fidelity, CnotBasisStates) {
  const Model model = Model::cnot();
  const StateVector s00 = basis(model, 0, 0), s10 = basis(model, 1, 0), s11 = basis(model, 1, 1);
  EXPECT_NEAR(fidelity(model, s00, s00), 1.0, 1e-15);
  EXPECT_NEAR(fidelity(model, s10, s10), 0.0, 1e-15);
  EXPECT_NEAR(fidelity(model, s10, s11), 1.0, 1e-15);
}

TEST(Fidelity, HadamardGroundState) {
  const StateVector z = vec({0, 0, 1});
  EXPECT_NEAR(fidelity(Model::hadamard(), z, z), 0.5, 1e-15);
  EXPECT_NEAR(fidelity(Model::hadamard(), z, vec({1, 0, 0})), 1.0, 1e-15);
}

TEST(Fidelity, MatchesTraceOracle) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Model model = i % 2 ? Model::cnot() : Model::hadamard();
    const StateVector initial = random_coords(model, 1, rng);
    const StateVector final_state = random_coords(model, i % 3 ? 1 : 0, rng);
    const double expected =
        oracle::fidelity(model, oracle::to_matrix(initial), oracle::to_matrix(final_state));
    EXPECT_NEAR(fidelity(model, initial, final_state), expected, 1e-12);
  }
}

TEST(SampleInitialState, NormalizedProductStates) {
  Rng rng(5);
  for (const Model& model : {Model::hadamard(), Model::cnot()}) {
    for (int i = 0; i < 100; ++i) {
      const StateVector s = sample_initial_state(model, rng);
      EXPECT_EQ(s.xi, 1);
      for (std::size_t q = 0; q < model.n_qubits(); ++q) {
        const auto b = bloch_vector(model, s, q);
        EXPECT_NEAR(std::hypot(b[0], b[1], b[2]), 1.0, 1e-12);
      }
      EXPECT_NEAR(oracle::purity(oracle::to_matrix(s)), 1.0, 1e-12);
    }
  }
}

TEST(SampleInitialState, Deterministic) {
  Rng a = make_stream(7, 3), b = make_stream(7, 3);
  const Model model = Model::cnot();
  for (int i = 0; i < 10; ++i) {
    const StateVector sa = sample_initial_state(model, a), sb = sample_initial_state(model, b);
    EXPECT_EQ(sa.coords, sb.coords);
  }
}

TEST(SampleInitialState, UnnormalizedKeepsGaussianScale) {
  Rng rng(6);
  const Model model = Model::hadamard();
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += sample_initial_state(model, rng, false).coords.squaredNorm();
  EXPECT_NEAR(sum / n, 3.0, 0.1);
}

TEST(ProductState, GroundStateLayout) {
  const StateVector s = basis(Model::cnot(), 0, 0);
  EXPECT_EQ(s.coords[0], 1.0);
  for (Eigen::Index i = 1; i < 15; ++i) EXPECT_EQ(s.coords[i], 0.0);
}

TEST(ProductState, MatchesKroneckerProduct) {
  Rng rng(8);
  const Model model = Model::cnot();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    std::array<std::array<double, 3>, 2> b;
    for (auto& v : b) {
      for (double& x : v) x = normal(rng);
    }
    auto local = [](const std::array<double, 3>& v) -> Matrix {
      return (Matrix::Identity(2, 2) + v[0] * oracle::pauli('x') + v[1] * oracle::pauli('y') +
              v[2] * oracle::pauli('z')) /
             2.0;
    };
    Matrix expected(4, 4);
    const Matrix a = local(b[0]), c = local(b[1]);
    for (int r = 0; r < 4; ++r) {
      for (int col = 0; col < 4; ++col) expected(r, col) = a(r / 2, col / 2) * c(r % 2, col % 2);
    }
    EXPECT_LT((oracle::to_matrix(product_state(model, b)) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(BlochVector, MatchesPartialTraces) {
  Rng rng(9);
  const Model model = Model::cnot();
  const Matrix e = Matrix::Identity(2, 2);
  for (int i = 0; i < 100; ++i) {
    const StateVector s = random_coords(model, i % 2, rng);
    const Matrix m = oracle::to_matrix(s);
    const auto b0 = bloch_vector(model, s, 0), b1 = bloch_vector(model, s, 1);
    const char axes[] = {'x', 'y', 'z'};
    for (int a = 0; a < 3; ++a) {
      const Matrix p = oracle::pauli(axes[a]);
      Matrix op0(4, 4), op1(4, 4);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          op0(r, c) = p(r / 2, c / 2) * e(r % 2, c % 2);
          op1(r, c) = e(r / 2, c / 2) * p(r % 2, c % 2);
        }
      }
      EXPECT_NEAR(b0[a], (m * op0).trace().real(), 1e-12);
      EXPECT_NEAR(b1[a], (m * op1).trace().real(), 1e-12);
    }
  }
}

TEST(Dynamics, DephasingNeverRaisesPurity) {
  Rng rng(10);
  const std::size_t n_modes = 4;
  const Propagator propagator(IntegratorConfig{10, 1.0}, n_modes);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double gamma : {0.0, 0.05, 0.5}) {
    const Model model = Model::cnot(gamma);
    ControlParams params(5, n_modes);
    for (double& x : params.flat()) x = normal(rng);
    const ControlTrack track = propagator.sample(params);
    StateVector s = sample_initial_state(model, rng);
    double purity = oracle::purity(oracle::to_matrix(s));
    for (std::size_t n = 0; n < propagator.steps(); n += 64) {
      s = propagator.propagate(model, track, s, n, n + 64);
      const double next = oracle::purity(oracle::to_matrix(s));
      if (gamma == 0.0) {
        EXPECT_NEAR(next, 1.0, 1e-9);
      } else {
        EXPECT_LE(next, purity + 1e-12);
      }
      purity = next;
    }
  }
}

TEST(Dynamics, TracelessObjectsStayTraceless) {
  Rng rng(11);
  const Model model = Model::cnot(0.1);
  const Propagator propagator(IntegratorConfig{8, 1.0}, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  ControlParams params(5, 3);
  for (double& x : params.flat()) x = normal(rng);
  const ControlTrack track = propagator.sample(params);
  StateVector s = perturbation_map(model, 2, sample_initial_state(model, rng));
  for (std::size_t n = 0; n < propagator.steps(); n += 32) {
    s = propagator.propagate(model, track, s, n, n + 32);
    EXPECT_EQ(s.xi, 0);
    EXPECT_LT(std::abs(oracle::to_matrix(s).trace()), 1e-12);
  }
}

}  // namespace
}  // namespace pepr
