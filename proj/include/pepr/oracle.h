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

#ifndef PEPR_ORACLE_H_
#define PEPR_ORACLE_H_

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "pepr/models.h"
#include "pepr/parametrization.h"

// Brute-force complex-matrix reference for the vector kernels. Used by tests
// and the selftest command; never on the optimization path.
namespace pepr::oracle {

using Matrix = Eigen::MatrixXcd;

/// Dense density operator of a StateVector (2x2 for dim 3, 4x4 for dim 15).
Matrix to_matrix(const StateVector& state);

/// Inverse of to_matrix. Throws std::invalid_argument if `m` is not
/// Hermitian to 1e-10 or its trace is not 0 or 1 to 1e-10.
StateVector from_matrix(const Matrix& m);

Matrix pauli(char axis);
/// B_j as a matrix, in the model's channel order.
Matrix control_operator(const Model& model, std::size_t j);
Matrix hamiltonian(const Model& model, std::span<const double> controls);
/// Hadamard or CNOT.
Matrix target_gate(const Model& model);

/// -i[H, m] + gamma_z sum_i D[sigma_z^i] m with D[L]m = L m L^dag - {L^dag L, m}/2.
Matrix lindblad_rhs(const Model& model, const Matrix& m, std::span<const double> controls);

/// i[B_j, m].
Matrix commutator(const Model& model, std::size_t j, const Matrix& m);

/// exp(i eps B_j) m exp(-i eps B_j), from the eigendecomposition of B_j.
Matrix unitary_kick(const Model& model, const Matrix& m, std::size_t j, double eps);

/// Tr(final V initial V^dag).
double fidelity(const Model& model, const Matrix& initial, const Matrix& final_state);

double purity(const Matrix& m);

using ControlFunction = std::function<void(double t, std::span<double> out)>;

/// Independent matrix RK4 from t0 to t1 in `steps` equal steps.
Matrix propagate(const Model& model, const ControlFunction& controls, Matrix m, double t0, double t1,
                 std::size_t steps);
Matrix propagate(const Model& model, const ControlParams& params, Matrix m, double t0, double t1,
                 std::size_t steps);

}  // namespace pepr::oracle

#endif  // PEPR_ORACLE_H_
