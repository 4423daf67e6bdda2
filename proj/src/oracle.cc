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

#include "pepr/oracle.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace pepr::oracle {

namespace {

using cd = std::complex<double>;
constexpr cd kI(0.0, 1.0);

// Lower-triangle positions of coords 4..15 in the two-qubit layout.
constexpr int kLower[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};

Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

}  // namespace

Matrix to_matrix(const StateVector& state) {
  const auto& r = state.coords;
  const double xi = state.xi;
  if (state.dim() == 3) {
    Matrix m(2, 2);
    m << 0.5 * (xi + r[2]), 0.5 * cd(r[0], -r[1]), 0.5 * cd(r[0], r[1]), 0.5 * (xi - r[2]);
    return m;
  }
  if (state.dim() != 15) throw std::invalid_argument("unsupported state dimension");
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = r[0];
  m(1, 1) = r[1];
  m(2, 2) = r[2];
  m(3, 3) = xi - r[0] - r[1] - r[2];
  for (int i = 0; i < 6; ++i) {
    const cd v(r[3 + 2 * i], r[4 + 2 * i]);
    m(kLower[i][0], kLower[i][1]) = v;
    m(kLower[i][1], kLower[i][0]) = std::conj(v);
  }
  return m;
}

StateVector from_matrix(const Matrix& m) {
  if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
    throw std::invalid_argument("expected a 2x2 or 4x4 matrix");
  }
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("matrix is not Hermitian");
  const double trace = m.trace().real();
  const double xi = std::round(trace);
  if (std::abs(trace - xi) > 1e-10 || (xi != 0.0 && xi != 1.0)) {
    throw std::invalid_argument("matrix trace must be 0 or 1");
  }
  StateVector s;
  s.xi = static_cast<int>(xi);
  if (m.rows() == 2) {
    s.coords = Coords(3);
    s.coords << 2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real();
    return s;
  }
  s.coords = Coords(15);
  s.coords[0] = m(0, 0).real();
  s.coords[1] = m(1, 1).real();
  s.coords[2] = m(2, 2).real();
  for (int i = 0; i < 6; ++i) {
    const cd v = m(kLower[i][0], kLower[i][1]);
    s.coords[3 + 2 * i] = v.real();
    s.coords[4 + 2 * i] = v.imag();
  }
  return s;
}

Matrix pauli(char axis) {
  Matrix p(2, 2);
  switch (axis) {
    case 'x': p << 0, 1, 1, 0; break;
    case 'y': p << 0, -kI, kI, 0; break;
    case 'z': p << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli axis must be x, y or z");
  }
  return p;
}

Matrix control_operator(const Model& model, std::size_t j) {
  if (j >= model.n_channels()) throw std::invalid_argument("channel out of range");
  if (model.kind() == ModelKind::kHadamard) return pauli(j == 0 ? 'x' : 'y');
  const Matrix e = identity(2);
  switch (j) {
    case 0: return kron(pauli('x'), e);
    case 1: return kron(pauli('y'), e);
    case 2: return kron(e, pauli('x'));
    case 3: return kron(e, pauli('y'));
    default:
      return kron(pauli('x'), pauli('x')) + kron(pauli('y'), pauli('y')) + kron(pauli('z'), pauli('z'));
  }
}

Matrix hamiltonian(const Model& model, std::span<const double> controls) {
  if (controls.size() != model.n_channels()) throw std::invalid_argument("wrong number of controls");
  const Eigen::Index d = model.kind() == ModelKind::kHadamard ? 2 : 4;
  Matrix h = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < controls.size(); ++j) h += controls[j] * control_operator(model, j);
  return h;
}

Matrix target_gate(const Model& model) {
  if (model.kind() == ModelKind::kHadamard) {
    Matrix v(2, 2);
    v << 1, 1, 1, -1;
    return v / std::sqrt(2.0);
  }
  Matrix v = Matrix::Zero(4, 4);
  v(0, 0) = 1;
  v(1, 1) = 1;
  v(2, 3) = 1;
  v(3, 2) = 1;
  return v;
}

Matrix lindblad_rhs(const Model& model, const Matrix& m, std::span<const double> controls) {
  const Matrix h = hamiltonian(model, controls);
  Matrix out = -kI * (h * m - m * h);
  if (model.gamma_z() != 0.0) {
    const Matrix e = identity(2);
    for (const Matrix& l : {kron(pauli('z'), e), kron(e, pauli('z'))}) {
      const Matrix ll = l.adjoint() * l;
      out += model.gamma_z() * (l * m * l.adjoint() - 0.5 * (ll * m + m * ll));
    }
  }
  return out;
}

Matrix commutator(const Model& model, std::size_t j, const Matrix& m) {
  const Matrix b = control_operator(model, j);
  return kI * (b * m - m * b);
}

Matrix unitary_kick(const Model& model, const Matrix& m, std::size_t j, double eps) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(control_operator(model, j));
  const Matrix& vecs = solver.eigenvectors();
  Eigen::VectorXcd phases(solver.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::exp(kI * eps * solver.eigenvalues()[i]);
  const Matrix u = vecs * phases.asDiagonal() * vecs.adjoint();
  return u * m * u.adjoint();
}

double fidelity(const Model& model, const Matrix& initial, const Matrix& final_state) {
  const Matrix v = target_gate(model);
  return (final_state * v * initial * v.adjoint()).trace().real();
}

double purity(const Matrix& m) { return (m * m).trace().real(); }

Matrix propagate(const Model& model, const ControlFunction& controls, Matrix m, double t0, double t1,
                 std::size_t steps) {
  const double h = (t1 - t0) / static_cast<double>(steps);
  std::vector<double> c0(model.n_channels()), c_mid(model.n_channels()), c1(model.n_channels());
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = t0 + static_cast<double>(n) * h;
    controls(t, c0);
    controls(t + 0.5 * h, c_mid);
    controls(n + 1 == steps ? t1 : t + h, c1);
    const Matrix k1 = lindblad_rhs(model, m, c0);
    const Matrix k2 = lindblad_rhs(model, m + 0.5 * h * k1, c_mid);
    const Matrix k3 = lindblad_rhs(model, m + 0.5 * h * k2, c_mid);
    const Matrix k4 = lindblad_rhs(model, m + h * k3, c1);
    m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return m;
}

Matrix propagate(const Model& model, const ControlParams& params, Matrix m, double t0, double t1,
                 std::size_t steps) {
  auto controls = [&params](double t, std::span<double> out) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = evaluate_control(params, j, t);
  };
  return propagate(model, controls, std::move(m), t0, t1, steps);
}

}  // namespace pepr::oracle
