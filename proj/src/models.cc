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

#include "pepr/models.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace pepr {

namespace {

enum Channel : std::size_t { kHx1 = 0, kHy1 = 1, kHx2 = 2, kHy2 = 3, kJ = 4 };

void check_state(const Model& model, const StateVector& state) {
  if (state.dim() != model.dim()) {
    throw std::invalid_argument("state dimension " + std::to_string(state.dim()) + " does not match model " +
                                model.name());
  }
}

void check_channel(const Model& model, std::size_t j) {
  if (j >= model.n_channels()) {
    throw std::invalid_argument("channel " + std::to_string(j) + " out of range for model " + model.name());
  }
}

}  // namespace

Model Model::hadamard() { return Model(ModelKind::kHadamard, 0.0); }

Model Model::cnot(double gamma_z) {
  if (!(gamma_z >= 0.0) || !std::isfinite(gamma_z)) {
    throw std::invalid_argument("gamma_z must be finite and >= 0");
  }
  return Model(ModelKind::kCnot, gamma_z);
}

Model Model::from_name(std::string_view name, double gamma_z) {
  if (name == "hadamard") {
    // Closed single-qubit dynamics only.
    if (gamma_z != 0.0) throw std::invalid_argument("the hadamard model does not support dephasing");
    return hadamard();
  }
  if (name == "cnot") return cnot(gamma_z);
  throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected hadamard or cnot)");
}

std::string Model::name() const { return kind_ == ModelKind::kHadamard ? "hadamard" : "cnot"; }

std::vector<std::string> Model::channel_names() const {
  if (kind_ == ModelKind::kHadamard) return {"h_x", "h_y"};
  return {"h_x1", "h_y1", "h_x2", "h_y2", "J"};
}

ChannelLayout Model::layout() const {
  if (kind_ == ModelKind::kHadamard) return {{{0, 1}}, {}};
  return {{{kHx1, kHy1}, {kHx2, kHy2}}, {kJ}};
}

namespace detail {

void hadamard_rhs(const double* r, const double* c, double* out) {
  const double hx = c[0];
  const double hy = c[1];
  out[0] = 2.0 * hy * r[2];
  out[1] = -2.0 * hx * r[2];
  out[2] = 2.0 * hx * r[1] - 2.0 * hy * r[0];
}

void cnot_rhs(const double* rho, double xi, const double* c, double g, double* out) {
  const double hx1 = c[kHx1], hy1 = c[kHy1], hx2 = c[kHx2], hy2 = c[kHy2], J = c[kJ];
  // 1-based aliases so the equations read like the coordinate layout.
  const double r1 = rho[0], r2 = rho[1], r3 = rho[2], r4 = rho[3], r5 = rho[4];
  const double r6 = rho[5], r7 = rho[6], r8 = rho[7], r9 = rho[8], r10 = rho[9];
  const double r11 = rho[10], r12 = rho[11], r13 = rho[12], r14 = rho[13], r15 = rho[14];
  const double pop_a = -xi + r1 + 2.0 * r2 + r3;
  const double pop_b = -xi + r1 + r2 + 2.0 * r3;

  out[0] = 2.0 * (-hy2 * r4 + hx2 * r5 - hy1 * r6 + hx1 * r7);
  out[1] = 2.0 * (-hy1 * r12 + hx1 * r13 + hy2 * r4 - hx2 * r5 + 2.0 * J * r9);
  out[2] = -2.0 * (hy2 * r14 - hx2 * r15 - hy1 * r6 + hx1 * r7 + 2.0 * J * r9);
  out[3] = hx1 * r11 + hy2 * (r1 - r2) - 2.0 * g * r4 - 2.0 * J * r5 + 2.0 * J * r7 - hy1 * (r10 + r8) + hx1 * r9;
  out[4] = -hy1 * r11 + hx2 * (-r1 + r2) + 2.0 * J * r4 - 2.0 * g * r5 - 2.0 * J * r6 + hx1 * (-r10 + r8) +
           hy1 * r9;
  out[5] = hx2 * r11 + hy1 * (r1 - r3) + 2.0 * J * r5 - 2.0 * g * r6 - 2.0 * J * r7 - hy2 * (r10 + r8) - hx2 * r9;
  out[6] = hx1 * (-r1 + r3) - 2.0 * (J * r4 - J * r6 + g * r7) + hx2 * (-r10 + r8) - hy2 * (r11 + r9);
  out[7] = -hy1 * r14 + hx1 * r15 + hy1 * r4 - hx1 * r5 + hy2 * (-r12 + r6) + hx2 * (r13 - r7) - 4.0 * g * r8;
  out[8] = hx1 * r14 + hy1 * r15 - 2.0 * J * r2 + 2.0 * J * r3 - hx1 * r4 - hy1 * r5 + hx2 * (-r12 + r6) +
           hy2 * (-r13 + r7) - 4.0 * g * r9;
  out[9] = -4.0 * g * r10 - hx2 * r13 - hy1 * r14 - hx1 * r15 + hy1 * r4 + hx1 * r5 + hy2 * (-r12 + r6) + hx2 * r7;
  out[10] = -4.0 * g * r11 - hy2 * r13 + hx1 * r14 - hy1 * r15 - hx1 * r4 + hy1 * r5 + hx2 * (r12 - r6) + hy2 * r7;
  out[11] = -hx2 * r11 - 2.0 * g * r12 + 2.0 * J * r13 - 2.0 * J * r15 + hy1 * pop_a + hy2 * (r10 + r8) + hx2 * r9;
  out[12] = hy2 * r11 - 2.0 * J * r12 - 2.0 * g * r13 + 2.0 * J * r14 - hx1 * pop_a + hx2 * (r10 - r8) + hy2 * r9;
  out[13] = -2.0 * (J * r13 + g * r14 - J * r15) + hy2 * pop_b + hy1 * (r10 + r8) - hx1 * (r11 + r9);
  out[14] = hy1 * r11 + 2.0 * J * r12 - 2.0 * J * r14 - 2.0 * g * r15 - hx2 * pop_b + hx1 * (r10 - r8) - hy1 * r9;
}

}  // namespace detail

Coords eom_rhs(const Model& model, const StateVector& state, std::span<const double> controls) {
  check_state(model, state);
  if (controls.size() != model.n_channels()) {
    throw std::invalid_argument("expected " + std::to_string(model.n_channels()) + " control values");
  }
  Coords out(static_cast<Eigen::Index>(model.dim()));
  if (model.kind() == ModelKind::kHadamard) {
    detail::hadamard_rhs(state.coords.data(), controls.data(), out.data());
  } else {
    detail::cnot_rhs(state.coords.data(), state.xi, controls.data(), model.gamma_z(), out.data());
  }
  return out;
}

StateVector perturbation_map(const Model& model, std::size_t j, const StateVector& state) {
  check_state(model, state);
  check_channel(model, j);
  const auto& r = state.coords;
  StateVector out{Coords(r.size()), 0};
  auto& o = out.coords;

  if (model.kind() == ModelKind::kHadamard) {
    // Coordinates of i[sigma_j, rho] / 2: the single-qubit probe kicks the
    // spin operator sigma_j / 2, which is the scale the published learning
    // rates for this model refer to.
    if (j == 0) {
      o << 0.0, r[2], -r[1];
    } else {
      o << -r[2], 0.0, r[0];
    }
    return out;
  }

  const double xi = state.xi;
  const double r1 = r[0], r2 = r[1], r3 = r[2], r4 = r[3], r5 = r[4];
  const double r6 = r[5], r7 = r[6], r8 = r[7], r9 = r[8], r10 = r[9];
  const double r11 = r[10], r12 = r[11], r13 = r[12], r14 = r[13], r15 = r[14];
  switch (j) {
    case kHx1:
      o << -2 * r7, -2 * r13, 2 * r7, -r11 - r9, r10 - r8, 0, r1 - r3, -r15 + r5, -r14 + r4, r15 - r5, -r14 + r4,
          0, r1 + 2 * r2 + r3 - xi, r11 + r9, -r10 + r8;
      break;
    case kHy1:
      o << 2 * r6, 2 * r12, -2 * r6, r10 + r8, r11 - r9, -r1 + r3, 0, r14 - r4, -r15 + r5, r14 - r4, r15 - r5,
          -r1 - 2 * r2 - r3 + xi, 0, -r10 - r8, -r11 + r9;
      break;
    case kHx2:
      o << -2 * r5, 2 * r5, -2 * r15, 0, r1 - r2, -r11 + r9, r10 - r8, -r13 + r7, r12 - r6, r13 - r7, -r12 + r6,
          r11 - r9, -r10 + r8, 0, r1 + r2 + 2 * r3 - xi;
      break;
    case kHy2:
      o << 2 * r4, -2 * r4, 2 * r14, -r1 + r2, 0, r10 + r8, r11 + r9, r12 - r6, r13 - r7, r12 - r6, r13 - r7,
          -r10 - r8, -r11 - r9, -r1 - r2 - 2 * r3 + xi, 0;
      break;
    case kJ:
      o << 0, -4 * r9, 4 * r9, 2 * r5 - 2 * r7, -2 * r4 + 2 * r6, -2 * r5 + 2 * r7, 2 * r4 - 2 * r6, 0,
          2 * r2 - 2 * r3, 0, 0, -2 * r13 + 2 * r15, 2 * r12 - 2 * r14, 2 * r13 - 2 * r15, -2 * r12 + 2 * r14;
      break;
  }
  return out;
}

double fidelity(const Model& model, const StateVector& initial, const StateVector& final_state) {
  check_state(model, initial);
  check_state(model, final_state);
  const auto& q = initial.coords;
  const auto& r = final_state.coords;
  const double xi0 = initial.xi;
  const double xif = final_state.xi;

  if (model.kind() == ModelKind::kHadamard) {
    // H maps the Bloch vector (x, y, z) to (z, -y, x).
    return 0.5 * (xif * xi0 + r[2] * q[0] + r[0] * q[2] - r[1] * q[1]);
  }

  const double q1 = q[0], q2 = q[1], q3 = q[2];
  return r[0] * q1 + 2 * r[5] * q[9] + 2 * r[6] * q[10] + 2 * r[7] * q[11] + 2 * r[8] * q[12] +
         2 * r[13] * q[13] - 2 * r[14] * q[14] + r[1] * q2 + xif * q3 - (r[0] + r[1]) * q3 -
         r[2] * (-xi0 + q1 + q2 + 2 * q3) +
         2 * (r[3] * q[3] + r[4] * q[4] + r[9] * q[5] + r[10] * q[6] + r[11] * q[7] + r[12] * q[8]);
}

StateVector product_state(const Model& model, std::span<const std::array<double, 3>> bloch) {
  if (bloch.size() != model.n_qubits()) {
    throw std::invalid_argument("expected one Bloch vector per qubit");
  }
  if (model.kind() == ModelKind::kHadamard) {
    StateVector s{Coords(3), 1};
    s.coords << bloch[0][0], bloch[0][1], bloch[0][2];
    return s;
  }

  using cd = std::complex<double>;
  auto local = [](const std::array<double, 3>& b) {
    return std::array<std::array<cd, 2>, 2>{{{cd(0.5 * (1 + b[2])), cd(0.5 * b[0], -0.5 * b[1])},
                                             {cd(0.5 * b[0], 0.5 * b[1]), cd(0.5 * (1 - b[2]))}}};
  };
  const auto a = local(bloch[0]);
  const auto b = local(bloch[1]);
  auto entry = [&](int row, int col) { return a[row >> 1][col >> 1] * b[row & 1][col & 1]; };

  StateVector s{Coords(15), 1};
  auto& c = s.coords;
  c[0] = entry(0, 0).real();
  c[1] = entry(1, 1).real();
  c[2] = entry(2, 2).real();
  const int lower[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
  for (int i = 0; i < 6; ++i) {
    const cd v = entry(lower[i][0], lower[i][1]);
    c[3 + 2 * i] = v.real();
    c[4 + 2 * i] = v.imag();
  }
  return s;
}

StateVector sample_initial_state(const Model& model, Rng& rng, bool normalize) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<std::array<double, 3>, 2> bloch{};
  for (std::size_t q = 0; q < model.n_qubits(); ++q) {
    auto& b = bloch[q];
    double norm = 0.0;
    do {
      for (double& v : b) v = normal(rng);
      norm = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    } while (normalize && norm == 0.0);
    if (normalize) {
      for (double& v : b) v /= norm;
    }
  }
  return product_state(model, std::span(bloch).first(model.n_qubits()));
}

std::array<double, 3> bloch_vector(const Model& model, const StateVector& state, std::size_t qubit) {
  check_state(model, state);
  if (qubit >= model.n_qubits()) throw std::invalid_argument("qubit index out of range");
  const auto& r = state.coords;
  if (model.kind() == ModelKind::kHadamard) return {r[0], r[1], r[2]};
  const double xi = state.xi;
  if (qubit == 0) {
    return {2 * (r[5] + r[11]), 2 * (r[6] + r[12]), 2 * r[0] + 2 * r[1] - xi};
  }
  return {2 * (r[3] + r[13]), 2 * (r[4] + r[14]), 2 * r[0] + 2 * r[2] - xi};
}

}  // namespace pepr
