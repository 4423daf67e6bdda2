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

#ifndef PEPR_MODELS_H_
#define PEPR_MODELS_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pepr/parametrization.h"
#include "pepr/random.h"

namespace pepr {

constexpr std::size_t kMaxDim = 15;

/// Real coordinates of a density operator; at most 15 entries, never heap
/// allocated.
using Coords = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, static_cast<int>(kMaxDim), 1>;

/// Real-vector density-operator coordinates plus the trace flag xi.
///
/// Single qubit (dim 3): rho = (xi + r_x sigma_x + r_y sigma_y + r_z sigma_z) / 2,
/// coords = (r_x, r_y, r_z).
///
/// Two qubits (dim 15), basis |00>, |01>, |10>, |11>, coords rho_1..rho_15
/// stored at index 0..14:
///
///   [ r1        r4 - i r5   r6 - i r7   r10 - i r11         ]
///   [ r4 + i r5  r2         r8 - i r9   r12 - i r13         ]
///   [ r6 + i r7  r8 + i r9   r3         r14 - i r15         ]
///   [ r10+ i r11 r12 + i r13 r14 + i r15 xi - r1 - r2 - r3  ]
///
/// xi = 1 marks a unit-trace state, xi = 0 a traceless object such as
/// i[B, rho].
struct StateVector {
  Coords coords;
  int xi = 1;

  std::size_t dim() const { return static_cast<std::size_t>(coords.size()); }
};

enum class ModelKind { kHadamard, kCnot };

/// One of the two shipped control problems. H_0 = 0 for both.
///
/// Channel order:
///   hadamard: (h_x, h_y)
///   cnot:     (h_x1, h_y1, h_x2, h_y2, J)   with J multiplying sigma^1 . sigma^2
class Model {
 public:
  static Model hadamard();
  static Model cnot(double gamma_z = 0.0);
  /// "hadamard" or "cnot"; throws std::invalid_argument otherwise, or when a
  /// nonzero gamma_z is requested for the hadamard model.
  static Model from_name(std::string_view name, double gamma_z = 0.0);

  ModelKind kind() const { return kind_; }
  std::string name() const;
  std::size_t dim() const { return kind_ == ModelKind::kHadamard ? 3 : 15; }
  std::size_t n_channels() const { return kind_ == ModelKind::kHadamard ? 2 : 5; }
  std::size_t n_qubits() const { return kind_ == ModelKind::kHadamard ? 1 : 2; }
  double gamma_z() const { return gamma_z_; }
  std::vector<std::string> channel_names() const;
  ChannelLayout layout() const;
  std::size_t default_modes() const { return kind_ == ModelKind::kHadamard ? 2 : 8; }

 private:
  Model(ModelKind kind, double gamma_z) : kind_(kind), gamma_z_(gamma_z) {}

  ModelKind kind_;
  double gamma_z_;
};

/// d rho / dt of the Lindblad equation with controls c_j(t) already evaluated.
Coords eom_rhs(const Model& model, const StateVector& state, std::span<const double> controls);

/// Vector image of i[B_j, rho]; the result always has xi = 0. For the
/// single-qubit model the probe operators are sigma_x / 2 and sigma_y / 2, so
/// the image is i[sigma_j, rho] / 2.
StateVector perturbation_map(const Model& model, std::size_t j, const StateVector& state);

/// Tr(rho_final V rho_initial V^dag) with V the model's target gate (Hadamard
/// or CNOT). `initial` must have xi = 1; `final_state` may be traceless.
double fidelity(const Model& model, const StateVector& initial, const StateVector& final_state);

/// Random product state from per-qubit Bloch components ~ N(0,1). With
/// `normalize` each Bloch vector is scaled to unit length (pure state).
StateVector sample_initial_state(const Model& model, Rng& rng, bool normalize = true);

/// Product state with the given per-qubit Bloch vectors (one per qubit).
StateVector product_state(const Model& model, std::span<const std::array<double, 3>> bloch);

/// <sigma_x>, <sigma_y>, <sigma_z> of qubit `qubit` (0-based) in `state`.
std::array<double, 3> bloch_vector(const Model& model, const StateVector& state, std::size_t qubit);

namespace detail {

// Raw kernels shared with the propagator. `rho` and `out` hold model.dim()
// entries, `controls` holds model.n_channels() entries.
void hadamard_rhs(const double* rho, const double* controls, double* out);
void cnot_rhs(const double* rho, double xi, const double* controls, double gamma_z, double* out);

}  // namespace detail

}  // namespace pepr

#endif  // PEPR_MODELS_H_
