// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/linalg.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

/// Outcome probabilities at or below this value are treated as impossible.
inline constexpr double kProbFloor = 1e-14;

/// Completeness tolerance on ‖Σ a_i*a_i − I‖_max.
inline constexpr double kCompletenessTol = 1e-10;

struct ValidationReport {
    bool ok = false;
    double residual = 0.0;  // ‖Σ a_i*a_i − I‖_max, or +inf on shape errors
    std::string message;
};

/// Checks shape and completeness of a candidate operator list. Never throws.
ValidationReport validate(const std::vector<Matrix>& operators);

/// A perfect measurement: outcome i maps θ to a_i θ a_i*. Immutable; the
/// constructor enforces d ≥ 2, k ≥ 1 and completeness.
class KrausInstrument {
  public:
    explicit KrausInstrument(std::vector<Matrix> operators);

    int dim() const { return d_; }
    int outcomes() const { return static_cast<int>(ops_.size()); }
    const Matrix& op(int i) const { return ops_[static_cast<std::size_t>(i)]; }
    const std::vector<Matrix>& operators() const { return ops_; }

    /// Cached a_i* a_i.
    const Matrix& effect(int i) const { return effects_[static_cast<std::size_t>(i)]; }

  private:
    std::vector<Matrix> ops_;
    std::vector<Matrix> effects_;
    int d_ = 0;
};

ValidationReport validate(const KrausInstrument& ins);

/// Pure-ancilla indirect measurement data: u is a (k·d)×(k·d) unitary read as
/// a k×k grid of d×d blocks u_{ij}; beta is the ancilla state vector.
struct AncillaSpec {
    int k = 0;
    Vector beta;
    Matrix u;
};

/// a_i = p_i for a complete orthogonal family of projections.
KrausInstrument from_von_neumann(const std::vector<Projection>& projections);

/// a_i = Σ_j β_j u_{ij}.
KrausInstrument from_ancilla_unitary(const AncillaSpec& spec);

/// l orthogonal e-dimensional blocks H_0..H_{l−1} of C^{l·e}. Outcome
/// index i·l + j carries a_{ij} = √π_{ij}·v_{ij}, where v_{ij} is a seeded
/// Haar e×e unitary placed at block (row j, column i), mapping H_i onto H_j.
KrausInstrument block_permutation_instrument(int l, int e, const Eigen::MatrixXd& pi,
                                             std::uint64_t isometry_seed);

/// a_i = b_i ⊗ u_i on C² ⊗ C^D.
KrausInstrument tensor_dark_instrument(const KrausInstrument& b, const std::vector<Matrix>& unitaries);

/// Seeded generic instrument: first block column of a Haar unitary on C^{k·d}
/// (ancilla state e_1).
KrausInstrument random_instrument(int d, int k, std::uint64_t seed);

/// Haar-distributed n×n unitary (QR of a complex Ginibre matrix with the
/// phases of diag(R) divided out).
Matrix random_unitary(int n, Rng& rng);

/// ‖u*u − I‖_max ≤ tol.
bool is_unitary(const Matrix& u, double tol = 1e-10);

/// Projection onto the coordinate block [first, first + size).
Projection block_projection(int d, int first, int size);

struct Posterior {
    double prob = 0.0;                   // tr(a_i θ a_i*)
    std::optional<DensityMatrix> state;  // empty when prob ≤ kProbFloor
};

/// One outcome of the measurement applied to θ.
Posterior apply(const KrausInstrument& ins, int outcome, const DensityMatrix& rho);

/// Outcome probabilities tr(a_i θ a_i*), i = 0..k−1.
std::vector<double> outcome_probabilities(const KrausInstrument& ins, const DensityMatrix& rho);

/// Σ_i a_i θ a_i*.
DensityMatrix mean_channel(const KrausInstrument& ins, const DensityMatrix& rho);

}  // namespace qtraj
