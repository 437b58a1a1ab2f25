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

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qtraj {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Raised when a value violates a documented type invariant (non-Hermitian
/// input, negative spectrum, broken completeness, ...).
class InvariantViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Relative eigenvalue threshold below which a spectral value counts as zero.
inline constexpr double kDefaultRankTol = 1e-8;

/// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& m);

/// True when every entry is finite.
bool all_finite(const Matrix& m);

/// Kronecker product a ⊗ b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Self-adjoint matrix. Construction checks ‖X − X*‖_max ≤ 1e−12·(1 + ‖X‖_max)
/// and stores the symmetrized (X + X*)/2.
class HermitianMatrix {
  public:
    explicit HermitianMatrix(const Matrix& x);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

  private:
    Matrix m_;
};

/// Positive semidefinite, unit-trace matrix.
class DensityMatrix {
  public:
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kNegativityTol = 1e-10;

    /// Validating constructor; throws InvariantViolation on a bad input.
    explicit DensityMatrix(const Matrix& rho);

    /// Projects an approximately positive matrix onto the state space:
    /// hermitize, clip eigenvalues in [−1e−10·tr, 0) to zero, divide by the
    /// trace. Larger negativity or a non-positive trace is an error.
    static DensityMatrix from_unnormalized(const Matrix& x);

    static DensityMatrix maximally_mixed(int d);
    /// |ψ⟩⟨ψ|/‖ψ‖².
    static DensityMatrix pure(const Vector& psi);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

  private:
    struct Unchecked {};
    DensityMatrix(Matrix rho, Unchecked) : m_(std::move(rho)) {}

    Matrix m_;
};

/// Orthogonal projection: p² = p = p*, integral trace.
class Projection {
  public:
    explicit Projection(const Matrix& p);

    static Projection identity(int d);
    /// Projection onto the span of the given orthonormal columns.
    static Projection from_orthonormal_columns(const Matrix& cols);

    int dim() const { return static_cast<int>(m_.rows()); }
    int rank() const { return rank_; }
    const Matrix& matrix() const { return m_; }

  private:
    Matrix m_;
    int rank_ = 0;
};

struct EigenDecomposition {
    RealVector values;  // ascending
    Matrix vectors;     // orthonormal columns, vectors.col(j) ↔ values(j)
};

EigenDecomposition hermitian_eigen(const HermitianMatrix& x);

/// Ascending spectrum of a density matrix.
RealVector spectrum(const DensityMatrix& rho);

/// A = V·P with P = sqrt(A*A) and V a partial isometry, V*V = supp(P).
struct PolarDecomposition {
    Matrix isometry;  // V
    Matrix positive;  // P
};

PolarDecomposition polar_decompose(const Matrix& a, double rank_tol = kDefaultRankTol);

/// Product of the eigenvalues above rank_tol·λ_max. det_pos(0) = 1.
double det_pos(const HermitianMatrix& x, double rank_tol = kDefaultRankTol);

/// Projection onto eigenvectors with eigenvalue > rank_tol·λ_max.
Projection support_projection(const HermitianMatrix& x, double rank_tol = kDefaultRankTol);

/// tr(θ^m) computed as Σ λ_j^m.
double moment_trace(const DensityMatrix& rho, int m);

/// tr(θ^m) for m = 1..m_max from a single eigendecomposition.
std::vector<double> moment_traces(const DensityMatrix& rho, int m_max);

/// True iff the sorted spectra agree to tol in max norm.
bool spectra_unitarily_equivalent(const DensityMatrix& a, const DensityMatrix& b, double tol);

}  // namespace qtraj
