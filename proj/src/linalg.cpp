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

#include "qtraj/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qtraj {

namespace {

void require_square(const Matrix& m, const char* what) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
        std::ostringstream os;
        os << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

HermitianMatrix::HermitianMatrix(const Matrix& x) {
    require_square(x, "HermitianMatrix");
    if (!all_finite(x)) {
        throw InvariantViolation("HermitianMatrix: non-finite entry");
    }
    const double skew = max_abs(x - x.adjoint());
    if (skew > 1e-12 * (1.0 + max_abs(x))) {
        std::ostringstream os;
        os << "HermitianMatrix: ||X - X*||_max = " << skew << " exceeds tolerance";
        throw InvariantViolation(os.str());
    }
    m_ = 0.5 * (x + x.adjoint());
}

EigenDecomposition hermitian_eigen(const HermitianMatrix& x) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(x.matrix());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eigen: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

DensityMatrix::DensityMatrix(const Matrix& rho) {
    HermitianMatrix h(rho);
    const double tr = h.matrix().trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
        std::ostringstream os;
        os << "DensityMatrix: trace " << tr << " differs from 1";
        throw InvariantViolation(os.str());
    }
    const RealVector ev = hermitian_eigen(h).values;
    if (ev(0) < -kNegativityTol) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << ev(0);
        throw InvariantViolation(os.str());
    }
    m_ = h.matrix();
}

DensityMatrix DensityMatrix::from_unnormalized(const Matrix& x) {
    require_square(x, "DensityMatrix::from_unnormalized");
    if (!all_finite(x)) {
        throw InvariantViolation("DensityMatrix: non-finite entry");
    }
    Matrix h = 0.5 * (x + x.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) {
        throw InvariantViolation("DensityMatrix: non-positive trace");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    RealVector ev = solver.eigenvalues();
    if (ev(0) < -kNegativityTol * tr) {
        std::ostringstream os;
        os << "DensityMatrix: eigenvalue " << ev(0) / tr << " (relative) below clipping bound";
        throw InvariantViolation(os.str());
    }
    if (ev(0) < 0.0) {
        ev = ev.cwiseMax(0.0);
        const Matrix& u = solver.eigenvectors();
        h = u * ev.cast<Complex>().asDiagonal() * u.adjoint();
        h = 0.5 * (h + h.adjoint());
    }
    const double norm = h.trace().real();
    return DensityMatrix(h / norm, Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
    if (d < 1) {
        throw std::invalid_argument("maximally_mixed: dimension must be positive");
    }
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), Unchecked{});
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    const double n2 = psi.squaredNorm();
    if (psi.size() < 1 || !(n2 > 0.0) || !psi.allFinite()) {
        throw std::invalid_argument("DensityMatrix::pure: need a nonzero finite vector");
    }
    Matrix rho = psi * psi.adjoint() / n2;
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(rho, Unchecked{});
}

Projection::Projection(const Matrix& p) {
    require_square(p, "Projection");
    if (!all_finite(p)) {
        throw InvariantViolation("Projection: non-finite entry");
    }
    const double skew = max_abs(p - p.adjoint());
    const double idem = max_abs(p * p - p);
    if (skew > 1e-12 || idem > 1e-10) {
        std::ostringstream os;
        os << "Projection: ||p - p*|| = " << skew << ", ||p^2 - p|| = " << idem;
        throw InvariantViolation(os.str());
    }
    m_ = 0.5 * (p + p.adjoint());
    const double tr = m_.trace().real();
    rank_ = static_cast<int>(std::lround(tr));
    if (std::abs(tr - rank_) > 1e-8) {
        throw InvariantViolation("Projection: trace is not an integer");
    }
}

Projection Projection::identity(int d) {
    return Projection(Matrix::Identity(d, d));
}

Projection Projection::from_orthonormal_columns(const Matrix& cols) {
    Matrix p = cols * cols.adjoint();
    return Projection(0.5 * (p + p.adjoint()));
}

RealVector spectrum(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

PolarDecomposition polar_decompose(const Matrix& a, double rank_tol) {
    require_square(a, "polar_decompose");
    const Eigen::Index n = a.rows();
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();  // descending
    const Matrix& u = svd.matrixU();
    const Matrix& w = svd.matrixV();

    const double cut = rank_tol * (s.size() > 0 ? s(0) : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cut && s(r) > 0.0) {
        ++r;
    }
    PolarDecomposition out;
    out.positive = w * s.cast<Complex>().asDiagonal() * w.adjoint();
    out.positive = 0.5 * (out.positive + out.positive.adjoint());
    out.isometry = Matrix::Zero(n, n);
    if (r > 0) {
        out.isometry = u.leftCols(r) * w.leftCols(r).adjoint();
    }
    return out;
}

double det_pos(const HermitianMatrix& x, double rank_tol) {
    const RealVector ev = hermitian_eigen(x).values;
    const double scale = ev.cwiseAbs().maxCoeff();
    if (ev(0) < -rank_tol * scale) {
        std::ostringstream os;
        os << "det_pos: matrix is not positive semidefinite (eigenvalue " << ev(0) << ")";
        throw InvariantViolation(os.str());
    }
    const double cut = rank_tol * std::max(ev(ev.size() - 1), 0.0);
    double prod = 1.0;
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
        if (ev(j) > cut && ev(j) > 0.0) {
            prod *= ev(j);
        }
    }
    return prod;
}

Projection support_projection(const HermitianMatrix& x, double rank_tol) {
    const EigenDecomposition eig = hermitian_eigen(x);
    const Eigen::Index n = eig.values.size();
    const double cut = rank_tol * std::max(eig.values(n - 1), 0.0);
    Eigen::Index first = n;
    while (first > 0 && eig.values(first - 1) > cut && eig.values(first - 1) > 0.0) {
        --first;
    }
    if (first == n) {
        return Projection(Matrix::Zero(n, n));
    }
    return Projection::from_orthonormal_columns(eig.vectors.rightCols(n - first));
}

double moment_trace(const DensityMatrix& rho, int m) {
    if (m < 1) {
        throw std::invalid_argument("moment_trace: order m must be >= 1");
    }
    return moment_traces(rho, m).back();
}

std::vector<double> moment_traces(const DensityMatrix& rho, int m_max) {
    if (m_max < 1) {
        throw std::invalid_argument("moment_traces: m_max must be >= 1");
    }
    const RealVector ev = spectrum(rho).cwiseMax(0.0);
    std::vector<double> out(static_cast<std::size_t>(m_max), 0.0);
    RealVector power = ev;
    for (int m = 1; m <= m_max; ++m) {
        out[static_cast<std::size_t>(m - 1)] = power.sum();
        power = power.cwiseProduct(ev);
    }
    return out;
}

bool spectra_unitarily_equivalent(const DensityMatrix& a, const DensityMatrix& b, double tol) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("spectra_unitarily_equivalent: dimension mismatch");
    }
    return (spectrum(a) - spectrum(b)).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qtraj
