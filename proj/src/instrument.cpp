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

#include "qtraj/instrument.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qtraj {

ValidationReport validate(const std::vector<Matrix>& operators) {
    ValidationReport report;
    report.residual = std::numeric_limits<double>::infinity();
    if (operators.empty()) {
        report.message = "instrument has no operators";
        return report;
    }
    const Eigen::Index d = operators.front().rows();
    if (d < 2) {
        report.message = "system dimension must be at least 2";
        return report;
    }
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < operators.size(); ++i) {
        const Matrix& a = operators[i];
        if (a.rows() != d || a.cols() != d) {
            std::ostringstream os;
            os << "operator " << i << " has shape " << a.rows() << "x" << a.cols() << ", expected " << d << "x"
               << d;
            report.message = os.str();
            return report;
        }
        if (!a.allFinite()) {
            std::ostringstream os;
            os << "operator " << i << " has a non-finite entry";
            report.message = os.str();
            return report;
        }
        sum.noalias() += a.adjoint() * a;
    }
    report.residual = max_abs(sum - Matrix::Identity(d, d));
    report.ok = report.residual <= kCompletenessTol;
    std::ostringstream os;
    os << "completeness residual " << report.residual;
    report.message = os.str();
    return report;
}

ValidationReport validate(const KrausInstrument& ins) {
    return validate(ins.operators());
}

KrausInstrument::KrausInstrument(std::vector<Matrix> operators) : ops_(std::move(operators)) {
    const ValidationReport report = validate(ops_);
    if (!report.ok) {
        throw InvariantViolation("KrausInstrument: " + report.message);
    }
    d_ = static_cast<int>(ops_.front().rows());
    effects_.reserve(ops_.size());
    for (const Matrix& a : ops_) {
        Matrix e = a.adjoint() * a;
        effects_.push_back(0.5 * (e + e.adjoint()));
    }
}

bool is_unitary(const Matrix& u, double tol) {
    if (u.rows() != u.cols() || u.rows() == 0) {
        return false;
    }
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= tol;
}

Projection block_projection(int d, int first, int size) {
    Matrix p = Matrix::Zero(d, d);
    p.block(first, first, size, size).setIdentity();
    return Projection(p);
}

KrausInstrument from_von_neumann(const std::vector<Projection>& projections) {
    if (projections.empty()) {
        throw std::invalid_argument("from_von_neumann: empty projection family");
    }
    const int d = projections.front().dim();
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < projections.size(); ++i) {
        if (projections[i].dim() != d) {
            throw std::invalid_argument("from_von_neumann: dimension mismatch");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (max_abs(projections[i].matrix() * projections[j].matrix()) > 1e-10) {
                std::ostringstream os;
                os << "from_von_neumann: projections " << j << " and " << i << " are not orthogonal";
                throw std::invalid_argument(os.str());
            }
        }
        sum += projections[i].matrix();
    }
    if (max_abs(sum - Matrix::Identity(d, d)) > 1e-10) {
        throw std::invalid_argument("from_von_neumann: projections do not sum to the identity");
    }
    std::vector<Matrix> ops;
    ops.reserve(projections.size());
    for (const Projection& p : projections) {
        ops.push_back(p.matrix());
    }
    return KrausInstrument(std::move(ops));
}

KrausInstrument from_ancilla_unitary(const AncillaSpec& spec) {
    if (spec.k < 1 || spec.beta.size() != spec.k) {
        throw std::invalid_argument("from_ancilla_unitary: beta must have length k >= 1");
    }
    if (std::abs(spec.beta.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("from_ancilla_unitary: ancilla state is not a unit vector");
    }
    if (spec.u.rows() != spec.u.cols() || spec.u.rows() % spec.k != 0) {
        throw std::invalid_argument("from_ancilla_unitary: coupling must be square with size divisible by k");
    }
    if (!is_unitary(spec.u, 1e-10)) {
        throw std::invalid_argument("from_ancilla_unitary: coupling is not unitary");
    }
    const Eigen::Index d = spec.u.rows() / spec.k;
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(spec.k));
    for (int i = 0; i < spec.k; ++i) {
        Matrix a = Matrix::Zero(d, d);
        for (int j = 0; j < spec.k; ++j) {
            a += spec.beta(j) * spec.u.block(i * d, j * d, d, d);
        }
        ops.push_back(std::move(a));
    }
    return KrausInstrument(std::move(ops));
}

Matrix random_unitary(int n, Rng& rng) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(i, j) = Complex(re, im) / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix& r = qr.matrixQR();
    for (int j = 0; j < n; ++j) {
        const Complex rjj = r(j, j);
        const double mag = std::abs(rjj);
        if (mag > 0.0) {
            q.col(j) *= rjj / mag;
        }
    }
    return q;
}

KrausInstrument block_permutation_instrument(int l, int e, const Eigen::MatrixXd& pi, std::uint64_t isometry_seed) {
    if (l < 1 || e < 1 || l * e < 2) {
        throw std::invalid_argument("block_permutation_instrument: need l, e >= 1 and l*e >= 2");
    }
    if (pi.rows() != l || pi.cols() != l) {
        throw std::invalid_argument("block_permutation_instrument: pi must be l x l");
    }
    for (int i = 0; i < l; ++i) {
        if ((pi.row(i).array() < 0.0).any() || !pi.row(i).allFinite()) {
            throw std::invalid_argument("block_permutation_instrument: negative or non-finite transition entry");
        }
        if (std::abs(pi.row(i).sum() - 1.0) > 1e-12) {
            std::ostringstream os;
            os << "block_permutation_instrument: row " << i << " of pi sums to " << pi.row(i).sum();
            throw std::invalid_argument(os.str());
        }
    }
    const int d = l * e;
    Rng rng(isometry_seed);
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(l * l));
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
            Matrix a = Matrix::Zero(d, d);
            a.block(j * e, i * e, e, e) = std::sqrt(pi(i, j)) * random_unitary(e, rng);
            ops.push_back(std::move(a));
        }
    }
    return KrausInstrument(std::move(ops));
}

KrausInstrument tensor_dark_instrument(const KrausInstrument& b, const std::vector<Matrix>& unitaries) {
    if (b.dim() != 2) {
        throw std::invalid_argument("tensor_dark_instrument: first factor must act on C^2");
    }
    if (static_cast<int>(unitaries.size()) != b.outcomes()) {
        throw std::invalid_argument("tensor_dark_instrument: need one unitary per outcome");
    }
    const Eigen::Index big_d = unitaries.front().rows();
    std::vector<Matrix> ops;
    ops.reserve(unitaries.size());
    for (int i = 0; i < b.outcomes(); ++i) {
        const Matrix& u = unitaries[static_cast<std::size_t>(i)];
        if (u.rows() != big_d || !is_unitary(u, 1e-10)) {
            std::ostringstream os;
            os << "tensor_dark_instrument: factor " << i << " is not a unitary of dimension " << big_d;
            throw std::invalid_argument(os.str());
        }
        ops.push_back(kron(b.op(i), u));
    }
    return KrausInstrument(std::move(ops));
}

KrausInstrument random_instrument(int d, int k, std::uint64_t seed) {
    if (d < 2 || k < 2) {
        throw std::invalid_argument("random_instrument: need d >= 2 and k >= 2");
    }
    Rng rng(seed);
    const Matrix u = random_unitary(d * k, rng);
    AncillaSpec spec{k, Vector::Unit(k, 0), u};
    return from_ancilla_unitary(spec);
}

std::vector<double> outcome_probabilities(const KrausInstrument& ins, const DensityMatrix& rho) {
    if (rho.dim() != ins.dim()) {
        throw std::invalid_argument("outcome_probabilities: state dimension mismatch");
    }
    std::vector<double> probs(static_cast<std::size_t>(ins.outcomes()));
    for (int i = 0; i < ins.outcomes(); ++i) {
        // tr(a θ a*) = tr(a*a θ)
        probs[static_cast<std::size_t>(i)] = (ins.effect(i).cwiseProduct(rho.matrix().transpose())).sum().real();
    }
    return probs;
}

Posterior apply(const KrausInstrument& ins, int outcome, const DensityMatrix& rho) {
    if (outcome < 0 || outcome >= ins.outcomes()) {
        std::ostringstream os;
        os << "apply: outcome " << outcome << " out of range [0, " << ins.outcomes() << ")";
        throw std::invalid_argument(os.str());
    }
    if (rho.dim() != ins.dim()) {
        throw std::invalid_argument("apply: state dimension mismatch");
    }
    const Matrix& a = ins.op(outcome);
    const Matrix x = a * rho.matrix() * a.adjoint();
    Posterior post;
    post.prob = x.trace().real();
    if (post.prob > kProbFloor) {
        post.state = DensityMatrix::from_unnormalized(x);
    }
    return post;
}

DensityMatrix mean_channel(const KrausInstrument& ins, const DensityMatrix& rho) {
    if (rho.dim() != ins.dim()) {
        throw std::invalid_argument("mean_channel: state dimension mismatch");
    }
    Matrix sum = Matrix::Zero(ins.dim(), ins.dim());
    for (const Matrix& a : ins.operators()) {
        sum.noalias() += a * rho.matrix() * a.adjoint();
    }
    const double tr = sum.trace().real();
    if (std::abs(tr - 1.0) > 1e-10) {
        throw InvariantViolation("mean_channel: trace not preserved");
    }
    return DensityMatrix::from_unnormalized(sum);
}

}  // namespace qtraj
