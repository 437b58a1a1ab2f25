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

#include "qtraj/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtraj {

namespace {

void require_order(int m) {
    if (m < 1) {
        throw std::invalid_argument("moment order must be >= 1");
    }
}

// Prior moment plus (π_i, posterior moment) for each possible outcome.
struct OneStep {
    double prior = 0.0;
    std::vector<std::pair<double, double>> branches;
};

OneStep one_step_moments(const KrausInstrument& ins, const DensityMatrix& rho, int m) {
    require_order(m);
    OneStep out;
    out.prior = moment_trace(rho, m);
    for (int i = 0; i < ins.outcomes(); ++i) {
        const Matrix& a = ins.op(i);
        const Matrix x = a * rho.matrix() * a.adjoint();
        const double p = x.trace().real();
        if (p <= kProbFloor) {
            continue;
        }
        out.branches.emplace_back(p, moment_trace(DensityMatrix::from_unnormalized(x), m));
    }
    return out;
}

}  // namespace

std::vector<double> moments(const DensityMatrix& rho, int m_max) {
    return moment_traces(rho, m_max);
}

MomentSeries moment_series(const PathRecord& path, int m) {
    require_order(m);
    MomentSeries s{m, {}};
    s.values.reserve(path.states.size());
    for (const DensityMatrix& rho : path.states) {
        s.values.push_back(moment_trace(rho, m));
    }
    return s;
}

double nielsen_gap(const KrausInstrument& ins, const DensityMatrix& rho, int m) {
    const OneStep s = one_step_moments(ins, rho, m);
    double expected = 0.0;
    for (const auto& [p, mom] : s.branches) {
        expected += p * mom;
    }
    return expected - s.prior;
}

double delta_m(const KrausInstrument& ins, const DensityMatrix& rho, int m) {
    const OneStep s = one_step_moments(ins, rho, m);
    double acc = 0.0;
    for (const auto& [p, mom] : s.branches) {
        const double diff = mom - s.prior;
        acc += p * diff * diff;
    }
    return acc;
}

double delta_sum(const KrausInstrument& ins, const DensityMatrix& rho) {
    // Spectra are computed once per branch rather than once per order.
    const int d = ins.dim();
    const std::vector<double> prior = moment_traces(rho, d);
    std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < ins.outcomes(); ++i) {
        const Matrix& a = ins.op(i);
        const Matrix x = a * rho.matrix() * a.adjoint();
        const double p = x.trace().real();
        if (p <= kProbFloor) {
            continue;
        }
        const std::vector<double> post = moment_traces(DensityMatrix::from_unnormalized(x), d);
        for (int m = 0; m < d; ++m) {
            const double diff = post[static_cast<std::size_t>(m)] - prior[static_cast<std::size_t>(m)];
            acc[static_cast<std::size_t>(m)] += p * diff * diff;
        }
    }
    double total = 0.0;
    for (double v : acc) {
        total += v;
    }
    return total;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::kPurifies:
            return "purifies";
        case Classification::kNonPurifying:
            return "non-purifying";
        case Classification::kUndecided:
            return "undecided";
    }
    return "undecided";
}

PurificationReport classify_purity(std::span<const double> purity, const ClassifierParams& params) {
    if (purity.empty()) {
        throw std::invalid_argument("classify_purity: empty series");
    }
    if (params.window < 1 || !(params.plateau_margin > 0.0 && params.plateau_margin < 1.0) ||
        !(params.purity_threshold > 1.0 - params.plateau_margin && params.purity_threshold <= 1.0) ||
        params.plateau_tol < 0.0) {
        throw std::invalid_argument("classify_purity: parameters outside their valid ranges");
    }
    const std::size_t n = purity.size();
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(params.window), n);
    const auto tail = purity.subspan(n - w);

    PurificationReport rep;
    if (w >= 2) {
        double acc = 0.0;
        for (std::size_t j = 1; j < w; ++j) {
            const double inc = tail[j] - tail[j - 1];
            acc += inc * inc;
        }
        rep.delta2_tail = acc / static_cast<double>(w - 1);
    }

    const bool sustained =
        std::all_of(tail.begin(), tail.end(), [&](double p) { return p >= params.purity_threshold; });
    if (sustained) {
        rep.classification = Classification::kPurifies;
        std::size_t first = n;
        while (first > 0 && purity[first - 1] >= params.purity_threshold) {
            --first;
        }
        rep.n_reached = static_cast<int>(first);
        return rep;
    }
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    if (*hi - *lo < params.plateau_tol && tail.back() <= 1.0 - params.plateau_margin) {
        rep.classification = Classification::kNonPurifying;
    }
    return rep;
}

PurificationReport classify_purification(const PathRecord& path, const ClassifierParams& params) {
    if (path.states.empty()) {
        throw std::invalid_argument("classify_purification: empty path");
    }
    std::vector<double> purity;
    purity.reserve(path.states.size());
    for (const DensityMatrix& rho : path.states) {
        purity.push_back(rho.matrix().squaredNorm());
    }
    PurificationReport rep = classify_purity(purity, params);
    rep.final_moments = moment_traces(path.final_state(), path.final_state().dim());
    return rep;
}

double spectrum_drift(const PathRecord& path) {
    double drift = 0.0;
    for (std::size_t n = 1; n < path.states.size(); ++n) {
        const RealVector diff = spectrum(path.states[n]) - spectrum(path.states[n - 1]);
        drift = std::max(drift, diff.cwiseAbs().maxCoeff());
    }
    return drift;
}

}  // namespace qtraj
