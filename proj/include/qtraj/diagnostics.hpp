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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtraj/instrument.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

/// tr(θ^m), m = 1..m_max.
std::vector<double> moments(const DensityMatrix& rho, int m_max);

/// M_n^(m) = tr(Θ_n^m) along one path.
struct MomentSeries {
    int m = 2;
    std::vector<double> values;
};

MomentSeries moment_series(const PathRecord& path, int m);

/// Σ_i π_i tr((θ'_i)^m) − tr(θ^m). Nonnegative up to round-off; outcomes
/// with π_i ≤ kProbFloor contribute nothing.
double nielsen_gap(const KrausInstrument& ins, const DensityMatrix& rho, int m);

/// Σ_i π_i (tr((θ'_i)^m) − tr(θ^m))²: the conditional mean squared
/// one-step increment of the m-th moment.
double delta_m(const KrausInstrument& ins, const DensityMatrix& rho, int m);

/// Σ_{m=1..d} delta_m.
double delta_sum(const KrausInstrument& ins, const DensityMatrix& rho);

enum class Classification { kPurifies, kNonPurifying, kUndecided };

std::string to_string(Classification c);

/// Finite-run cutoffs for the purification classifier. Valid ranges:
/// purity_threshold ∈ (1 − plateau_margin, 1], window ≥ 1, plateau_tol ≥ 0,
/// plateau_margin ∈ (0, 1).
struct ClassifierParams {
    double purity_threshold = 1.0 - 1e-8;
    int window = 50;
    double plateau_tol = 1e-9;
    double plateau_margin = 1e-3;
};

struct PurificationReport {
    Classification classification = Classification::kUndecided;
    std::optional<int> n_reached;  // first n from which purity stays ≥ threshold
    std::vector<double> final_moments;
    double delta2_tail = 0.0;  // mean of (M_{n+1}^(2) − M_n^(2))² over the window
};

/// Classifies a purity series tr(Θ_n²), n = 0..N.
PurificationReport classify_purity(std::span<const double> purity, const ClassifierParams& params = {});

PurificationReport classify_purification(const PathRecord& path, const ClassifierParams& params = {});

/// Largest max-norm distance between sorted spectra of consecutive states.
double spectrum_drift(const PathRecord& path);

}  // namespace qtraj
