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
#include <string>
#include <vector>

#include "qtraj/darkspace.hpp"
#include "qtraj/diagnostics.hpp"

namespace qtraj {

struct DichotomyBudgets {
    int n_steps = 2000;
    int n_traj = 100;
    std::uint64_t base_seed = 0;
    unsigned workers = 0;
    ClassifierParams classifier;
    /// Detection cutoffs; its ensemble fields are taken from the budgets above.
    DetectParams detect;
    /// Fraction of purifying trajectories needed to report alternative (i).
    double support_fraction = 0.95;
};

enum class Alternative {
    kPurification,    // trajectories purify
    kDarkProjection,  // a verified dark projection of rank ≥ 2 exists
    kUndetermined,
};

std::string to_string(Alternative a);

struct DichotomyReport {
    Alternative alternative = Alternative::kUndetermined;
    int purifies = 0;
    int non_purifying = 0;
    int undecided = 0;
    std::vector<PurificationReport> trajectories;  // indexed like the ensemble
    std::optional<DetectionResult> detection;      // run only on non-purifying evidence
    std::string note;
};

/// Runs an ensemble, classifies every trajectory and, when some do not
/// purify, looks for a dark projection among them.
DichotomyReport dichotomy_report(const KrausInstrument& ins, const std::optional<DensityMatrix>& rho0,
                                 const DichotomyBudgets& budgets = {});

}  // namespace qtraj
