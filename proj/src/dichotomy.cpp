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

#include "qtraj/dichotomy.hpp"

#include <sstream>

namespace qtraj {

std::string to_string(Alternative a) {
    switch (a) {
        case Alternative::kPurification:
            return "purification";
        case Alternative::kDarkProjection:
            return "dark-projection";
        case Alternative::kUndetermined:
            return "undetermined";
    }
    return "undetermined";
}

DichotomyReport dichotomy_report(const KrausInstrument& ins, const std::optional<DensityMatrix>& rho0,
                                 const DichotomyBudgets& budgets) {
    if (budgets.n_steps < 1 || budgets.n_traj < 1) {
        throw std::invalid_argument("dichotomy_report: budgets must be positive");
    }
    const DensityMatrix start = rho0 ? *rho0 : DensityMatrix::maximally_mixed(ins.dim());
    const std::vector<TrajectorySummary> runs =
        run_ensemble(ins, start, budgets.n_steps, budgets.n_traj, budgets.base_seed, budgets.workers);

    DichotomyReport rep;
    rep.trajectories.reserve(runs.size());
    for (const TrajectorySummary& run : runs) {
        PurificationReport pr = classify_purity(run.purity, budgets.classifier);
        pr.final_moments = run.final_moments;
        switch (pr.classification) {
            case Classification::kPurifies:
                ++rep.purifies;
                break;
            case Classification::kNonPurifying:
                ++rep.non_purifying;
                break;
            case Classification::kUndecided:
                ++rep.undecided;
                break;
        }
        rep.trajectories.push_back(std::move(pr));
    }

    if (rep.purifies < budgets.n_traj) {
        DetectParams dp = budgets.detect;
        dp.n_steps = budgets.n_steps;
        dp.n_traj = budgets.n_traj;
        dp.base_seed = budgets.base_seed;
        dp.workers = budgets.workers;
        rep.detection = detect_dark_in(ins, runs, dp);
    }

    const double fraction = static_cast<double>(rep.purifies) / static_cast<double>(budgets.n_traj);
    std::ostringstream os;
    if (rep.detection && rep.detection->projection) {
        rep.alternative = Alternative::kDarkProjection;
        os << "verified dark projection of rank " << rep.detection->projection->p.rank();
    } else if (fraction >= budgets.support_fraction) {
        rep.alternative = Alternative::kPurification;
        os << rep.purifies << " of " << budgets.n_traj << " trajectories purified; no dark projection found";
    } else {
        rep.alternative = Alternative::kUndetermined;
        os << "only " << rep.purifies << " of " << budgets.n_traj
           << " trajectories purified and no dark projection was verified";
    }
    rep.note = os.str();
    return rep;
}

}  // namespace qtraj
