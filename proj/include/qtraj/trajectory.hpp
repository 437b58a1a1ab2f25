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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/instrument.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

/// Zero-based outcome indices i_1..i_m.
using OutcomeWord = std::vector<int>;

struct StepResult {
    int outcome = 0;
    DensityMatrix state;
    double prob = 0.0;
};

/// Draws one outcome with probability tr(a_i θ a_i*) and returns the
/// conditioned posterior. Sampling is inverse-CDF over outcomes in index
/// order with one rng.uniform() per call.
StepResult step(const KrausInstrument& ins, const DensityMatrix& rho, Rng& rng);

struct TrajectoryConfig {
    int n_steps = 0;
    std::uint64_t seed = 0;
    DensityMatrix initial_state;
};

/// One realized path. states[0] is the initial state; states[n] is the
/// state after word[0..n−1].
struct PathRecord {
    std::string instrument_id;
    std::uint64_t seed = 0;
    OutcomeWord word;
    std::vector<DensityMatrix> states;
    std::vector<double> step_probs;

    const DensityMatrix& initial_state() const { return states.front(); }
    const DensityMatrix& final_state() const { return states.back(); }
    int steps() const { return static_cast<int>(word.size()); }
};

PathRecord simulate(const KrausInstrument& ins, const TrajectoryConfig& cfg);

/// tr(a_w θ0 a_w*) for a_w = a_{i_m}⋯a_{i_1}; 1 for the empty word.
double cylinder_probability(const KrausInstrument& ins, const DensityMatrix& rho0, const OutcomeWord& word);

/// a_w θ0 a_w* normalized, or empty if its trace is ≤ kProbFloor.
std::optional<DensityMatrix> conditional_state(const KrausInstrument& ins, const DensityMatrix& rho0,
                                               const OutcomeWord& word);

/// Upper bound on k^m accepted by the word enumerators.
inline constexpr std::uint64_t kWordBudget = 10'000'000;

/// Calls fn on all k^m words in lexicographic order.
void for_each_word(int k, int m, const std::function<void(const OutcomeWord&)>& fn);

std::vector<OutcomeWord> enumerate_words(int k, int m);

/// Per-trajectory data kept by run_ensemble.
struct TrajectorySummary {
    std::uint64_t seed = 0;
    std::vector<double> purity;         // tr(Θ_n²), n = 0..n_steps
    std::vector<double> final_moments;  // tr(Θ_N^m), m = 1..d
    DensityMatrix final_state;
};

/// Runs n_traj trajectories; trajectory t uses seed base_seed + t.
/// Results are indexed by t and do not depend on the worker count
/// (workers == 0 means std::thread::hardware_concurrency()).
std::vector<TrajectorySummary> run_ensemble(const KrausInstrument& ins, const DensityMatrix& rho0, int n_steps,
                                            int n_traj, std::uint64_t base_seed, unsigned workers = 0);

/// Calls fn(t) for t in [0, count) on a pool of workers; each index runs once.
void parallel_for(int count, unsigned workers, const std::function<void(int)>& fn);

}  // namespace qtraj
