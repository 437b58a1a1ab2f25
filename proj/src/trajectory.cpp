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

#include "qtraj/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace qtraj {

namespace {

// Round-off window for Σπ_i before renormalizing the outcome distribution.
constexpr double kProbSumTol = 1e-9;

void check_word(const KrausInstrument& ins, const OutcomeWord& word) {
    for (int i : word) {
        if (i < 0 || i >= ins.outcomes()) {
            std::ostringstream os;
            os << "outcome " << i << " out of range [0, " << ins.outcomes() << ")";
            throw std::invalid_argument(os.str());
        }
    }
}

Matrix apply_word(const KrausInstrument& ins, const DensityMatrix& rho0, const OutcomeWord& word) {
    if (rho0.dim() != ins.dim()) {
        throw std::invalid_argument("state dimension does not match instrument");
    }
    check_word(ins, word);
    Matrix x = rho0.matrix();
    for (int i : word) {
        x = ins.op(i) * x * ins.op(i).adjoint();
    }
    return x;
}

double purity_of(const DensityMatrix& rho) {
    return rho.matrix().squaredNorm();
}

}  // namespace

StepResult step(const KrausInstrument& ins, const DensityMatrix& rho, Rng& rng) {
    std::vector<double> probs = outcome_probabilities(ins, rho);
    double total = 0.0;
    for (double& p : probs) {
        if (p <= kProbFloor) {
            p = 0.0;
        }
        total += p;
    }
    if (total <= 0.0) {
        throw std::runtime_error("step: every outcome probability is below the floor");
    }
    if (std::abs(total - 1.0) > kProbSumTol) {
        std::ostringstream os;
        os << "step: outcome probabilities sum to " << total;
        throw InvariantViolation(os.str());
    }

    const double u = rng.uniform() * total;
    int chosen = -1;
    double cdf = 0.0;
    for (int i = 0; i < ins.outcomes(); ++i) {
        if (probs[static_cast<std::size_t>(i)] == 0.0) {
            continue;
        }
        chosen = i;
        cdf += probs[static_cast<std::size_t>(i)];
        if (u < cdf) {
            break;
        }
    }
    const Matrix& a = ins.op(chosen);
    return {chosen, DensityMatrix::from_unnormalized(a * rho.matrix() * a.adjoint()),
            probs[static_cast<std::size_t>(chosen)]};
}

PathRecord simulate(const KrausInstrument& ins, const TrajectoryConfig& cfg) {
    if (cfg.n_steps < 0) {
        throw std::invalid_argument("simulate: n_steps must be nonnegative");
    }
    if (cfg.initial_state.dim() != ins.dim()) {
        throw std::invalid_argument("simulate: initial state dimension does not match instrument");
    }
    PathRecord rec;
    rec.seed = cfg.seed;
    rec.states.reserve(static_cast<std::size_t>(cfg.n_steps) + 1);
    rec.word.reserve(static_cast<std::size_t>(cfg.n_steps));
    rec.step_probs.reserve(static_cast<std::size_t>(cfg.n_steps));
    rec.states.push_back(cfg.initial_state);

    Rng rng(cfg.seed);
    for (int n = 0; n < cfg.n_steps; ++n) {
        StepResult s = step(ins, rec.states.back(), rng);
        rec.word.push_back(s.outcome);
        rec.step_probs.push_back(s.prob);
        rec.states.push_back(std::move(s.state));
    }
    return rec;
}

double cylinder_probability(const KrausInstrument& ins, const DensityMatrix& rho0, const OutcomeWord& word) {
    return apply_word(ins, rho0, word).trace().real();
}

std::optional<DensityMatrix> conditional_state(const KrausInstrument& ins, const DensityMatrix& rho0,
                                               const OutcomeWord& word) {
    if (word.empty()) {
        return rho0;
    }
    const Matrix x = apply_word(ins, rho0, word);
    if (x.trace().real() <= kProbFloor) {
        return std::nullopt;
    }
    return DensityMatrix::from_unnormalized(x);
}

void for_each_word(int k, int m, const std::function<void(const OutcomeWord&)>& fn) {
    if (k < 1 || m < 0) {
        throw std::invalid_argument("for_each_word: need k >= 1 and m >= 0");
    }
    std::uint64_t count = 1;
    for (int j = 0; j < m; ++j) {
        count *= static_cast<std::uint64_t>(k);
        if (count > kWordBudget) {
            throw std::invalid_argument("for_each_word: k^m exceeds the enumeration budget");
        }
    }
    OutcomeWord word(static_cast<std::size_t>(m), 0);
    for (std::uint64_t c = 0; c < count; ++c) {
        fn(word);
        for (int pos = m - 1; pos >= 0; --pos) {
            auto& sym = word[static_cast<std::size_t>(pos)];
            if (++sym < k) {
                break;
            }
            sym = 0;
        }
    }
}

std::vector<OutcomeWord> enumerate_words(int k, int m) {
    std::vector<OutcomeWord> out;
    for_each_word(k, m, [&](const OutcomeWord& w) { out.push_back(w); });
    return out;
}

void parallel_for(int count, unsigned workers, const std::function<void(int)>& fn) {
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(count, 1)));
    if (workers <= 1) {
        for (int t = 0; t < count; ++t) {
            fn(t);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int t = next++; t < count; t = next++) {
            try {
                fn(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::vector<TrajectorySummary> run_ensemble(const KrausInstrument& ins, const DensityMatrix& rho0, int n_steps,
                                            int n_traj, std::uint64_t base_seed, unsigned workers) {
    if (n_steps < 0 || n_traj < 1) {
        throw std::invalid_argument("run_ensemble: need n_steps >= 0 and n_traj >= 1");
    }
    if (rho0.dim() != ins.dim()) {
        throw std::invalid_argument("run_ensemble: initial state dimension does not match instrument");
    }
    std::vector<std::optional<TrajectorySummary>> slots(static_cast<std::size_t>(n_traj));
    parallel_for(n_traj, workers, [&](int t) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
        Rng rng(seed);
        std::vector<double> purity;
        purity.reserve(static_cast<std::size_t>(n_steps) + 1);
        DensityMatrix rho = rho0;
        purity.push_back(purity_of(rho));
        for (int n = 0; n < n_steps; ++n) {
            rho = step(ins, rho, rng).state;
            purity.push_back(purity_of(rho));
        }
        std::vector<double> moments = moment_traces(rho, ins.dim());
        slots[static_cast<std::size_t>(t)] = TrajectorySummary{seed, std::move(purity), std::move(moments), rho};
    });
    std::vector<TrajectorySummary> out;
    out.reserve(slots.size());
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace qtraj
