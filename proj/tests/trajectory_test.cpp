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

#include <cmath>
#include <set>

#include "gtest/gtest.h"
#include "qtraj/diagnostics.hpp"
#include "test_support.hpp"

using namespace qtraj;

namespace {

KrausInstrument qubit_von_neumann() {
    return from_von_neumann({block_projection(2, 0, 1), block_projection(2, 1, 1)});
}

DensityMatrix diag_state(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return DensityMatrix(m);
}

bool bit_identical(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST(Step, binomial_frequency) {
    const KrausInstrument ins = qubit_von_neumann();
    const DensityMatrix rho = diag_state(0.3, 0.7);
    Rng rng(2024);
    const int n = 10000;
    int ones = 0;
    for (int t = 0; t < n; ++t) {
        if (step(ins, rho, rng).outcome == 0) {
            ++ones;
        }
    }
    const double sigma = std::sqrt(0.3 * 0.7 / n);
    EXPECT_NEAR(static_cast<double>(ones) / n, 0.3, 3 * sigma);
}

TEST(Step, single_unitary_outcome) {
    Rng rng(1);
    const Matrix u = random_unitary(2, rng);
    const KrausInstrument ins({u});
    const DensityMatrix rho = diag_state(0.25, 0.75);
    const StepResult s = step(ins, rho, rng);
    EXPECT_EQ(s.outcome, 0);
    EXPECT_LT(max_abs(s.state.matrix() - u * rho.matrix() * u.adjoint()), 1e-12);
}

TEST(Step, deterministic_for_equal_rng_state) {
    const KrausInstrument ins = random_instrument(3, 3, 4);
    const DensityMatrix rho = DensityMatrix::maximally_mixed(3);
    Rng a(77), b(77);
    const StepResult sa = step(ins, rho, a);
    const StepResult sb = step(ins, rho, b);
    EXPECT_EQ(sa.outcome, sb.outcome);
    EXPECT_TRUE(bit_identical(sa.state.matrix(), sb.state.matrix()));
}

TEST(Simulate, zero_steps) {
    const DensityMatrix rho = diag_state(0.4, 0.6);
    const PathRecord path = simulate(qubit_von_neumann(), {0, 3, rho});
    ASSERT_EQ(path.states.size(), 1u);
    EXPECT_TRUE(path.word.empty());
    EXPECT_TRUE(bit_identical(path.initial_state().matrix(), rho.matrix()));
}

TEST(Simulate, unitary_family_preserves_spectrum) {
    Rng rng(5);
    const KrausInstrument ins = test_util::unitary_family(3, 3, rng);
    const DensityMatrix rho0 = test_util::random_state(3, 3, rng);
    const PathRecord path = simulate(ins, {1000, 9, rho0});
    const RealVector s0 = spectrum(rho0);
    for (const DensityMatrix& rho : path.states) {
        ASSERT_LE((spectrum(rho) - s0).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Simulate, generic_qubit_purifies) {
    const KrausInstrument ins = test_util::generic_qubit_instrument(2, 3);
    int purified = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const PathRecord path = simulate(ins, {500, seed, DensityMatrix::maximally_mixed(2)});
        if (moment_trace(path.final_state(), 2) > 1.0 - 1e-6) {
            ++purified;
        }
    }
    EXPECT_GE(purified, 950);
}

TEST(Simulate, path_consistency_and_determinism) {
    const KrausInstrument ins = random_instrument(3, 2, 8);
    const DensityMatrix rho0 = DensityMatrix::maximally_mixed(3);
    const PathRecord a = simulate(ins, {50, 12, rho0});
    const PathRecord b = simulate(ins, {50, 12, rho0});
    ASSERT_EQ(a.word, b.word);
    for (std::size_t n = 0; n < a.states.size(); ++n) {
        ASSERT_TRUE(bit_identical(a.states[n].matrix(), b.states[n].matrix()));
    }
    for (int n = 0; n < a.steps(); ++n) {
        const Posterior post = apply(ins, a.word[static_cast<std::size_t>(n)], a.states[static_cast<std::size_t>(n)]);
        ASSERT_TRUE(post.state);
        EXPECT_LE(max_abs(post.state->matrix() - a.states[static_cast<std::size_t>(n) + 1].matrix()), 1e-9);
        EXPECT_GT(a.step_probs[static_cast<std::size_t>(n)], kProbFloor);
    }
}

TEST(Simulate, pure_states_stay_pure) {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const KrausInstrument ins = random_instrument(3, 3, 100 + static_cast<std::uint64_t>(trial));
        const DensityMatrix rho0 = test_util::random_state(3, 1, rng);
        const PathRecord path = simulate(ins, {200, static_cast<std::uint64_t>(trial), rho0});
        for (const DensityMatrix& rho : path.states) {
            ASSERT_NEAR(rho.matrix().squaredNorm(), 1.0, 1e-9);
        }
    }
}

TEST(Cylinder, examples) {
    const KrausInstrument vn = qubit_von_neumann();
    const DensityMatrix rho = diag_state(0.3, 0.7);
    EXPECT_EQ(cylinder_probability(vn, rho, {}), rho.matrix().trace().real());
    EXPECT_EQ(cylinder_probability(vn, rho, {0, 1}), 0.0);
    EXPECT_EQ(cylinder_probability(vn, rho, {1, 0}), 0.0);
    EXPECT_NEAR(cylinder_probability(vn, rho, {1, 1, 1}), 0.7, 1e-15);
}

TEST(Cylinder, exhaustive_sum_is_one) {
    for (int trial = 0; trial < 6; ++trial) {
        const int d = 2 + trial % 3;
        const int k = 2 + trial % 2;
        const KrausInstrument ins = random_instrument(d, k, 300 + static_cast<std::uint64_t>(trial));
        Rng rng(static_cast<std::uint64_t>(trial));
        const DensityMatrix rho0 = test_util::random_state(d, rng);
        for (int m = 0; m <= 6; ++m) {
            double total = 0.0;
            for_each_word(k, m, [&](const OutcomeWord& w) { total += cylinder_probability(ins, rho0, w); });
            ASSERT_NEAR(total, 1.0, 1e-9) << "m = " << m;
        }
    }
}

TEST(Cylinder, chain_rule_and_consistency) {
    for (int trial = 0; trial < 8; ++trial) {
        const int d = 2 + trial % 3;
        const int k = 2 + trial % 2;
        const KrausInstrument ins = random_instrument(d, k, 400 + static_cast<std::uint64_t>(trial));
        Rng rng(50 + static_cast<std::uint64_t>(trial));
        const DensityMatrix rho0 = test_util::random_state(d, rng);
        for (int m = 0; m <= 4; ++m) {
            for_each_word(k, m, [&](const OutcomeWord& w) {
                // Product of realized one-step probabilities along conditional states.
                double chain = 1.0;
                DensityMatrix rho = rho0;
                for (int i : w) {
                    const Posterior post = apply(ins, i, rho);
                    chain *= post.prob;
                    rho = *post.state;
                }
                const double direct = cylinder_probability(ins, rho0, w);
                ASSERT_NEAR(chain, direct, 1e-10);
                double children = 0.0;
                for (int i = 0; i < k; ++i) {
                    OutcomeWord longer = w;
                    longer.push_back(i);
                    children += cylinder_probability(ins, rho0, longer);
                }
                ASSERT_NEAR(children, direct, 1e-10);
            });
        }
    }
}

TEST(ConditionalState, examples) {
    const KrausInstrument ins = random_instrument(3, 3, 17);
    Rng rng(3);
    const DensityMatrix rho0 = test_util::random_state(3, rng);
    EXPECT_TRUE(bit_identical(conditional_state(ins, rho0, {})->matrix(), rho0.matrix()));

    const Posterior one = apply(ins, 2, rho0);
    EXPECT_LE(max_abs(conditional_state(ins, rho0, {2})->matrix() - one.state->matrix()), 1e-12);

    // Composition against the product operator a_1 a_2.
    const Matrix a = ins.op(1) * ins.op(2);
    Matrix direct = a * rho0.matrix() * a.adjoint();
    direct /= direct.trace().real();
    const Posterior twice = apply(ins, 1, *apply(ins, 2, rho0).state);
    EXPECT_LE(max_abs(conditional_state(ins, rho0, {2, 1})->matrix() - direct), 1e-12);
    EXPECT_LE(max_abs(twice.state->matrix() - direct), 1e-12);

    const KrausInstrument vn = qubit_von_neumann();
    EXPECT_FALSE(conditional_state(vn, diag_state(0.3, 0.7), {0, 1}));
}

TEST(EnumerateWords, examples) {
    EXPECT_EQ(enumerate_words(2, 1), (std::vector<OutcomeWord>{{0}, {1}}));
    EXPECT_EQ(enumerate_words(2, 2), (std::vector<OutcomeWord>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
    const std::vector<OutcomeWord> words = enumerate_words(3, 4);
    EXPECT_EQ(words.size(), 81u);
    EXPECT_EQ(std::set<OutcomeWord>(words.begin(), words.end()).size(), 81u);
    EXPECT_TRUE(std::is_sorted(words.begin(), words.end()));
    EXPECT_EQ(enumerate_words(3, 0), (std::vector<OutcomeWord>{{}}));
    EXPECT_THROW(enumerate_words(10, 8), std::invalid_argument);
}

TEST(Ensemble, single_trajectory_matches_simulate) {
    const KrausInstrument ins = random_instrument(2, 3, 5);
    const DensityMatrix rho0 = DensityMatrix::maximally_mixed(2);
    const auto runs = run_ensemble(ins, rho0, 40, 1, 99, 1);
    const PathRecord path = simulate(ins, {40, 99, rho0});
    ASSERT_EQ(runs.size(), 1u);
    EXPECT_EQ(runs[0].seed, 99u);
    EXPECT_TRUE(bit_identical(runs[0].final_state.matrix(), path.final_state().matrix()));
}

TEST(Ensemble, worker_count_does_not_change_results) {
    const KrausInstrument ins = random_instrument(3, 2, 6);
    const DensityMatrix rho0 = DensityMatrix::maximally_mixed(3);
    const auto serial = run_ensemble(ins, rho0, 30, 12, 1000, 1);
    const auto parallel = run_ensemble(ins, rho0, 30, 12, 1000, 4);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t t = 0; t < serial.size(); ++t) {
        EXPECT_EQ(serial[t].seed, 1000 + t);
        EXPECT_EQ(serial[t].purity, parallel[t].purity);
        EXPECT_TRUE(bit_identical(serial[t].final_state.matrix(), parallel[t].final_state.matrix()));
    }
}

TEST(Ensemble, mean_purity_nondecreasing) {
    const KrausInstrument ins = random_instrument(3, 2, 8);
    const int n_traj = 1000, n_steps = 30;
    const auto runs = run_ensemble(ins, DensityMatrix::maximally_mixed(3), n_steps, n_traj, 0, 0);
    for (int n = 1; n <= n_steps; ++n) {
        // Paired increments: their mean is ≥ 0 in expectation.
        double mean = 0.0, sq = 0.0;
        for (const auto& r : runs) {
            const double inc = r.purity[static_cast<std::size_t>(n)] - r.purity[static_cast<std::size_t>(n) - 1];
            mean += inc;
            sq += inc * inc;
        }
        mean /= n_traj;
        const double sem = std::sqrt(std::max(0.0, sq / n_traj - mean * mean) / n_traj);
        EXPECT_GE(mean, -3 * sem) << "step " << n;
    }
}
