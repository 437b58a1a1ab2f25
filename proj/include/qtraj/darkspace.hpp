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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtraj/instrument.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

/// Absolute max-norm tolerance on p X p − λ p.
inline constexpr double kDarkTol = 1e-8;

/// Raised when a projection assumed dark turns out not to be.
class DarkViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A projection p with p a_w* a_w p = λ_w p for every outcome word w.
/// scalars[i] = λ_i for the one-letter words; they sum to 1.
struct DarkProjection {
    Projection p;
    std::vector<double> scalars;
    int verified_depth = 0;
};

struct Compression {
    double lambda = 0.0;    // tr(pXp)/tr(p)
    double residual = 0.0;  // ‖pXp − λp‖_max
};

Compression compress(const Matrix& x, const Projection& p);

/// λ with ‖pXp − λp‖_max ≤ tol, if it exists.
std::optional<double> scalar_compression_check(const HermitianMatrix& x, const Projection& p, double tol = kDarkTol);

/// One-step scalars λ_i of p, or empty if some a_i*a_i does not compress to
/// a multiple of p.
std::optional<std::vector<double>> one_step_scalars(const KrausInstrument& ins, const Projection& p,
                                                    double tol = kDarkTol);

struct DarkTransition {
    double lambda = 0.0;
    DarkProjection next;
};

/// p → v_i p v_i* where a_i p = √λ_i v_i p. Empty when λ_i ≤ kProbFloor.
/// Throws DarkViolation if the image is not a dark projection of equal rank.
std::optional<DarkTransition> dark_step(const KrausInstrument& ins, const DarkProjection& dp, int outcome,
                                        double tol = kDarkTol);

enum class VerifyStatus { kVerified, kCounterexample, kUndecided };

std::string to_string(VerifyStatus s);

struct Counterexample {
    OutcomeWord word;       // p a_w* a_w p is not a multiple of p
    double residual = 0.0;  // ‖p a_w* a_w p − λ p‖_max for the best λ
};

struct VerifyResult {
    VerifyStatus status = VerifyStatus::kUndecided;
    std::optional<DarkProjection> projection;
    /// Projections reached by the dark walk from p (p first), deduplicated.
    std::vector<Projection> closure;
    bool closure_complete = false;
    /// Set when the all-words operator span certificate was consulted.
    bool span_certificate = false;
    std::optional<Counterexample> counterexample;
    std::string note;
};

/// Largest dimension for which the operator span certificate is attempted.
inline constexpr int kSpanCertificateMaxDim = 24;

/// Decides whether p is dark.
///
/// First the dark walk closure from p is explored breadth-first, checking
/// the one-step condition at every projection reached. A closed family
/// within max_closure members (0 means 4·d) proves darkness. If the family
/// does not close, the condition is checked on an orthonormal basis of
/// span{a_w* a_w}, the smallest subspace containing 1 and invariant under
/// X ↦ a_j* X a_j, which covers every word at once.
VerifyResult verify_dark(const KrausInstrument& ins, const Projection& p, int max_closure = 0,
                         double tol = kDarkTol);

struct DarkWalkStep {
    int outcome = 0;
    double lambda = 0.0;
    DarkProjection projection;
};

struct DarkWalk {
    DarkProjection start;
    std::vector<DarkWalkStep> steps;
};

/// n steps of p → p'_i drawn with probability λ_i at the current p.
DarkWalk dark_walk(const KrausInstrument& ins, const DarkProjection& start, int n, std::uint64_t seed,
                   double tol = kDarkTol);

struct DetectParams {
    int n_traj = 100;
    int n_steps = 2000;
    std::uint64_t base_seed = 0;
    double plateau_margin = 1e-3;
    double delta_tol = 1e-8;
    double min_fraction = 0.05;  // of n_traj; at least one trajectory
    int max_candidates = 5;
    unsigned workers = 0;
    double dark_tol = kDarkTol;
    int max_closure = 0;
};

struct DetectionResult {
    std::optional<DarkProjection> projection;
    std::optional<VerifyResult> verification;  // the accepted or last rejected candidate
    int plateaued = 0;
    std::string note;
};

/// Runs trajectories from rho0 (maximally mixed if empty), picks late states
/// with purity ≤ 1 − plateau_margin and Σ_{m≤d} δ_m ≤ delta_tol, and verifies
/// the support of the best ones.
DetectionResult detect_dark(const KrausInstrument& ins, const std::optional<DensityMatrix>& rho0,
                            const DetectParams& params = {});

/// The candidate search of detect_dark over an already simulated ensemble.
DetectionResult detect_dark_in(const KrausInstrument& ins, const std::vector<TrajectorySummary>& runs,
                               const DetectParams& params = {});

struct Lemma3Report {
    bool hypothesis_holds = false;
    std::vector<double> lambdas;  // tr(a_i ρ a_i*)
    bool conclusion_checked = false;
    bool conclusion_holds = false;
    std::vector<double> compression_residuals;
    double lambda_sum = 0.0;
    int support_rank = 0;
};

/// If a_i ρ a_i* ~ λ_i ρ for all i, checks p a_i*a_i p = λ_i p on the
/// support p of ρ, and Σ λ_i = 1.
Lemma3Report lemma3_check(const KrausInstrument& ins, const DensityMatrix& rho, double tol = kDarkTol);

struct DetposReport {
    double det_pos = 0.0;
    int rank = 0;
    bool premise = false;  // det_pos(x) = λ^rank(p)
    double trace_xp = 0.0;
    double lambda_trace_p = 0.0;
    bool inequality_holds = false;  // tr(xp) ≥ λ tr(p) − tol
    bool equality = false;          // ‖x − λp‖_max ≤ tol
    bool trace_equal = false;       // |tr(xp) − λ tr(p)| ≤ tol
};

/// Checks det_pos(x) = det_pos(λp) ⇒ tr(xp) ≥ λ tr(p), with equality iff x = λp,
/// where p is the support of x. The premise uses a relative tolerance.
DetposReport detpos_implication_check(const HermitianMatrix& x, double lambda, double tol = 1e-10);

}  // namespace qtraj
