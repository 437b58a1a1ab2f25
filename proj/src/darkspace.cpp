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

#include "qtraj/darkspace.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "qtraj/diagnostics.hpp"

namespace qtraj {

namespace {

// a_w = a_{i_m}⋯a_{i_1}
Matrix word_operator(const KrausInstrument& ins, const OutcomeWord& word) {
    Matrix a = Matrix::Identity(ins.dim(), ins.dim());
    for (int i : word) {
        a = ins.op(i) * a;
    }
    return a;
}

Counterexample make_counterexample(const KrausInstrument& ins, const Projection& p, OutcomeWord word) {
    const Matrix a = word_operator(ins, word);
    const Compression c = compress(a.adjoint() * a, p);
    return {std::move(word), c.residual};
}

// Image projection of p under a (range of a·p), with the singular values of a·p.
struct Image {
    Matrix projection;
    int rank = 0;
};

Image image_of(const Matrix& a, const Projection& p) {
    const PolarDecomposition polar = polar_decompose(a * p.matrix());
    const Matrix& v = polar.isometry;
    Image img;
    img.projection = v * v.adjoint();
    img.projection = 0.5 * (img.projection + img.projection.adjoint());
    img.rank = static_cast<int>(std::lround(img.projection.trace().real()));
    return img;
}

int effective_closure_budget(const KrausInstrument& ins, int max_closure) {
    return max_closure > 0 ? max_closure : 4 * ins.dim();
}

// Checks the compression condition on an orthonormal basis of span{a_w* a_w}.
// Returns the violating word, if any, and the maximal basis word length.
struct SpanOutcome {
    std::optional<OutcomeWord> violation;
    int depth = 0;
};

SpanOutcome span_certificate(const KrausInstrument& ins, const Projection& p, double tol) {
    const int d = ins.dim();
    const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
    struct Element {
        Matrix x;
        OutcomeWord word;
    };
    std::vector<Element> basis;
    std::deque<std::size_t> pending;
    SpanOutcome out;

    auto try_add = [&](const Matrix& x, OutcomeWord word) -> bool {
        Matrix r = x;
        const double scale = r.norm();
        if (scale == 0.0) {
            return true;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (const Element& b : basis) {
                r -= (b.x.cwiseProduct(r.conjugate())).sum().real() * b.x;
            }
        }
        const double rn = r.norm();
        if (rn <= 1e-9 * scale) {
            return true;
        }
        r /= rn;
        r = 0.5 * (r + r.adjoint());
        if (compress(r, p).residual > tol) {
            out.violation = std::move(word);
            return false;
        }
        out.depth = std::max(out.depth, static_cast<int>(word.size()));
        basis.push_back({std::move(r), std::move(word)});
        pending.push_back(basis.size() - 1);
        return true;
    };

    if (!try_add(Matrix::Identity(d, d), {})) {
        return out;
    }
    while (!pending.empty() && static_cast<Eigen::Index>(basis.size()) < n) {
        const std::size_t idx = pending.front();
        pending.pop_front();
        for (int j = 0; j < ins.outcomes(); ++j) {
            // Copy before push_back can reallocate the basis.
            const Matrix x = ins.op(j).adjoint() * basis[idx].x * ins.op(j);
            OutcomeWord word{j};
            word.insert(word.end(), basis[idx].word.begin(), basis[idx].word.end());
            if (!try_add(x, std::move(word))) {
                return out;
            }
        }
    }
    return out;
}

}  // namespace

Compression compress(const Matrix& x, const Projection& p) {
    if (x.rows() != p.dim() || x.cols() != p.dim()) {
        throw std::invalid_argument("compress: dimension mismatch");
    }
    if (p.rank() == 0) {
        throw std::invalid_argument("compress: projection has rank 0");
    }
    const Matrix pxp = p.matrix() * x * p.matrix();
    Compression c;
    c.lambda = pxp.trace().real() / static_cast<double>(p.rank());
    c.residual = max_abs(pxp - c.lambda * p.matrix());
    return c;
}

std::optional<double> scalar_compression_check(const HermitianMatrix& x, const Projection& p, double tol) {
    const Compression c = compress(x.matrix(), p);
    if (c.residual <= tol) {
        return c.lambda;
    }
    return std::nullopt;
}

std::optional<std::vector<double>> one_step_scalars(const KrausInstrument& ins, const Projection& p, double tol) {
    if (p.dim() != ins.dim()) {
        throw std::invalid_argument("one_step_scalars: dimension mismatch");
    }
    std::vector<double> lambdas;
    lambdas.reserve(static_cast<std::size_t>(ins.outcomes()));
    for (int i = 0; i < ins.outcomes(); ++i) {
        const Compression c = compress(ins.effect(i), p);
        if (c.residual > tol) {
            return std::nullopt;
        }
        lambdas.push_back(c.lambda);
    }
    return lambdas;
}

std::optional<DarkTransition> dark_step(const KrausInstrument& ins, const DarkProjection& dp, int outcome,
                                        double tol) {
    if (outcome < 0 || outcome >= ins.outcomes()) {
        throw std::invalid_argument("dark_step: outcome out of range");
    }
    const double lambda = compress(ins.effect(outcome), dp.p).lambda;
    if (lambda <= kProbFloor) {
        return std::nullopt;
    }
    const Image img = image_of(ins.op(outcome), dp.p);
    if (img.rank != dp.p.rank()) {
        std::ostringstream os;
        os << "dark_step: image has rank " << img.rank << ", expected " << dp.p.rank();
        throw DarkViolation(os.str());
    }
    std::optional<Projection> next;
    try {
        next.emplace(img.projection);
    } catch (const InvariantViolation& e) {
        throw DarkViolation(std::string("dark_step: image is not a projection: ") + e.what());
    }
    auto scalars = one_step_scalars(ins, *next, tol);
    if (!scalars) {
        throw DarkViolation("dark_step: image fails the scalar compression condition");
    }
    return DarkTransition{lambda, DarkProjection{std::move(*next), std::move(*scalars), dp.verified_depth}};
}

std::string to_string(VerifyStatus s) {
    switch (s) {
        case VerifyStatus::kVerified:
            return "verified";
        case VerifyStatus::kCounterexample:
            return "counterexample";
        case VerifyStatus::kUndecided:
            return "undecided";
    }
    return "undecided";
}

VerifyResult verify_dark(const KrausInstrument& ins, const Projection& p, int max_closure, double tol) {
    if (p.dim() != ins.dim()) {
        throw std::invalid_argument("verify_dark: dimension mismatch");
    }
    if (p.rank() < 1) {
        throw std::invalid_argument("verify_dark: projection has rank 0");
    }
    const int budget = effective_closure_budget(ins, max_closure);
    const double dedup_tol = 10.0 * tol;

    VerifyResult res;
    std::vector<OutcomeWord> paths;
    std::vector<int> levels;
    std::vector<double> root_scalars;
    res.closure.push_back(p);
    paths.emplace_back();
    levels.push_back(0);

    bool overflow = false;
    int depth = 0;
    for (std::size_t q = 0; q < res.closure.size() && !overflow; ++q) {
        depth = std::max(depth, levels[q]);
        const Projection cur = res.closure[q];
        for (int i = 0; i < ins.outcomes(); ++i) {
            const Compression c = compress(ins.effect(i), cur);
            OutcomeWord word = paths[q];
            word.push_back(i);
            if (c.residual > tol) {
                res.status = VerifyStatus::kCounterexample;
                res.counterexample = make_counterexample(ins, p, std::move(word));
                res.note = "one-step compression fails along the dark walk closure";
                return res;
            }
            if (q == 0) {
                root_scalars.push_back(c.lambda);
            }
            if (c.lambda <= kProbFloor || overflow) {
                continue;
            }
            const Image img = image_of(ins.op(i), cur);
            if (img.rank != cur.rank()) {
                res.status = VerifyStatus::kCounterexample;
                res.counterexample = make_counterexample(ins, p, std::move(word));
                res.note = "dark walk image changes rank";
                return res;
            }
            const bool seen = std::any_of(res.closure.begin(), res.closure.end(), [&](const Projection& r) {
                return max_abs(r.matrix() - img.projection) <= dedup_tol;
            });
            if (seen) {
                continue;
            }
            if (static_cast<int>(res.closure.size()) >= budget) {
                overflow = true;
                continue;
            }
            res.closure.emplace_back(img.projection);
            paths.push_back(std::move(word));
            levels.push_back(levels[q] + 1);
        }
    }

    double sum = 0.0;
    for (double l : root_scalars) {
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw DarkViolation("verify_dark: one-step scalars do not sum to 1");
    }

    if (!overflow) {
        res.closure_complete = true;
        res.status = VerifyStatus::kVerified;
        res.projection = DarkProjection{p, std::move(root_scalars), depth + 1};
        res.note = "dark walk closure is finite";
        return res;
    }

    if (ins.dim() > kSpanCertificateMaxDim) {
        res.status = VerifyStatus::kUndecided;
        res.note = "closure budget exceeded and dimension too large for the span certificate";
        return res;
    }
    res.span_certificate = true;
    const SpanOutcome span = span_certificate(ins, p, tol);
    if (span.violation) {
        res.status = VerifyStatus::kCounterexample;
        res.counterexample = make_counterexample(ins, p, *span.violation);
        res.note = "operator span certificate found a non-scalar compression";
        return res;
    }
    res.status = VerifyStatus::kVerified;
    res.projection = DarkProjection{p, std::move(root_scalars), std::max(span.depth, depth + 1)};
    res.note = "closure budget exceeded; darkness certified on the operator span";
    return res;
}

DarkWalk dark_walk(const KrausInstrument& ins, const DarkProjection& start, int n, std::uint64_t seed, double tol) {
    if (n < 0) {
        throw std::invalid_argument("dark_walk: negative step count");
    }
    DarkWalk walk{start, {}};
    walk.steps.reserve(static_cast<std::size_t>(n));
    Rng rng(seed);
    for (int s = 0; s < n; ++s) {
        const DarkProjection& cur = walk.steps.empty() ? walk.start : walk.steps.back().projection;
        const std::vector<double>& lambdas = cur.scalars;
        double total = 0.0;
        for (double l : lambdas) {
            total += l > kProbFloor ? l : 0.0;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw DarkViolation("dark_walk: transition weights do not sum to 1");
        }
        const double u = rng.uniform() * total;
        int chosen = -1;
        double cdf = 0.0;
        for (int i = 0; i < ins.outcomes(); ++i) {
            if (lambdas[static_cast<std::size_t>(i)] <= kProbFloor) {
                continue;
            }
            chosen = i;
            cdf += lambdas[static_cast<std::size_t>(i)];
            if (u < cdf) {
                break;
            }
        }
        auto tr = dark_step(ins, cur, chosen, tol);
        if (!tr) {
            throw DarkViolation("dark_walk: sampled a forbidden transition");
        }
        walk.steps.push_back({chosen, tr->lambda, std::move(tr->next)});
    }
    return walk;
}

DetectionResult detect_dark(const KrausInstrument& ins, const std::optional<DensityMatrix>& rho0,
                            const DetectParams& params) {
    const DensityMatrix start = rho0 ? *rho0 : DensityMatrix::maximally_mixed(ins.dim());
    return detect_dark_in(ins, run_ensemble(ins, start, params.n_steps, params.n_traj, params.base_seed, params.workers),
                          params);
}

DetectionResult detect_dark_in(const KrausInstrument& ins, const std::vector<TrajectorySummary>& runs,
                               const DetectParams& params) {
    struct Candidate {
        double delta = 0.0;
        std::size_t index = 0;
    };
    std::vector<Candidate> plateaued;
    for (std::size_t t = 0; t < runs.size(); ++t) {
        if (runs[t].purity.back() > 1.0 - params.plateau_margin) {
            continue;
        }
        const double delta = delta_sum(ins, runs[t].final_state);
        if (delta <= params.delta_tol) {
            plateaued.push_back({delta, t});
        }
    }

    DetectionResult res;
    res.plateaued = static_cast<int>(plateaued.size());
    const double needed = std::max(1.0, std::ceil(params.min_fraction * static_cast<double>(runs.size())));
    if (static_cast<double>(plateaued.size()) < needed) {
        std::ostringstream os;
        os << plateaued.size() << " of " << runs.size() << " trajectories plateaued below purity "
           << 1.0 - params.plateau_margin << "; no dark candidate";
        res.note = os.str();
        return res;
    }
    std::stable_sort(plateaued.begin(), plateaued.end(),
                     [](const Candidate& a, const Candidate& b) { return a.delta < b.delta; });

    const double support_tols[] = {kDefaultRankTol, 1e-6, 1e-4};
    std::vector<Matrix> tried;
    const std::size_t n_cand = std::min(plateaued.size(), static_cast<std::size_t>(std::max(1, params.max_candidates)));
    for (std::size_t c = 0; c < n_cand; ++c) {
        const HermitianMatrix rho(runs[plateaued[c].index].final_state.matrix());
        for (double st : support_tols) {
            const Projection p = support_projection(rho, st);
            if (p.rank() < 2) {
                continue;
            }
            const bool dup = std::any_of(tried.begin(), tried.end(),
                                         [&](const Matrix& m) { return max_abs(m - p.matrix()) <= 1e-9; });
            if (dup) {
                continue;
            }
            tried.push_back(p.matrix());
            VerifyResult vr = verify_dark(ins, p, params.max_closure, params.dark_tol);
            if (vr.status == VerifyStatus::kVerified) {
                res.projection = vr.projection;
                res.verification = std::move(vr);
                std::ostringstream os;
                os << "support of plateaued trajectory " << runs[plateaued[c].index].seed << " (rank "
                   << p.rank() << ") verified dark";
                res.note = os.str();
                return res;
            }
            res.verification = std::move(vr);
        }
    }
    res.note = "plateaued candidates found but none verified dark";
    return res;
}

Lemma3Report lemma3_check(const KrausInstrument& ins, const DensityMatrix& rho, double tol) {
    if (rho.dim() != ins.dim()) {
        throw std::invalid_argument("lemma3_check: dimension mismatch");
    }
    Lemma3Report rep;
    rep.hypothesis_holds = true;
    for (int i = 0; i < ins.outcomes(); ++i) {
        const Posterior post = apply(ins, i, rho);
        rep.lambdas.push_back(post.state ? post.prob : 0.0);
        if (post.state && !spectra_unitarily_equivalent(*post.state, rho, tol)) {
            rep.hypothesis_holds = false;
        }
    }
    for (double l : rep.lambdas) {
        rep.lambda_sum += l;
    }
    const Projection p = support_projection(HermitianMatrix(rho.matrix()));
    rep.support_rank = p.rank();
    if (!rep.hypothesis_holds) {
        return rep;
    }
    rep.conclusion_checked = true;
    rep.conclusion_holds = std::abs(rep.lambda_sum - 1.0) <= 1e-9;
    for (int i = 0; i < ins.outcomes(); ++i) {
        const double lambda = rep.lambdas[static_cast<std::size_t>(i)];
        const Matrix pap = p.matrix() * ins.effect(i) * p.matrix();
        const double residual = max_abs(pap - lambda * p.matrix());
        rep.compression_residuals.push_back(residual);
        const auto certified = scalar_compression_check(HermitianMatrix(ins.effect(i)), p, tol);
        if (!certified || std::abs(*certified - lambda) > tol || residual > tol) {
            rep.conclusion_holds = false;
        }
    }
    return rep;
}

DetposReport detpos_implication_check(const HermitianMatrix& x, double lambda, double tol) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("detpos_implication_check: lambda must be positive");
    }
    const Projection p = support_projection(x);
    DetposReport rep;
    rep.det_pos = det_pos(x);
    rep.rank = p.rank();
    const double target = std::pow(lambda, rep.rank);
    rep.premise = std::abs(rep.det_pos - target) <= tol * std::max(1.0, target);
    rep.trace_xp = (x.matrix() * p.matrix()).trace().real();
    rep.lambda_trace_p = lambda * rep.rank;
    rep.inequality_holds = rep.trace_xp >= rep.lambda_trace_p - tol;
    rep.equality = max_abs(x.matrix() - lambda * p.matrix()) <= tol;
    rep.trace_equal = std::abs(rep.trace_xp - rep.lambda_trace_p) <= tol;
    return rep;
}

}  // namespace qtraj
