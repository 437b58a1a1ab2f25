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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "qtraj/cli.hpp"
#include "qtraj/darkspace.hpp"
#include "qtraj/diagnostics.hpp"
#include "qtraj/instrument.hpp"
#include "qtraj/trajectory.hpp"
#include "test_support.hpp"

using namespace qtraj;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixXd generic_pi() {
    Eigen::MatrixXd pi(2, 2);
    pi << 0.3, 0.7, 0.6, 0.4;
    return pi;
}

// 1. Σ_i π_i tr((θ'_i)^m) ≥ tr(θ^m) on 10⁴ random triples, within 60 s.
Verdict nielsen_audit() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst = INFINITY;
    int count = 0;
    for (int d = 2; d <= 4; ++d) {
        for (int k = 2; k <= 3; ++k) {
            for (int trial = 0; trial < 1667; ++trial) {
                const KrausInstrument ins = random_instrument(d, k, 1'000'000u * d + 1000u * k + trial);
                const DensityMatrix rho = test_util::random_state(d, rng);
                const int m = 1 + trial % d;
                worst = std::min(worst, nielsen_gap(ins, rho, m));
                ++count;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    return {count >= 10'000 && worst >= -1e-10 && elapsed <= 60.0,
            std::to_string(count) + " triples, min gap " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

// 2. δ_m against explicit one-step enumeration on 10³ triples, within 10 s.
Verdict delta_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(202);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + trial % 3;
        const int k = 2 + (trial / 3) % 2;
        const int m = 1 + (trial / 6) % d;
        const KrausInstrument ins = random_instrument(d, k, 2'000'000u + trial);
        const DensityMatrix rho = test_util::random_state(d, rng);
        worst = std::max(worst, std::abs(delta_m(ins, rho, m) - test_util::delta_by_enumeration(ins, rho, m)));
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-12 && elapsed <= 10.0, "max |diff| " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

// 3. Cylinder probabilities of each length sum to one.
Verdict kolmogorov() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(303);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 3;
        const int k = 2 + (trial / 3) % 2;
        const KrausInstrument ins = random_instrument(d, k, 3'000'000u + trial);
        const DensityMatrix rho = test_util::random_state(d, rng);
        for (int m = 0; m <= 6; ++m) {
            double total = 0.0;
            for_each_word(k, m, [&](const OutcomeWord& w) { total += cylinder_probability(ins, rho, w); });
            worst = std::max(worst, std::abs(total - 1.0));
        }
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-9 && elapsed <= 30.0, "max |Σ−1| " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

// 4. Unitary families leave the spectrum unchanged.
Verdict unitary_invariance() {
    Rng rng(404);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const int d = 2 + static_cast<int>(seed % 3);
        const KrausInstrument ins = test_util::unitary_family(d, 2 + static_cast<int>(seed % 2), rng);
        const DensityMatrix rho0 = test_util::random_state(d, d, rng);
        worst = std::max(worst, spectrum_drift(simulate(ins, {1000, seed, rho0})));
    }
    return {worst <= 1e-9, "max drift " + fmt(worst) + " over 50 seeds"};
}

// 5. Generic qubit instruments purify and show no dark projection. Generic
// means Haar-random with separation kGenericMargin from unitary families.
Verdict qubit_dichotomy() {
    const auto t0 = std::chrono::steady_clock::now();
    int instruments = 0, failures = 0, dark_found = 0;
    double worst_fraction = 1.0;
    for (std::uint64_t seed = 0; instruments < 100; ++seed) {
        const int k = 2 + static_cast<int>(seed % 2);
        const KrausInstrument ins = random_instrument(2, k, 5'000'000u + seed);
        if (test_util::distance_from_unitary_family(ins) <= test_util::kGenericMargin) {
            continue;
        }
        ++instruments;
        const auto runs = run_ensemble(ins, DensityMatrix::maximally_mixed(2), 500, 1000, seed * 1000, 0);
        int reached = 0;
        for (const TrajectorySummary& r : runs) {
            if (*std::max_element(r.purity.begin(), r.purity.end()) >= 1.0 - 1e-6) {
                ++reached;
            }
        }
        const double fraction = reached / 1000.0;
        worst_fraction = std::min(worst_fraction, fraction);
        if (fraction < 0.95) {
            ++failures;
        }
        DetectParams params;
        params.base_seed = seed;
        if (detect_dark(ins, std::nullopt, params).projection) {
            ++dark_found;
        }
    }
    return {failures == 0 && dark_found == 0,
            std::to_string(instruments) + " instruments, worst purified fraction " + fmt(worst_fraction) +
                ", dark found " + std::to_string(dark_found) + ", " + fmt(seconds_since(t0)) + " s"};
}

// 6. Orthogonal block example: limit moments, certified blocks, walk statistics.
Verdict orthogonal_example() {
    const Eigen::MatrixXd pi = generic_pi();
    const KrausInstrument ins = block_permutation_instrument(2, 2, pi, 606);
    std::vector<std::string> problems;

    double moment_err = 0.0;
    for (const TrajectorySummary& r : run_ensemble(ins, DensityMatrix::maximally_mixed(4), 500, 100, 0, 0)) {
        for (int m = 1; m <= 4; ++m) {
            moment_err = std::max(moment_err,
                                  std::abs(r.final_moments[static_cast<std::size_t>(m) - 1] - std::pow(2.0, 1 - m)));
        }
    }
    if (moment_err > 1e-6) {
        problems.push_back("moments off by " + fmt(moment_err));
    }

    double scalar_err = 0.0;
    for (int i = 0; i < 2; ++i) {
        const VerifyResult vr = verify_dark(ins, block_projection(4, 2 * i, 2));
        if (vr.status != VerifyStatus::kVerified) {
            problems.push_back("block " + std::to_string(i) + " not verified");
            continue;
        }
        for (int ii = 0; ii < 2; ++ii) {
            for (int j = 0; j < 2; ++j) {
                const double expected = ii == i ? pi(i, j) : 0.0;
                scalar_err = std::max(scalar_err, std::abs(vr.projection->scalars[ii * 2 + j] - expected));
            }
        }
    }
    if (scalar_err > 1e-8) {
        problems.push_back("scalars off by " + fmt(scalar_err));
    }

    const VerifyResult start = verify_dark(ins, block_projection(4, 0, 2));
    const int n = 10000;
    const DarkWalk walk = dark_walk(ins, *start.projection, n, 6);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(2, 2);
    int from = 0;
    for (const DarkWalkStep& s : walk.steps) {
        const int to = max_abs(s.projection.p.matrix() - block_projection(4, 0, 2).matrix()) < 1e-9 ? 0 : 1;
        counts(from, to) += 1;
        from = to;
    }
    double worst_z = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double row = counts.row(i).sum();
        for (int j = 0; j < 2; ++j) {
            const double sigma = std::sqrt(pi(i, j) * (1 - pi(i, j)) / row);
            worst_z = std::max(worst_z, std::abs(counts(i, j) / row - pi(i, j)) / sigma);
        }
    }
    if (worst_z > 3.0) {
        problems.push_back("walk frequencies off by " + fmt(worst_z) + " sigma");
    }
    std::string detail = "moment err " + fmt(moment_err) + ", scalar err " + fmt(scalar_err) + ", walk max z " +
                         fmt(worst_z);
    for (const std::string& p : problems) {
        detail += "; " + p;
    }
    return {problems.empty(), detail};
}

// 7. Non-orthogonal dark subspaces ψ⊗C²: detected, product form, rank kept.
Verdict tensor_example() {
    Rng rng(707);
    const KrausInstrument b = test_util::generic_qubit_instrument(2, 707);
    const KrausInstrument ins = tensor_dark_instrument(b, {random_unitary(2, rng), random_unitary(2, rng)});
    const DetectionResult det = detect_dark(ins, std::nullopt, {});
    if (!det.projection) {
        return {false, "no projection: " + det.note};
    }
    const Matrix p = det.projection->p.matrix();
    Matrix q(2, 2);
    for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
            q(a, c) = (p(2 * a, 2 * c) + p(2 * a + 1, 2 * c + 1)) / 2.0;
        }
    }
    const double product_err = max_abs(p - kron(q, Matrix::Identity(2, 2)));
    const double rank_one_err = std::max(max_abs(q * q - q), std::abs(q.trace().real() - 1.0));
    const bool verified = verify_dark(ins, det.projection->p, 20).status == VerifyStatus::kVerified;
    bool rank_kept = true;
    for (const DarkWalkStep& s : dark_walk(ins, *det.projection, 1000, 7).steps) {
        rank_kept = rank_kept && s.projection.p.rank() == 2;
    }
    const bool pass = det.projection->p.rank() == 2 && product_err <= kDarkTol && rank_one_err <= kDarkTol &&
                      verified && rank_kept;
    return {pass, "rank " + std::to_string(det.projection->p.rank()) + ", product err " + fmt(product_err) +
                      ", rank-one err " + fmt(rank_one_err) + (verified ? ", verified" : ", NOT verified") +
                      (rank_kept ? ", walk keeps rank 2" : ", walk changed rank")};
}

// 8. Lemma 3 conclusion wherever the hypothesis holds by construction.
Verdict lemma3() {
    Rng rng(808);
    int cases = 0, held = 0;
    double worst_sum = 0.0;
    auto record = [&](const KrausInstrument& ins, const DensityMatrix& rho) {
        const Lemma3Report r = lemma3_check(ins, rho);
        ++cases;
        worst_sum = std::max(worst_sum, std::abs(r.lambda_sum - 1.0));
        if (r.hypothesis_holds && r.conclusion_checked && r.conclusion_holds && std::abs(r.lambda_sum - 1.0) <= 1e-9) {
            ++held;
        }
    };
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + trial % 3;
        const KrausInstrument ins = test_util::unitary_family(d, 2 + trial % 2, rng);
        record(ins, trial % 2 == 0 ? DensityMatrix::maximally_mixed(d) : test_util::random_state(d, rng));
    }
    for (int trial = 0; trial < 50; ++trial) {
        const int l = 2 + trial % 2;
        const int e = 2 + (trial / 2) % 2;
        Eigen::MatrixXd pi(l, l);
        for (int i = 0; i < l; ++i) {
            for (int j = 0; j < l; ++j) {
                pi(i, j) = -std::log(1.0 - rng.uniform());
            }
            pi.row(i) /= pi.row(i).sum();
        }
        const KrausInstrument ins = block_permutation_instrument(l, e, pi, 8'000'000u + trial);
        const int block = trial % l;
        record(ins, DensityMatrix(block_projection(l * e, block * e, e).matrix() / static_cast<double>(e)));
    }
    return {held == cases, std::to_string(held) + "/" + std::to_string(cases) + " certified, max |Σλ−1| " +
                               fmt(worst_sum)};
}

// 9. det_pos(x) = λ^rank ⇒ tr(xp) ≥ λ tr(p), equality iff x = λp.
Verdict detpos() {
    Rng rng(909);
    int violations = 0, flag_errors = 0, equal_cases = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + trial % 4;
        const int rank = 1 + (trial / 4) % d;
        const double lambda = 0.05 + 2.0 * rng.uniform();
        Matrix x;
        const bool constructed_equal = trial % 10 == 0;
        const Matrix g = test_util::ginibre(d, rank, rng);
        if (constructed_equal) {
            Eigen::HouseholderQR<Matrix> qr(g);
            const Matrix q = qr.householderQ() * Matrix::Identity(d, rank);
            x = lambda * q * q.adjoint();
            ++equal_cases;
        } else {
            x = g * g.adjoint();
        }
        x = 0.5 * (x + x.adjoint());
        const double scale = std::pow(lambda, rank) / det_pos(HermitianMatrix(x));
        x *= std::pow(scale, 1.0 / rank);
        const DetposReport r = detpos_implication_check(HermitianMatrix(x), lambda);
        if (!r.premise || !r.inequality_holds || r.trace_xp < r.lambda_trace_p - 1e-10) {
            ++violations;
        }
        // A rank-one x normalized to det_pos = λ is itself λp.
        const bool is_equal_case = constructed_equal || rank == 1;
        if (r.equality != is_equal_case) {
            ++flag_errors;
        }
    }
    return {violations == 0 && flag_errors == 0,
            "1000 instances (" + std::to_string(equal_cases) + " constructed x = λp), " + std::to_string(violations) +
                " violations, " + std::to_string(flag_errors) + " flag mismatches"};
}

// 10. Identical configuration and seed give byte-identical output.
Verdict determinism() {
    const fs::path dir = fs::temp_directory_path() / "qtraj_acceptance";
    fs::create_directories(dir);
    auto invoke = [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return std::make_pair(code, out.str());
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    auto [gcode, instrument_json] =
        invoke({"gen-example", "--name", "block-permutation", "--l", "2", "--e", "2", "--pi", "0.3,0.7;0.6,0.4"});
    const std::string ex1 = (dir / "ex1.json").string();
    std::ofstream(ex1) << instrument_json;
    auto [rcode, random_json] = invoke({"gen-example", "--name", "random", "--d", "2", "--k", "2", "--seed", "5"});
    const std::string generic = (dir / "generic.json").string();
    std::ofstream(generic) << random_json;
    const std::string proj = (dir / "p.json").string();
    std::ofstream(proj) << R"({"p": [[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],)"
                        << R"([[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]})";

    const std::vector<std::vector<std::string>> configs = {
        {"validate", "--instrument", ex1},
        {"gen-example", "--name", "tensor-dark", "--k", "3", "--aux-dim", "2", "--seed", "9"},
        {"simulate", "--instrument", generic, "--n-steps", "200", "--seed", "4", "--dump-states"},
        {"simulate", "--gen", "ancilla-unitary", "--d", "3", "--k", "2", "--n-steps", "200", "--format", "csv"},
        {"ensemble", "--instrument", generic, "--n-steps", "200", "--n-traj", "40", "--seed", "3"},
        {"ensemble", "--instrument", ex1, "--n-steps", "100", "--n-traj", "20", "--format", "csv"},
        {"dichotomy", "--instrument", generic, "--n-steps", "300", "--n-traj", "30", "--seed", "1"},
        {"dichotomy", "--instrument", ex1, "--n-steps", "300", "--n-traj", "30", "--seed", "1"},
        {"detect-dark", "--gen", "tensor-dark", "--k", "2", "--n-steps", "300", "--n-traj", "20"},
        {"verify-dark", "--instrument", ex1, "--projection", proj},
    };
    int compared = 0;
    std::vector<std::string> mismatches;
    for (const auto& cfg : configs) {
        std::vector<std::vector<std::string>> variants;
        for (const char* workers : {"1", "3"}) {
            std::vector<std::string> args = cfg;
            if (cfg[0] == "simulate" || cfg[0] == "ensemble" || cfg[0] == "dichotomy" || cfg[0] == "detect-dark") {
                args.insert(args.end(), {"--workers", workers});
            }
            variants.push_back(args);
        }
        variants.push_back(variants[0]);
        std::vector<std::string> outputs;
        for (std::size_t v = 0; v < variants.size(); ++v) {
            const fs::path file = dir / ("out" + std::to_string(v));
            std::vector<std::string> args = variants[v];
            args.insert(args.end(), {"-o", file.string()});
            if (invoke(args).first >= 2 && cfg[0] != "dichotomy") {
                mismatches.push_back(cfg[0] + " failed");
            }
            outputs.push_back(slurp(file));
        }
        ++compared;
        if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2]) {
            mismatches.push_back(cfg[0] + " differs");
        }
    }
    fs::remove_all(dir);
    std::string detail = std::to_string(compared) + " configurations x 3 runs (workers 1, 3, 1)";
    for (const std::string& m : mismatches) {
        detail += "; " + m;
    }
    return {gcode == 0 && rcode == 0 && mismatches.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"nielsen inequality audit", nielsen_audit},
        {"delta_m one-step identity", delta_identity},
        {"kolmogorov consistency", kolmogorov},
        {"unitary-family spectrum invariance", unitary_invariance},
        {"d=2 dichotomy", qubit_dichotomy},
        {"orthogonal block example", orthogonal_example},
        {"non-orthogonal dark subspaces", tensor_example},
        {"lemma3_check implication", lemma3},
        {"det_pos inequality", detpos},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        Verdict v;
        try {
            v = criteria[c].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << c + 1 << "] " << criteria[c].first << ": " << v.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
