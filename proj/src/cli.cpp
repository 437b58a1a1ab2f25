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

#include "qtraj/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qtraj/darkspace.hpp"
#include "qtraj/diagnostics.hpp"
#include "qtraj/dichotomy.hpp"
#include "qtraj/io.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        parts.push_back(cur);
    }
    return parts;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (pos != s.size()) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    return v;
}

Eigen::MatrixXd parse_pi(const std::string& text, int l) {
    if (text.empty()) {
        return Eigen::MatrixXd::Constant(l, l, 1.0 / l);
    }
    const std::vector<std::string> rows = split(text, ';');
    if (static_cast<int>(rows.size()) != l) {
        throw std::invalid_argument("--pi must have l rows separated by ';'");
    }
    Eigen::MatrixXd pi(l, l);
    for (int i = 0; i < l; ++i) {
        const std::vector<std::string> cells = split(rows[static_cast<std::size_t>(i)], ',');
        if (static_cast<int>(cells.size()) != l) {
            throw std::invalid_argument("--pi rows must have l comma-separated entries");
        }
        for (int j = 0; j < l; ++j) {
            pi(i, j) = parse_double(cells[static_cast<std::size_t>(j)]);
        }
    }
    return pi;
}

// Stream for generator randomness that must not overlap the base seed's.
constexpr std::uint64_t kSecondaryStream = 0x9E3779B97F4A7C15ULL;

void add_generator_options(CLI::App* app, GeneratorOptions& g) {
    app->add_option("--d", g.d, "System dimension (von-neumann, ancilla-unitary, random)");
    app->add_option("--k", g.k, "Number of outcomes (ancilla-unitary, tensor-dark, random)");
    app->add_option("--l", g.l, "Number of blocks (block-permutation)");
    app->add_option("--e", g.e, "Block dimension (block-permutation)");
    app->add_option("--aux-dim", g.aux_dim, "Dimension of the unitary factor (tensor-dark)");
    app->add_option("--pi", g.pi, "Row-stochastic matrix 'a,b;c,d' (block-permutation, default uniform)");
    app->add_option("--ranks", g.ranks, "Projection ranks '1,2' (von-neumann, default all 1)");
}

struct Common {
    std::string instrument_path;
    std::string gen_name;
    GeneratorOptions gen;
    std::uint64_t gen_seed = 0;
    std::uint64_t seed = 0;
    int n_steps = 0;
    int n_traj = 0;
    unsigned workers = 0;
    std::string initial = "mixed";
    std::string output;
    std::string format;
};

void add_instrument_source(CLI::App* app, Common& c) {
    auto* file = app->add_option("--instrument", c.instrument_path, "Instrument JSON file");
    auto* gen = app->add_option("--gen", c.gen_name, "Use a built-in generator instead of a file")
                    ->check(CLI::IsMember({"von-neumann", "ancilla-unitary", "block-permutation", "tensor-dark",
                                           "random"}));
    file->excludes(gen);
    app->add_option("--gen-seed", c.gen_seed, "Seed for --gen");
    add_generator_options(app, c.gen);
}

KrausInstrument resolve_instrument(const Common& c) {
    if (!c.instrument_path.empty()) {
        return load_instrument(c.instrument_path);
    }
    if (c.gen_name.empty()) {
        throw std::invalid_argument("exactly one of --instrument or --gen is required");
    }
    GeneratorOptions g = c.gen;
    g.name = c.gen_name;
    g.seed = c.gen_seed;
    return generate_example(g);
}

DensityMatrix initial_state(const std::string& which, int d) {
    if (which == "mixed") {
        return DensityMatrix::maximally_mixed(d);
    }
    if (which == "pure0") {
        return DensityMatrix::pure(Vector::Unit(d, 0));
    }
    return DensityMatrix(matrix_from_json(read_json_file(which), "initial state"));
}

void emit(const Common& c, std::ostream& out, const std::string& data) {
    if (c.output.empty()) {
        out << data;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) {
        throw std::invalid_argument("cannot write " + c.output);
    }
    f << data;
}

std::uint64_t default_seed() {
    const char* env = std::getenv("QTRAJ_SEED");
    if (env == nullptr || *env == '\0') {
        return 0;
    }
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(env, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || env[pos] != '\0') {
        throw std::invalid_argument(std::string("QTRAJ_SEED is not an unsigned integer: ") + env);
    }
    return v;
}

}  // namespace

KrausInstrument generate_example(const GeneratorOptions& g) {
    if (g.name == "von-neumann") {
        std::vector<int> ranks;
        if (g.ranks.empty()) {
            ranks.assign(static_cast<std::size_t>(g.d), 1);
        } else {
            for (const std::string& r : split(g.ranks, ',')) {
                ranks.push_back(static_cast<int>(parse_double(r)));
            }
        }
        int d = 0;
        for (int r : ranks) {
            if (r < 1) {
                throw std::invalid_argument("--ranks entries must be positive");
            }
            d += r;
        }
        std::vector<Projection> projections;
        int first = 0;
        for (int r : ranks) {
            projections.push_back(block_projection(d, first, r));
            first += r;
        }
        return from_von_neumann(projections);
    }
    if (g.name == "ancilla-unitary") {
        if (g.d < 2 || g.k < 1) {
            throw std::invalid_argument("ancilla-unitary needs d >= 2 and k >= 1");
        }
        Rng rng(g.seed);
        AncillaSpec spec;
        spec.k = g.k;
        spec.u = random_unitary(g.d * g.k, rng);
        spec.beta = Vector(g.k);
        for (int j = 0; j < g.k; ++j) {
            const double re = rng.normal();
            const double im = rng.normal();
            spec.beta(j) = Complex(re, im);
        }
        spec.beta.normalize();
        return from_ancilla_unitary(spec);
    }
    if (g.name == "block-permutation") {
        return block_permutation_instrument(g.l, g.e, parse_pi(g.pi, g.l), g.seed);
    }
    if (g.name == "tensor-dark") {
        const KrausInstrument b = random_instrument(2, g.k, g.seed);
        Rng rng(g.seed ^ kSecondaryStream);
        std::vector<Matrix> unitaries;
        for (int i = 0; i < g.k; ++i) {
            unitaries.push_back(random_unitary(g.aux_dim, rng));
        }
        return tensor_dark_instrument(b, unitaries);
    }
    if (g.name == "random") {
        return random_instrument(g.d, g.k, g.seed);
    }
    throw std::invalid_argument("unknown generator '" + g.name + "'");
}

KrausInstrument load_instrument(const std::string& path) {
    return KrausInstrument(instrument_operators_from_json(read_json_file(path)));
}

std::string save_instrument(const KrausInstrument& ins) {
    return instrument_to_json(ins).dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum trajectories of repeated perfect measurements", "qtraj"};
    app.require_subcommand(1);

    Common c;
    std::uint64_t seed_fallback = 0;
    try {
        seed_fallback = default_seed();
    } catch (const std::exception& e) {
        err << "qtraj: " << e.what() << '\n';
        return kUsage;
    }
    c.seed = seed_fallback;

    auto add_run_options = [&](CLI::App* sub, bool with_traj) {
        add_instrument_source(sub, c);
        sub->add_option("--seed", c.seed, "Base seed (default: $QTRAJ_SEED or 0)");
        sub->add_option("--n-steps", c.n_steps, "Steps per trajectory")->check(CLI::Range(0, 100'000'000));
        if (with_traj) {
            sub->add_option("--n-traj", c.n_traj, "Number of trajectories")->check(CLI::Range(1, 10'000'000));
            sub->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
        }
        sub->add_option("--initial", c.initial, "Initial state: mixed, pure0, or a matrix JSON file");
        sub->add_option("-o,--output", c.output, "Output file (default: standard output)");
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check completeness of an instrument file");
    validate_cmd->add_option("--instrument", c.instrument_path, "Instrument JSON file")->required();
    validate_cmd->add_option("-o,--output", c.output, "Output file (default: standard output)");

    auto* simulate_cmd = app.add_subcommand("simulate", "Sample one trajectory");
    add_run_options(simulate_cmd, false);
    c.n_steps = -1;
    bool dump_states = false;
    simulate_cmd->add_option("--format", c.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
    simulate_cmd->add_flag("--dump-states", dump_states, "Include the full state in every JSONL row");

    auto* ensemble_cmd = app.add_subcommand("ensemble", "Sample many trajectories");
    add_run_options(ensemble_cmd, true);
    ensemble_cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto* dichotomy_cmd = app.add_subcommand("dichotomy", "Decide purification versus dark subspaces");
    add_run_options(dichotomy_cmd, true);

    DetectParams detect;
    auto* detect_cmd = app.add_subcommand("detect-dark", "Search for a dark projection");
    add_run_options(detect_cmd, true);
    detect_cmd->add_option("--delta-tol", detect.delta_tol, "Bound on the sum of delta_m for candidates");
    detect_cmd->add_option("--plateau-margin", detect.plateau_margin, "Candidates need purity <= 1 - margin");
    detect_cmd->add_option("--dark-tol", detect.dark_tol, "Compression tolerance");

    std::string projection_path;
    int max_closure = 0;
    double dark_tol = kDarkTol;
    auto* verify_cmd = app.add_subcommand("verify-dark", "Check whether a projection is dark");
    add_instrument_source(verify_cmd, c);
    verify_cmd->add_option("--projection", projection_path, "Projection JSON ({\"p\": matrix})")->required();
    verify_cmd->add_option("--max-closure", max_closure, "Closure budget (0 = 4d)");
    verify_cmd->add_option("--dark-tol", dark_tol, "Compression tolerance");
    verify_cmd->add_option("-o,--output", c.output, "Output file (default: standard output)");

    GeneratorOptions gen;
    auto* gen_cmd = app.add_subcommand("gen-example", "Write a built-in instrument as JSON");
    gen_cmd->add_option("--name", gen.name, "Generator")
        ->required()
        ->check(CLI::IsMember({"von-neumann", "ancilla-unitary", "block-permutation", "tensor-dark", "random"}));
    gen_cmd->add_option("--seed", gen.seed, "Generator seed (default: $QTRAJ_SEED or 0)");
    gen.seed = seed_fallback;
    add_generator_options(gen_cmd, gen);
    gen_cmd->add_option("-o,--output", c.output, "Output file (default: standard output)");

    std::vector<const char*> argv;
    argv.push_back("qtraj");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (validate_cmd->parsed()) {
            const std::vector<Matrix> ops = instrument_operators_from_json(read_json_file(c.instrument_path));
            const ValidationReport rep = validate(ops);
            Json j;
            j["ok"] = rep.ok;
            j["residual"] = rep.residual;
            j["message"] = rep.message;
            emit(c, out, j.dump() + "\n");
            err << "residual " << rep.residual << '\n';
            return rep.ok ? kOk : kInvalid;
        }

        if (gen_cmd->parsed()) {
            emit(c, out, save_instrument(generate_example(gen)));
            return kOk;
        }

        const KrausInstrument ins = resolve_instrument(c);

        if (verify_cmd->parsed()) {
            const Projection p = projection_from_json(read_json_file(projection_path));
            const VerifyResult vr = verify_dark(ins, p, max_closure, dark_tol);
            emit(c, out, verify_result_to_json(vr).dump(2) + "\n");
            switch (vr.status) {
                case VerifyStatus::kVerified:
                    return kOk;
                case VerifyStatus::kCounterexample:
                    return kInvalid;
                case VerifyStatus::kUndecided:
                    return kUndecided;
            }
        }

        const DensityMatrix rho0 = initial_state(c.initial, ins.dim());
        if (c.n_steps < 0) {
            c.n_steps = (simulate_cmd->parsed() || ensemble_cmd->parsed()) ? 1000 : 2000;
        }

        if (simulate_cmd->parsed()) {
            const PathRecord path = simulate(ins, TrajectoryConfig{c.n_steps, c.seed, rho0});
            std::ostringstream data;
            if (c.format == "csv") {
                write_moment_csv(data, path, ins.dim());
            } else {
                write_path_jsonl(data, path, dump_states);
            }
            emit(c, out, data.str());
            return kOk;
        }

        if (c.n_traj == 0) {
            c.n_traj = 100;
        }
        if (ensemble_cmd->parsed()) {
            const std::vector<TrajectorySummary> runs =
                run_ensemble(ins, rho0, c.n_steps, c.n_traj, c.seed, c.workers);
            std::vector<double> mean(static_cast<std::size_t>(c.n_steps) + 1, 0.0);
            std::vector<double> sq(mean.size(), 0.0);
            for (const TrajectorySummary& r : runs) {
                for (std::size_t n = 0; n < mean.size(); ++n) {
                    mean[n] += r.purity[n];
                    sq[n] += r.purity[n] * r.purity[n];
                }
            }
            const double count = static_cast<double>(runs.size());
            std::vector<double> sem(mean.size(), 0.0);
            for (std::size_t n = 0; n < mean.size(); ++n) {
                mean[n] /= count;
                const double var = count > 1 ? std::max(0.0, sq[n] / count - mean[n] * mean[n]) * count / (count - 1)
                                             : 0.0;
                sem[n] = std::sqrt(var / count);
            }
            std::ostringstream data;
            if (c.format == "csv") {
                data << "n,mean_purity,sem_purity\n" << std::setprecision(17);
                for (std::size_t n = 0; n < mean.size(); ++n) {
                    data << n << ',' << mean[n] << ',' << sem[n] << '\n';
                }
            } else {
                Json j;
                j["n_steps"] = c.n_steps;
                j["n_traj"] = c.n_traj;
                j["base_seed"] = c.seed;
                Json traj = Json::array();
                for (const TrajectorySummary& r : runs) {
                    PurificationReport pr = classify_purity(r.purity);
                    pr.final_moments = r.final_moments;
                    Json t = purification_to_json(pr);
                    t["seed"] = r.seed;
                    t["final_purity"] = r.purity.back();
                    traj.push_back(std::move(t));
                }
                j["trajectories"] = std::move(traj);
                j["mean_purity"] = mean;
                j["sem_purity"] = sem;
                data << j.dump(2) << '\n';
            }
            emit(c, out, data.str());
            return kOk;
        }

        if (dichotomy_cmd->parsed()) {
            DichotomyBudgets b;
            b.n_steps = c.n_steps;
            b.n_traj = c.n_traj;
            b.base_seed = c.seed;
            b.workers = c.workers;
            const DichotomyReport rep = dichotomy_report(ins, rho0, b);
            emit(c, out, dichotomy_to_json(rep).dump(2) + "\n");
            return rep.alternative == Alternative::kUndetermined ? kUndecided : kOk;
        }

        if (detect_cmd->parsed()) {
            detect.n_steps = c.n_steps;
            detect.n_traj = c.n_traj;
            detect.base_seed = c.seed;
            detect.workers = c.workers;
            const DetectionResult det = detect_dark(ins, rho0, detect);
            emit(c, out, detection_to_json(det).dump(2) + "\n");
            return kOk;
        }
    } catch (const nlohmann::json::parse_error& e) {
        err << "qtraj: malformed JSON: " << e.what() << '\n';
        return kUsage;
    } catch (const SchemaError& e) {
        err << "qtraj: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "qtraj: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "qtraj: " << e.what() << '\n';
        return kInvalid;
    }
    return kUsage;
}

}  // namespace qtraj::cli
