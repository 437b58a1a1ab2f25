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
#include <iosfwd>
#include <string>
#include <vector>

#include "qtraj/instrument.hpp"

namespace qtraj::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,       // bad flags, unreadable or malformed input
    kInvalid = 2,     // invariant or validation failure
    kUndecided = 3,   // verification or dichotomy could not decide
};

/// Parameters of the built-in instrument generators.
struct GeneratorOptions {
    std::string name;  // von-neumann | ancilla-unitary | block-permutation | tensor-dark | random
    int d = 2;
    int k = 2;
    int l = 2;
    int e = 2;
    int aux_dim = 2;
    std::string pi;     // "a,b;c,d" row-major, rows separated by ';'
    std::string ranks;  // "1,2" block sizes for von-neumann
    std::uint64_t seed = 0;
};

KrausInstrument generate_example(const GeneratorOptions& opts);

/// Reads and validates an instrument file. Throws SchemaError or
/// nlohmann::json::parse_error on malformed input and InvariantViolation
/// on a completeness failure.
KrausInstrument load_instrument(const std::string& path);

/// Serialized instrument document, newline terminated.
std::string save_instrument(const KrausInstrument& ins);

/// Runs the tool; args excludes the program name. Data goes to out (or the
/// --output file), diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qtraj::cli
